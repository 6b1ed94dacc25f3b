#include "bcnn/tensor.hpp"

#include "bcnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bcnn {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) {
      os << 'x';
    }
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_elements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) {
    n *= e;
  }
  return n;
}

namespace {

void validate_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw DimensionError("tensor rank must be 1..4, got " + std::to_string(shape.size()));
  }
  for (std::size_t e : shape) {
    if (e == 0) {
      throw DimensionError("tensor extents must be positive, got " + shape_to_string(shape));
    }
  }
}

} // namespace

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(shape_elements(shape_), fill);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  validate_shape(shape_);
  if (shape_elements(shape_) != data_.size()) {
    throw DimensionError("tensor shape " + shape_to_string(shape_) + " needs " +
                         std::to_string(shape_elements(shape_)) + " elements, got " +
                         std::to_string(data_.size()));
  }
}

template <typename T>
std::size_t BasicTensor<T>::flat_index(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw IndexError("index rank " + std::to_string(index.size()) + " does not match tensor " +
                     shape_to_string(shape_));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) {
      throw IndexError("index " + std::to_string(i) + " out of range on axis " +
                       std::to_string(axis) + " of " + shape_to_string(shape_));
    }
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

template <typename T>
T& BasicTensor<T>::at(std::initializer_list<std::size_t> index) {
  return data_[flat_index(index)];
}

template <typename T>
const T& BasicTensor<T>::at(std::initializer_list<std::size_t> index) const {
  return data_[flat_index(index)];
}

template <typename T>
void BasicTensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool BasicTensor<T>::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
BasicTensor<T>& BasicTensor<T>::operator+=(const BasicTensor& other) {
  if (other.shape_ != shape_) {
    throw DimensionError("cannot add " + shape_to_string(other.shape_) + " into " +
                         shape_to_string(shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    data_[i] += other.data_[i];
  }
  return *this;
}

template class BasicTensor<float>;
template class BasicTensor<double>;

} // namespace bcnn
