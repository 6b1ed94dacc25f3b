#include <doctest.h>

#include "bcnn/errors.hpp"
#include "bcnn/tensor.hpp"

#include <limits>

using bcnn::Tensor;

TEST_CASE("tensor construction validates rank and extents") {
  CHECK_THROWS_AS(Tensor(bcnn::Shape{}), bcnn::DimensionError);
  CHECK_THROWS_AS(Tensor(bcnn::Shape{1, 2, 3, 4, 5}), bcnn::DimensionError);
  CHECK_THROWS_AS(Tensor(bcnn::Shape{2, 0}), bcnn::DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>(3)), bcnn::DimensionError);

  Tensor t({2, 3}, 1.5f);
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.dim(1) == 3);
  CHECK(t[5] == 1.5f);
}

TEST_CASE("row-major indexing") {
  Tensor t({2, 3, 4});
  t.at({1, 2, 3}) = 7.0f;
  CHECK(t[1 * 12 + 2 * 4 + 3] == 7.0f);
  CHECK_THROWS_AS(t.at({2, 0, 0}), bcnn::IndexError);
  CHECK_THROWS_AS(t.at({0, 0}), bcnn::IndexError);
}

TEST_CASE("accumulation requires equal shapes") {
  Tensor a({2, 2}, std::vector<float>{1, 2, 3, 4});
  Tensor b({2, 2}, std::vector<float>{10, 20, 30, 40});
  a += b;
  CHECK(a == Tensor({2, 2}, std::vector<float>{11, 22, 33, 44}));
  CHECK_THROWS_AS(a += Tensor({4}), bcnn::DimensionError);
}

TEST_CASE("finiteness and casting") {
  Tensor t({3});
  CHECK(t.all_finite());
  t[1] = std::numeric_limits<float>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
  const auto d = Tensor({2}, std::vector<float>{0.25f, -1.0f}).cast<double>();
  CHECK(d[0] == 0.25);
  CHECK(d[1] == -1.0);
  CHECK(bcnn::shape_to_string({2, 3}) == "[2x3]");
}
