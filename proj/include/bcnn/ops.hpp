#pragma once

#include "bcnn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

// Differentiable primitives. Each forward op returns its output together with
// an op context holding exactly what the paired backward rule needs; there is
// no general graph. All ops are pure functions of their arguments.
namespace bcnn {

enum class OpKind { Conv2d, MaxPool2, Relu, Upsample2, ConcatChannels, Dense, GlobalAvgPool };

template <typename T, typename Context>
struct OpResult {
  BasicTensor<T> output;
  Context context;
};

// ---- matmul ----------------------------------------------------------------

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
struct MatmulGrads {
  BasicTensor<T> a;
  BasicTensor<T> b;
};

// dA = dY * B^T, dB = A^T * dY.
template <typename T>
MatmulGrads<T> matmul_backward(const BasicTensor<T>& a, const BasicTensor<T>& b,
                               const BasicTensor<T>& dy);

// ---- conv2d ----------------------------------------------------------------

template <typename T>
struct Conv2dContext {
  static constexpr OpKind kind = OpKind::Conv2d;
  BasicTensor<T> input;
  BasicTensor<T> weight;
  std::size_t stride = 1;
  std::size_t pad = 0;
};

template <typename T>
struct Conv2dGrads {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

// Cross-correlation with zero padding; output extent (H + 2 pad - kh) / stride + 1.
template <typename T>
OpResult<T, Conv2dContext<T>> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                                     const BasicTensor<T>& bias, std::size_t stride,
                                     std::size_t pad);

template <typename T>
Conv2dGrads<T> conv2d_backward(const Conv2dContext<T>& ctx, const BasicTensor<T>& dy);

// ---- maxpool2 --------------------------------------------------------------

template <typename T>
struct MaxPool2Context {
  static constexpr OpKind kind = OpKind::MaxPool2;
  Shape input_shape;
  std::vector<std::uint32_t> argmax; // flat input index per output element
};

template <typename T>
OpResult<T, MaxPool2Context<T>> maxpool2(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> maxpool2_backward(const MaxPool2Context<T>& ctx, const BasicTensor<T>& dy);

// ---- relu ------------------------------------------------------------------

template <typename T>
struct ReluContext {
  static constexpr OpKind kind = OpKind::Relu;
  Shape shape;
  std::vector<std::uint8_t> active; // x > 0
};

template <typename T>
OpResult<T, ReluContext<T>> relu(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> relu_backward(const ReluContext<T>& ctx, const BasicTensor<T>& dy);

// ---- upsample2 -------------------------------------------------------------

template <typename T>
struct Upsample2Context {
  static constexpr OpKind kind = OpKind::Upsample2;
  Shape input_shape;
};

template <typename T>
OpResult<T, Upsample2Context<T>> upsample2(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> upsample2_backward(const Upsample2Context<T>& ctx, const BasicTensor<T>& dy);

// ---- concat_channels -------------------------------------------------------

template <typename T>
struct ConcatContext {
  static constexpr OpKind kind = OpKind::ConcatChannels;
  Shape a_shape;
  Shape b_shape;
};

// Concatenates along axis 1 (channels for rank 4, features for rank 2).
template <typename T>
OpResult<T, ConcatContext<T>> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> concat_channels_backward(const ConcatContext<T>& ctx,
                                                                   const BasicTensor<T>& dy);

// ---- dense -----------------------------------------------------------------

template <typename T>
struct DenseContext {
  static constexpr OpKind kind = OpKind::Dense;
  BasicTensor<T> input;
  BasicTensor<T> weight;
};

template <typename T>
struct DenseGrads {
  BasicTensor<T> input;
  BasicTensor<T> weight;
  BasicTensor<T> bias;
};

template <typename T>
OpResult<T, DenseContext<T>> dense(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                                   const BasicTensor<T>& bias);

template <typename T>
DenseGrads<T> dense_backward(const DenseContext<T>& ctx, const BasicTensor<T>& dy);

// ---- global average pool ---------------------------------------------------

template <typename T>
struct GlobalAvgPoolContext {
  static constexpr OpKind kind = OpKind::GlobalAvgPool;
  Shape input_shape;
};

// [B x C x H x W] -> [B x C], per-channel spatial mean.
template <typename T>
OpResult<T, GlobalAvgPoolContext<T>> global_avg_pool(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> global_avg_pool_backward(const GlobalAvgPoolContext<T>& ctx,
                                        const BasicTensor<T>& dy);

// ---- loss ------------------------------------------------------------------

template <typename T>
struct LossResult {
  double loss = 0.0;
  BasicTensor<T> grad; // (softmax - onehot) / B
};

// Mean softmax cross-entropy over the batch, computed with max subtraction.
template <typename T>
LossResult<T> softmax_xent(const BasicTensor<T>& logits, std::span<const int> targets);

// Row-wise softmax probabilities, evaluated in double.
template <typename T>
std::vector<double> softmax_row(const BasicTensor<T>& logits, std::size_t row);

} // namespace bcnn
