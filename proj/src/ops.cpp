#include "bcnn/ops.hpp"

#include "bcnn/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace bcnn {

namespace {

void require_rank(const Shape& shape, std::size_t rank, const char* op, const char* what) {
  if (shape.size() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must be rank " + std::to_string(rank) +
                         ", got " + shape_to_string(shape));
  }
}

// Range of output columns whose tap (ox * stride + k - pad) lands inside [0, extent).
struct TapRange {
  std::size_t lo;
  std::size_t hi;
};

TapRange tap_range(std::size_t k, std::size_t pad, std::size_t stride, std::size_t extent,
                   std::size_t out_extent) {
  // need ox*stride + k >= pad  and  ox*stride + k - pad <= extent - 1
  std::size_t lo = 0;
  if (pad > k) {
    lo = (pad - k + stride - 1) / stride;
  }
  const std::size_t limit = extent - 1 + pad; // ox*stride + k <= limit
  std::size_t hi = 0;
  if (limit >= k) {
    hi = std::min(out_extent, (limit - k) / stride + 1);
  }
  if (hi < lo) {
    hi = lo;
  }
  return {lo, hi};
}

} // namespace

// ---- matmul ----------------------------------------------------------------

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_rank(a.shape(), 2, "matmul", "a");
  require_rank(b.shape(), 2, "matmul", "b");
  if (a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: inner extents differ for " + shape_to_string(a.shape()) +
                         " and " + shape_to_string(b.shape()));
  }
  const std::size_t m = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t n = b.dim(1);
  BasicTensor<T> y({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    T* yrow = y.raw() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      const T* brow = b.raw() + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        yrow[j] += av * brow[j];
      }
    }
  }
  return y;
}

template <typename T>
MatmulGrads<T> matmul_backward(const BasicTensor<T>& a, const BasicTensor<T>& b,
                               const BasicTensor<T>& dy) {
  const std::size_t m = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t n = b.dim(1);
  if (dy.shape() != Shape{m, n}) {
    throw DimensionError("matmul_backward: upstream " + shape_to_string(dy.shape()) +
                         " does not match output [" + std::to_string(m) + "x" +
                         std::to_string(n) + "]");
  }
  MatmulGrads<T> g{BasicTensor<T>(a.shape()), BasicTensor<T>(b.shape())};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      T acc{0};
      for (std::size_t j = 0; j < n; ++j) {
        acc += dy[i * n + j] * b[p * n + j];
      }
      g.a[i * k + p] = acc;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      for (std::size_t j = 0; j < n; ++j) {
        g.b[p * n + j] += av * dy[i * n + j];
      }
    }
  }
  return g;
}

// ---- conv2d ----------------------------------------------------------------

template <typename T>
OpResult<T, Conv2dContext<T>> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                                     const BasicTensor<T>& bias, std::size_t stride,
                                     std::size_t pad) {
  require_rank(x.shape(), 4, "conv2d", "input");
  require_rank(weight.shape(), 4, "conv2d", "weight");
  require_rank(bias.shape(), 1, "conv2d", "bias");
  if (stride == 0) {
    throw DimensionError("conv2d: stride must be positive");
  }
  const std::size_t batch = x.dim(0);
  const std::size_t cin = x.dim(1);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  const std::size_t cout = weight.dim(0);
  const std::size_t kh = weight.dim(2);
  const std::size_t kw = weight.dim(3);
  if (weight.dim(1) != cin) {
    throw DimensionError("conv2d: weight " + shape_to_string(weight.shape()) +
                         " expects input channels " + std::to_string(weight.dim(1)) +
                         ", input is " + shape_to_string(x.shape()));
  }
  if (bias.dim(0) != cout) {
    throw DimensionError("conv2d: bias " + shape_to_string(bias.shape()) + " does not match " +
                         std::to_string(cout) + " output channels");
  }
  if (h + 2 * pad < kh || w + 2 * pad < kw) {
    throw DimensionError("conv2d: kernel " + shape_to_string(weight.shape()) +
                         " larger than padded input " + shape_to_string(x.shape()) +
                         " with pad " + std::to_string(pad));
  }
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1;
  const std::size_t ow = (w + 2 * pad - kw) / stride + 1;

  BasicTensor<T> y({batch, cout, oh, ow});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      T* out = y.raw() + (b * cout + co) * oh * ow;
      std::fill(out, out + oh * ow, bias[co]);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const T* in = x.raw() + (b * cin + ci) * h * w;
        const T* kern = weight.raw() + (co * cin + ci) * kh * kw;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const TapRange rows = tap_range(ky, pad, stride, h, oh);
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const TapRange cols = tap_range(kx, pad, stride, w, ow);
            const T wv = kern[ky * kw + kx];
            for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
              const T* src = in + (oy * stride + ky - pad) * w;
              T* dst = out + oy * ow;
              if (stride == 1) {
                const T* shifted = src + (cols.lo + kx - pad);
                for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                  dst[ox] += wv * shifted[ox - cols.lo];
                }
              } else {
                for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                  dst[ox] += wv * src[ox * stride + kx - pad];
                }
              }
            }
          }
        }
      }
    }
  }
  return {std::move(y), Conv2dContext<T>{x, weight, stride, pad}};
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Conv2dContext<T>& ctx, const BasicTensor<T>& dy) {
  const BasicTensor<T>& x = ctx.input;
  const BasicTensor<T>& weight = ctx.weight;
  const std::size_t stride = ctx.stride;
  const std::size_t pad = ctx.pad;
  const std::size_t batch = x.dim(0);
  const std::size_t cin = x.dim(1);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  const std::size_t cout = weight.dim(0);
  const std::size_t kh = weight.dim(2);
  const std::size_t kw = weight.dim(3);
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1;
  const std::size_t ow = (w + 2 * pad - kw) / stride + 1;
  if (dy.shape() != Shape{batch, cout, oh, ow}) {
    throw DimensionError("conv2d_backward: upstream " + shape_to_string(dy.shape()) +
                         " does not match output [" + std::to_string(batch) + "x" +
                         std::to_string(cout) + "x" + std::to_string(oh) + "x" +
                         std::to_string(ow) + "]");
  }

  Conv2dGrads<T> g{BasicTensor<T>(x.shape()), BasicTensor<T>(weight.shape()),
                   BasicTensor<T>(Shape{cout})};

  for (std::size_t co = 0; co < cout; ++co) {
    T acc{0};
    for (std::size_t b = 0; b < batch; ++b) {
      const T* up = dy.raw() + (b * cout + co) * oh * ow;
      for (std::size_t i = 0; i < oh * ow; ++i) {
        acc += up[i];
      }
    }
    g.bias[co] = acc;
  }

  // Weight gradient: correlation of the input with the upstream gradient.
  // Eight fixed partial lanes keep the summation order independent of the
  // compiler's vectorization decisions.
  constexpr std::size_t kLanes = 8;
  for (std::size_t co = 0; co < cout; ++co) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      for (std::size_t ky = 0; ky < kh; ++ky) {
        const TapRange rows = tap_range(ky, pad, stride, h, oh);
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const TapRange cols = tap_range(kx, pad, stride, w, ow);
          std::array<T, kLanes> lanes{};
          T tail{0};
          for (std::size_t b = 0; b < batch; ++b) {
            const T* up = dy.raw() + (b * cout + co) * oh * ow;
            const T* in = x.raw() + (b * cin + ci) * h * w;
            for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
              const T* src = in + (oy * stride + ky - pad) * w;
              const T* grad = up + oy * ow;
              std::size_t ox = cols.lo;
              if (stride == 1) {
                const T* shifted = src + (cols.lo + kx - pad);
                for (; ox + kLanes <= cols.hi; ox += kLanes) {
                  for (std::size_t l = 0; l < kLanes; ++l) {
                    lanes[l] += grad[ox + l] * shifted[ox - cols.lo + l];
                  }
                }
              }
              for (; ox < cols.hi; ++ox) {
                tail += grad[ox] * src[ox * stride + kx - pad];
              }
            }
          }
          T acc = tail;
          for (T v : lanes) {
            acc += v;
          }
          g.weight[((co * cin + ci) * kh + ky) * kw + kx] = acc;
        }
      }
    }
  }

  // Input gradient: scatter of the upstream gradient through the kernel.
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ci = 0; ci < cin; ++ci) {
      T* dx = g.input.raw() + (b * cin + ci) * h * w;
      for (std::size_t co = 0; co < cout; ++co) {
        const T* up = dy.raw() + (b * cout + co) * oh * ow;
        const T* kern = weight.raw() + (co * cin + ci) * kh * kw;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          const TapRange rows = tap_range(ky, pad, stride, h, oh);
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const TapRange cols = tap_range(kx, pad, stride, w, ow);
            const T wv = kern[ky * kw + kx];
            for (std::size_t oy = rows.lo; oy < rows.hi; ++oy) {
              T* dst = dx + (oy * stride + ky - pad) * w;
              const T* grad = up + oy * ow;
              if (stride == 1) {
                T* shifted = dst + (cols.lo + kx - pad);
                for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                  shifted[ox - cols.lo] += wv * grad[ox];
                }
              } else {
                for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                  dst[ox * stride + kx - pad] += wv * grad[ox];
                }
              }
            }
          }
        }
      }
    }
  }
  return g;
}

// ---- maxpool2 --------------------------------------------------------------

template <typename T>
OpResult<T, MaxPool2Context<T>> maxpool2(const BasicTensor<T>& x) {
  require_rank(x.shape(), 4, "maxpool2", "input");
  const std::size_t batch = x.dim(0);
  const std::size_t c = x.dim(1);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw DimensionError("maxpool2: spatial extents of " + shape_to_string(x.shape()) +
                         " must be even; pad or resize the input");
  }
  const std::size_t oh = h / 2;
  const std::size_t ow = w / 2;
  BasicTensor<T> y({batch, c, oh, ow});
  MaxPool2Context<T> ctx{x.shape(), std::vector<std::uint32_t>(y.size())};
  for (std::size_t plane = 0; plane < batch * c; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        // Window positions in increasing flat order; strict > keeps the lowest index on ties.
        const std::array<std::size_t, 4> window{base + (2 * i) * w + 2 * j,
                                                base + (2 * i) * w + 2 * j + 1,
                                                base + (2 * i + 1) * w + 2 * j,
                                                base + (2 * i + 1) * w + 2 * j + 1};
        std::size_t best = window[0];
        for (std::size_t k = 1; k < 4; ++k) {
          if (x[window[k]] > x[best]) {
            best = window[k];
          }
        }
        const std::size_t o = (plane * oh + i) * ow + j;
        y[o] = x[best];
        ctx.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return {std::move(y), std::move(ctx)};
}

template <typename T>
BasicTensor<T> maxpool2_backward(const MaxPool2Context<T>& ctx, const BasicTensor<T>& dy) {
  if (dy.size() != ctx.argmax.size()) {
    throw DimensionError("maxpool2_backward: upstream " + shape_to_string(dy.shape()) +
                         " does not match the pooled output");
  }
  BasicTensor<T> dx(ctx.input_shape);
  for (std::size_t o = 0; o < ctx.argmax.size(); ++o) {
    dx[ctx.argmax[o]] += dy[o];
  }
  return dx;
}

// ---- relu ------------------------------------------------------------------

template <typename T>
OpResult<T, ReluContext<T>> relu(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  ReluContext<T> ctx{x.shape(), std::vector<std::uint8_t>(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool on = x[i] > T{0};
    ctx.active[i] = on ? 1 : 0;
    y[i] = on ? x[i] : T{0};
  }
  return {std::move(y), std::move(ctx)};
}

template <typename T>
BasicTensor<T> relu_backward(const ReluContext<T>& ctx, const BasicTensor<T>& dy) {
  if (dy.shape() != ctx.shape) {
    throw DimensionError("relu_backward: upstream " + shape_to_string(dy.shape()) +
                         " does not match input " + shape_to_string(ctx.shape));
  }
  BasicTensor<T> dx(ctx.shape);
  for (std::size_t i = 0; i < dy.size(); ++i) {
    dx[i] = ctx.active[i] ? dy[i] : T{0};
  }
  return dx;
}

// ---- upsample2 -------------------------------------------------------------

template <typename T>
OpResult<T, Upsample2Context<T>> upsample2(const BasicTensor<T>& x) {
  require_rank(x.shape(), 4, "upsample2", "input");
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  BasicTensor<T> y({x.dim(0), x.dim(1), 2 * h, 2 * w});
  for (std::size_t p = 0; p < planes; ++p) {
    const T* in = x.raw() + p * h * w;
    T* out = y.raw() + p * 4 * h * w;
    for (std::size_t r = 0; r < 2 * h; ++r) {
      for (std::size_t c = 0; c < 2 * w; ++c) {
        out[r * 2 * w + c] = in[(r / 2) * w + c / 2];
      }
    }
  }
  return {std::move(y), Upsample2Context<T>{x.shape()}};
}

template <typename T>
BasicTensor<T> upsample2_backward(const Upsample2Context<T>& ctx, const BasicTensor<T>& dy) {
  const Shape& s = ctx.input_shape;
  const Shape expected{s[0], s[1], 2 * s[2], 2 * s[3]};
  if (dy.shape() != expected) {
    throw DimensionError("upsample2_backward: upstream " + shape_to_string(dy.shape()) +
                         " does not match " + shape_to_string(expected));
  }
  const std::size_t planes = s[0] * s[1];
  const std::size_t h = s[2];
  const std::size_t w = s[3];
  BasicTensor<T> dx(s);
  for (std::size_t p = 0; p < planes; ++p) {
    const T* up = dy.raw() + p * 4 * h * w;
    T* out = dx.raw() + p * h * w;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        const T* blk = up + (2 * r) * 2 * w + 2 * c;
        out[r * w + c] = blk[0] + blk[1] + blk[2 * w] + blk[2 * w + 1];
      }
    }
  }
  return dx;
}

// ---- concat_channels -------------------------------------------------------

template <typename T>
OpResult<T, ConcatContext<T>> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.empty() || b.empty()) {
    throw DimensionError("concat_channels: both inputs need at least one channel");
  }
  if (a.rank() != b.rank() || (a.rank() != 2 && a.rank() != 4)) {
    throw DimensionError("concat_channels: expected two rank-2 or two rank-4 tensors, got " +
                         shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
  }
  bool match = a.dim(0) == b.dim(0);
  for (std::size_t axis = 2; axis < a.rank(); ++axis) {
    match = match && a.dim(axis) == b.dim(axis);
  }
  if (!match) {
    throw DimensionError("concat_channels: batch/spatial mismatch between " +
                         shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
  }
  const std::size_t batch = a.dim(0);
  const std::size_t a_block = a.size() / batch;
  const std::size_t b_block = b.size() / batch;
  Shape out_shape = a.shape();
  out_shape[1] = a.dim(1) + b.dim(1);
  BasicTensor<T> y(out_shape);
  for (std::size_t n = 0; n < batch; ++n) {
    T* dst = y.raw() + n * (a_block + b_block);
    std::copy_n(a.raw() + n * a_block, a_block, dst);
    std::copy_n(b.raw() + n * b_block, b_block, dst + a_block);
  }
  return {std::move(y), ConcatContext<T>{a.shape(), b.shape()}};
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> concat_channels_backward(const ConcatContext<T>& ctx,
                                                                   const BasicTensor<T>& dy) {
  BasicTensor<T> da(ctx.a_shape);
  BasicTensor<T> db(ctx.b_shape);
  const std::size_t batch = ctx.a_shape[0];
  const std::size_t a_block = da.size() / batch;
  const std::size_t b_block = db.size() / batch;
  if (dy.size() != da.size() + db.size() || dy.dim(0) != batch) {
    throw DimensionError("concat_channels_backward: upstream " + shape_to_string(dy.shape()) +
                         " does not match the concatenated output");
  }
  for (std::size_t n = 0; n < batch; ++n) {
    const T* src = dy.raw() + n * (a_block + b_block);
    std::copy_n(src, a_block, da.raw() + n * a_block);
    std::copy_n(src + a_block, b_block, db.raw() + n * b_block);
  }
  return {std::move(da), std::move(db)};
}

// ---- dense -----------------------------------------------------------------

template <typename T>
OpResult<T, DenseContext<T>> dense(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                                   const BasicTensor<T>& bias) {
  require_rank(x.shape(), 2, "dense", "input");
  require_rank(weight.shape(), 2, "dense", "weight");
  require_rank(bias.shape(), 1, "dense", "bias");
  if (x.dim(1) != weight.dim(0) || bias.dim(0) != weight.dim(1)) {
    throw DimensionError("dense: shapes " + shape_to_string(x.shape()) + ", " +
                         shape_to_string(weight.shape()) + ", " + shape_to_string(bias.shape()) +
                         " are incompatible");
  }
  BasicTensor<T> y = matmul(x, weight);
  const std::size_t k = weight.dim(1);
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    for (std::size_t j = 0; j < k; ++j) {
      y[n * k + j] += bias[j];
    }
  }
  return {std::move(y), DenseContext<T>{x, weight}};
}

template <typename T>
DenseGrads<T> dense_backward(const DenseContext<T>& ctx, const BasicTensor<T>& dy) {
  auto mm = matmul_backward(ctx.input, ctx.weight, dy);
  const std::size_t k = ctx.weight.dim(1);
  BasicTensor<T> dbias(Shape{k});
  for (std::size_t n = 0; n < dy.dim(0); ++n) {
    for (std::size_t j = 0; j < k; ++j) {
      dbias[j] += dy[n * k + j];
    }
  }
  return {std::move(mm.a), std::move(mm.b), std::move(dbias)};
}

// ---- global average pool ---------------------------------------------------

template <typename T>
OpResult<T, GlobalAvgPoolContext<T>> global_avg_pool(const BasicTensor<T>& x) {
  require_rank(x.shape(), 4, "global_avg_pool", "input");
  const std::size_t planes = x.dim(0) * x.dim(1);
  const std::size_t area = x.dim(2) * x.dim(3);
  BasicTensor<T> y({x.dim(0), x.dim(1)});
  for (std::size_t p = 0; p < planes; ++p) {
    const T* in = x.raw() + p * area;
    T acc{0};
    for (std::size_t i = 0; i < area; ++i) {
      acc += in[i];
    }
    y[p] = acc / static_cast<T>(area);
  }
  return {std::move(y), GlobalAvgPoolContext<T>{x.shape()}};
}

template <typename T>
BasicTensor<T> global_avg_pool_backward(const GlobalAvgPoolContext<T>& ctx,
                                        const BasicTensor<T>& dy) {
  const Shape& s = ctx.input_shape;
  if (dy.shape() != Shape{s[0], s[1]}) {
    throw DimensionError("global_avg_pool_backward: upstream " + shape_to_string(dy.shape()) +
                         " does not match input " + shape_to_string(s));
  }
  const std::size_t area = s[2] * s[3];
  BasicTensor<T> dx(s);
  for (std::size_t p = 0; p < s[0] * s[1]; ++p) {
    const T v = dy[p] / static_cast<T>(area);
    std::fill_n(dx.raw() + p * area, area, v);
  }
  return dx;
}

// ---- loss ------------------------------------------------------------------

template <typename T>
std::vector<double> softmax_row(const BasicTensor<T>& logits, std::size_t row) {
  const std::size_t k = logits.dim(1);
  const T* z = logits.raw() + row * k;
  double zmax = static_cast<double>(z[0]);
  for (std::size_t j = 1; j < k; ++j) {
    zmax = std::max(zmax, static_cast<double>(z[j]));
  }
  std::vector<double> p(k);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    p[j] = std::exp(static_cast<double>(z[j]) - zmax);
    sum += p[j];
  }
  for (double& v : p) {
    v /= sum;
  }
  return p;
}

template <typename T>
LossResult<T> softmax_xent(const BasicTensor<T>& logits, std::span<const int> targets) {
  require_rank(logits.shape(), 2, "softmax_xent", "logits");
  const std::size_t batch = logits.dim(0);
  const std::size_t k = logits.dim(1);
  if (k < 2) {
    throw DimensionError("softmax_xent: need at least two classes, got " + std::to_string(k));
  }
  if (targets.size() != batch) {
    throw DimensionError("softmax_xent: " + std::to_string(targets.size()) +
                         " targets for batch of " + std::to_string(batch));
  }
  LossResult<T> out{0.0, BasicTensor<T>(logits.shape())};
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double total = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    const int t = targets[n];
    if (t < 0 || static_cast<std::size_t>(t) >= k) {
      throw IndexError("softmax_xent: target " + std::to_string(t) + " outside [0, " +
                       std::to_string(k) + ")");
    }
    const T* z = logits.raw() + n * k;
    double zmax = static_cast<double>(z[0]);
    for (std::size_t j = 1; j < k; ++j) {
      zmax = std::max(zmax, static_cast<double>(z[j]));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sum += std::exp(static_cast<double>(z[j]) - zmax);
    }
    const double log_sum = std::log(sum);
    total += log_sum - (static_cast<double>(z[t]) - zmax);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(static_cast<double>(z[j]) - zmax - log_sum);
      const double onehot = static_cast<std::size_t>(t) == j ? 1.0 : 0.0;
      out.grad[n * k + j] = static_cast<T>((p - onehot) * inv_batch);
    }
  }
  out.loss = total * inv_batch;
  return out;
}

#define BCNN_INSTANTIATE_OPS(T)                                                                \
  template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);                \
  template MatmulGrads<T> matmul_backward(const BasicTensor<T>&, const BasicTensor<T>&,        \
                                          const BasicTensor<T>&);                              \
  template OpResult<T, Conv2dContext<T>> conv2d(const BasicTensor<T>&, const BasicTensor<T>&,  \
                                                const BasicTensor<T>&, std::size_t,            \
                                                std::size_t);                                  \
  template Conv2dGrads<T> conv2d_backward(const Conv2dContext<T>&, const BasicTensor<T>&);     \
  template OpResult<T, MaxPool2Context<T>> maxpool2(const BasicTensor<T>&);                    \
  template BasicTensor<T> maxpool2_backward(const MaxPool2Context<T>&, const BasicTensor<T>&); \
  template OpResult<T, ReluContext<T>> relu(const BasicTensor<T>&);                            \
  template BasicTensor<T> relu_backward(const ReluContext<T>&, const BasicTensor<T>&);         \
  template OpResult<T, Upsample2Context<T>> upsample2(const BasicTensor<T>&);                  \
  template BasicTensor<T> upsample2_backward(const Upsample2Context<T>&,                       \
                                             const BasicTensor<T>&);                           \
  template OpResult<T, ConcatContext<T>> concat_channels(const BasicTensor<T>&,                \
                                                         const BasicTensor<T>&);               \
  template std::pair<BasicTensor<T>, BasicTensor<T>> concat_channels_backward(                 \
      const ConcatContext<T>&, const BasicTensor<T>&);                                         \
  template OpResult<T, DenseContext<T>> dense(const BasicTensor<T>&, const BasicTensor<T>&,    \
                                              const BasicTensor<T>&);                          \
  template DenseGrads<T> dense_backward(const DenseContext<T>&, const BasicTensor<T>&);        \
  template OpResult<T, GlobalAvgPoolContext<T>> global_avg_pool(const BasicTensor<T>&);        \
  template BasicTensor<T> global_avg_pool_backward(const GlobalAvgPoolContext<T>&,             \
                                                   const BasicTensor<T>&);                     \
  template LossResult<T> softmax_xent(const BasicTensor<T>&, std::span<const int>);            \
  template std::vector<double> softmax_row(const BasicTensor<T>&, std::size_t);

BCNN_INSTANTIATE_OPS(float)
BCNN_INSTANTIATE_OPS(double)

#undef BCNN_INSTANTIATE_OPS

} // namespace bcnn
