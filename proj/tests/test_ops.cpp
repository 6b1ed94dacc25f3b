#include <doctest.h>

#include "bcnn/errors.hpp"
#include "bcnn/ops.hpp"
#include "support/op_gradchecks.hpp"

#include <cmath>

using bcnn::Tensor;

TEST_CASE("matmul by hand") {
  const Tensor a({2, 2}, std::vector<float>{1, 2, 3, 4});
  const Tensor b({2, 2}, std::vector<float>{5, 6, 7, 8});
  CHECK(bcnn::matmul(a, b) == Tensor({2, 2}, std::vector<float>{19, 22, 43, 50}));
  CHECK_THROWS_AS(bcnn::matmul(a, Tensor({3, 2})), bcnn::DimensionError);
}

TEST_CASE("conv2d of ones with a ones kernel counts covered taps") {
  const Tensor x({1, 1, 3, 3}, 1.0f);
  const Tensor w({1, 1, 3, 3}, 1.0f);
  const Tensor b({1}, 0.5f);
  const auto y = bcnn::conv2d(x, w, b, 1, 1);
  // corners see 4 taps, edges 6, centre 9
  CHECK(y.output == Tensor({1, 1, 3, 3}, std::vector<float>{4.5f, 6.5f, 4.5f, 6.5f, 9.5f, 6.5f,
                                                             4.5f, 6.5f, 4.5f}));
  const auto no_pad = bcnn::conv2d(x, w, b, 1, 0);
  CHECK(no_pad.output.shape() == bcnn::Shape{1, 1, 1, 1});
  CHECK(no_pad.output[0] == 9.5f);
  CHECK_THROWS_AS(bcnn::conv2d(x, Tensor({1, 2, 3, 3}), b, 1, 1), bcnn::DimensionError);
}

TEST_CASE("conv2d is cross-correlation") {
  Tensor x({1, 1, 1, 3}, std::vector<float>{1, 2, 3});
  Tensor w({1, 1, 1, 3}, std::vector<float>{1, 0, -1});
  const auto y = bcnn::conv2d(x, w, Tensor({1}), 1, 0);
  CHECK(y.output[0] == doctest::Approx(1 * 1 + 3 * -1));
}

TEST_CASE("maxpool2 routes gradient to the first maximum") {
  const Tensor x({1, 1, 2, 4}, std::vector<float>{1, 5, 7, 7, 5, 2, 7, 0});
  const auto y = bcnn::maxpool2(x);
  CHECK(y.output == Tensor({1, 1, 1, 2}, std::vector<float>{5, 7}));
  const auto dx = bcnn::maxpool2_backward(y.context, Tensor({1, 1, 1, 2}, std::vector<float>{1, 2}));
  CHECK(dx == Tensor({1, 1, 2, 4}, std::vector<float>{0, 1, 2, 0, 0, 0, 0, 0}));
  CHECK_THROWS_AS(bcnn::maxpool2(Tensor({1, 1, 3, 4})), bcnn::DimensionError);
}

TEST_CASE("relu and its mask") {
  const Tensor x({4}, std::vector<float>{-1, 0, 2, -0.5f});
  const auto y = bcnn::relu(x);
  CHECK(y.output == Tensor({4}, std::vector<float>{0, 0, 2, 0}));
  CHECK(bcnn::relu_backward(y.context, Tensor({4}, 3.0f)) ==
        Tensor({4}, std::vector<float>{0, 0, 3, 0}));
}

TEST_CASE("upsample2 replicates and its backward sums blocks") {
  const Tensor x({1, 1, 1, 2}, std::vector<float>{1, 2});
  const auto y = bcnn::upsample2(x);
  CHECK(y.output == Tensor({1, 1, 2, 4}, std::vector<float>{1, 1, 2, 2, 1, 1, 2, 2}));
  const Tensor dy({1, 1, 2, 4}, std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(bcnn::upsample2_backward(y.context, dy) == Tensor({1, 1, 1, 2}, std::vector<float>{14, 22}));
}

TEST_CASE("concat_channels keeps per-sample blocks together") {
  const Tensor a({2, 1}, std::vector<float>{1, 2});
  const Tensor b({2, 2}, std::vector<float>{3, 4, 5, 6});
  const auto y = bcnn::concat_channels(a, b);
  CHECK(y.output == Tensor({2, 3}, std::vector<float>{1, 3, 4, 2, 5, 6}));
  const auto [da, db] = bcnn::concat_channels_backward(y.context, y.output);
  CHECK(da == a);
  CHECK(db == b);
  CHECK_THROWS_AS(bcnn::concat_channels(Tensor({2, 1}), Tensor({3, 1})), bcnn::DimensionError);
}

TEST_CASE("dense and global average pool") {
  const Tensor x({1, 2}, std::vector<float>{1, 2});
  const Tensor w({2, 2}, std::vector<float>{1, 0, 1, 1});
  const Tensor b({2}, std::vector<float>{0.5f, -1});
  CHECK(bcnn::dense(x, w, b).output == Tensor({1, 2}, std::vector<float>{3.5f, 1}));

  const Tensor m({1, 2, 2, 2}, std::vector<float>{1, 2, 3, 4, 0, 0, 0, 8});
  CHECK(bcnn::global_avg_pool(m).output == Tensor({1, 2}, std::vector<float>{2.5f, 2}));
}

TEST_CASE("softmax cross-entropy on uniform logits") {
  const Tensor logits({2, 3});
  const std::vector<int> targets{0, 2};
  const auto l = bcnn::softmax_xent(logits, targets);
  CHECK(l.loss == doctest::Approx(std::log(3.0)));
  const float third = 1.0f / 3.0f;
  CHECK(l.grad[0] == doctest::Approx((third - 1.0f) / 2.0f));
  CHECK(l.grad[1] == doctest::Approx(third / 2.0f));
  CHECK(l.grad[5] == doctest::Approx((third - 1.0f) / 2.0f));
  const std::vector<int> bad{0, 3};
  CHECK_THROWS_AS(bcnn::softmax_xent(logits, bad), bcnn::IndexError);
}

TEST_CASE("softmax cross-entropy stays finite for large logits") {
  const Tensor logits({1, 2}, std::vector<float>{1000.0f, 0.0f});
  const std::vector<int> targets{1};
  const auto l = bcnn::softmax_xent(logits, targets);
  CHECK(l.loss == doctest::Approx(1000.0));
  CHECK(l.grad.all_finite());
  const auto p = bcnn::softmax_row(logits, 0);
  CHECK(p[0] == doctest::Approx(1.0));
}

TEST_CASE("every primitive passes its finite-difference check") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& c : bcnn::testing::run_op_gradchecks(seed)) {
      INFO(c.op << " wrt " << c.wrt << " seed " << seed);
      CHECK(c.max_rel_error < 1e-6);
    }
  }
}
