#include <doctest.h>

#include "bcnn/errors.hpp"
#include "bcnn/model.hpp"
#include "bcnn/random.hpp"

#include <cmath>

namespace {

bcnn::Tensor random_batch(std::size_t n, std::size_t size, std::uint64_t seed) {
  bcnn::Rng rng(seed);
  bcnn::Tensor t({n, 1, size, size});
  for (float& v : t.data()) {
    v = static_cast<float>(rng.uniform());
  }
  return t;
}

} // namespace

TEST_CASE("default configuration has the hand-counted parameter total") {
  const auto params = bcnn::build_model(bcnn::ModelConfig{});
  // stage1 16*1*9+16, stage2 32*16*9+32, stage3 64*32*9+64,
  // refine1 16*48*9+16, refine2 32*96*9+32, head 80*3+3
  CHECK(params.total_elements() == 160 + 4640 + 18496 + 6928 + 27680 + 243);
  CHECK(params.total_elements() == 58147);
  CHECK(params.size() == 12);
  CHECK(params[0].name == "stage1.weight");
  CHECK(params.get("refine2.weight").shape() == bcnn::Shape{32, 96, 3, 3});
  CHECK(params.get("head.weight").shape() == bcnn::Shape{80, 3});
}

TEST_CASE("config validation") {
  bcnn::ModelConfig c;
  c.input_size = 60; // not divisible by 8
  CHECK_THROWS_AS(bcnn::validate(c), bcnn::ConfigError);
  c = {};
  c.channels = {16};
  CHECK_THROWS_AS(bcnn::validate(c), bcnn::ConfigError);
  c = {};
  c.classes = 1;
  CHECK_THROWS_AS(bcnn::validate(c), bcnn::ConfigError);
  CHECK_NOTHROW(bcnn::validate(bcnn::ModelConfig{}));
}

TEST_CASE("initialisation is seeded He-normal with zero biases") {
  bcnn::ModelConfig c;
  c.seed = 5;
  const auto a = bcnn::build_model(c);
  CHECK(a == bcnn::build_model(c));
  c.seed = 6;
  CHECK_FALSE(a == bcnn::build_model(c));

  for (float v : a.get("stage3.bias").data()) {
    CHECK(v == 0.0f);
  }
  // sample std of refine2.weight against sqrt(2 / fan_in), fan_in = 96 * 9
  const auto w = a.get("refine2.weight").data();
  double sq = 0.0;
  for (float v : w) {
    sq += static_cast<double>(v) * v;
  }
  const double stddev = std::sqrt(sq / static_cast<double>(w.size()));
  CHECK(stddev == doctest::Approx(std::sqrt(2.0 / 864.0)).epsilon(0.02));
}

TEST_CASE("forward produces one logit row per sample and rejects bad shapes") {
  const auto params = bcnn::build_model(bcnn::ModelConfig{});
  const auto out = bcnn::forward(params, random_batch(2, 64, 1));
  CHECK(out.logits.shape() == bcnn::Shape{2, 3});
  CHECK(out.logits.all_finite());
  CHECK(out.trace.forward_maps.back().shape() == bcnn::Shape{2, 64, 8, 8});
  CHECK(out.trace.topdown_maps.front().shape() == bcnn::Shape{2, 16, 32, 32});
  CHECK_THROWS_AS(bcnn::forward(params, random_batch(1, 60, 1)), bcnn::DimensionError);
  CHECK_THROWS_AS(bcnn::forward(params, bcnn::Tensor({1, 64})), bcnn::DimensionError);
}

TEST_CASE("samples are processed independently of their batch position") {
  const auto config = bcnn::tiny_model_config(3);
  const auto params = bcnn::build_model(config);
  const auto batch = random_batch(3, 8, 9);
  bcnn::Tensor swapped(batch.shape());
  const std::size_t plane = 64;
  const std::size_t order[] = {2, 0, 1};
  for (std::size_t i = 0; i < 3; ++i) {
    std::copy_n(batch.raw() + order[i] * plane, plane, swapped.raw() + i * plane);
  }
  const auto a = bcnn::forward(params, batch).logits;
  const auto b = bcnn::forward(params, swapped).logits;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(b.at({i, k}) == a.at({order[i], k}));
    }
  }
}

TEST_CASE("full model gradients match finite differences") {
  for (std::uint32_t seed : {0u, 7u, 11u}) {
    const auto report = bcnn::check_model_gradients(bcnn::tiny_model_config(seed), 2, seed);
    CHECK(report.tensors.size() == 8);
    INFO("seed " << seed);
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("backward refuses a trace from other parameters") {
  const auto small = bcnn::build_model(bcnn::tiny_model_config(0));
  auto other_config = bcnn::tiny_model_config(0);
  other_config.channels = {4, 3};
  const auto other = bcnn::build_model(other_config);
  const auto fwd = bcnn::forward(small, random_batch(1, 8, 2));
  CHECK_THROWS_AS(bcnn::backward(other, fwd.trace, bcnn::Tensor({1, 3})), bcnn::ConsistencyError);
}

TEST_CASE("head dropout is off by default and seeded when on") {
  const auto params = bcnn::build_model(bcnn::tiny_model_config(1));
  const auto batch = random_batch(4, 8, 3);
  const auto plain = bcnn::forward(params, batch);
  CHECK(plain.trace.dropout_scale.empty());
  bcnn::ForwardOptions opt{0.5, 42};
  const auto a = bcnn::forward(params, batch, opt);
  const auto b = bcnn::forward(params, batch, opt);
  CHECK(a.logits == b.logits);
  CHECK(a.trace.dropout_scale.size() == plain.trace.pooled.size());
}

TEST_CASE("argmax ties go to the lowest index") {
  const bcnn::Tensor logits({2, 3}, std::vector<float>{1, 1, 0, -1, 2, 2});
  CHECK(bcnn::argmax_rows(logits) == std::vector<int>{0, 1});
}
