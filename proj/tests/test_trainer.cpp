#include <doctest.h>

#include "bcnn/checkpoint.hpp"
#include "bcnn/errors.hpp"
#include "bcnn/synth.hpp"
#include "bcnn/trainer.hpp"
#include "support/temp_dir.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace {

bcnn::ModelConfig small_model() {
  bcnn::ModelConfig c;
  c.input_size = 32;
  c.channels = {4, 8};
  c.seed = 1;
  return c;
}

bcnn::TrainConfig short_run() {
  bcnn::TrainConfig t;
  t.epochs = 3;
  t.batch_size = 8;
  t.learning_rate = 3e-3;
  t.seed = 5;
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

} // namespace

TEST_CASE("a short run records every epoch and lowers the loss") {
  const auto corpus = bcnn::synth_corpus(12, 32, 3);
  std::vector<std::uint32_t> seen;
  const auto result = bcnn::train(corpus, small_model(), short_run(), std::nullopt,
                                  [&](const bcnn::EpochRecord& r) { seen.push_back(r.epoch); });
  CHECK(seen == std::vector<std::uint32_t>{1, 2, 3});
  REQUIRE(result.records.size() == 3);
  CHECK(result.train_split.items.size() == 27);
  CHECK(result.val_split.items.size() == 9);
  CHECK(result.records.back().train_loss < result.records.front().train_loss);
  CHECK(result.params.all_finite());
}

TEST_CASE("identical seeds give identical parameters") {
  const auto corpus = bcnn::synth_corpus(6, 32, 4);
  auto cfg = short_run();
  cfg.epochs = 2;
  const auto a = bcnn::train(corpus, small_model(), cfg);
  const auto b = bcnn::train(corpus, small_model(), cfg);
  CHECK(a.params == b.params);
  CHECK(a.records == b.records);
  cfg.seed = 6;
  CHECK_FALSE(bcnn::train(corpus, small_model(), cfg).params == a.params);
}

TEST_CASE("optional hooks run") {
  const auto corpus = bcnn::synth_corpus(6, 32, 4);
  auto cfg = short_run();
  cfg.epochs = 2;
  cfg.optimizer = bcnn::OptimizerKind::Sgd;
  cfg.learning_rate = 0.05;
  cfg.clip_norm = 1.0;
  cfg.weight_decay = 1e-4;
  cfg.head_dropout = 0.2;
  cfg.augment = bcnn::AugmentSpec{};
  const auto r = bcnn::train(corpus, small_model(), cfg);
  // 18 items at 0.75: floors 4+4+4, round(13.5) = 14 -> 14 train, 4 val; train doubled
  CHECK(r.train_split.items.size() == 2 * 14);
  CHECK(r.val_split.items.size() == 4);

  cfg.augment_before_split = true;
  const auto before = bcnn::train(corpus, small_model(), cfg);
  CHECK(before.train_split.items.size() + before.val_split.items.size() == 36);
}

TEST_CASE("early stopping cuts the run short") {
  const auto corpus = bcnn::synth_corpus(6, 32, 4);
  auto cfg = short_run();
  cfg.epochs = 30;
  cfg.learning_rate = 0.5; // diverges quickly
  cfg.optimizer = bcnn::OptimizerKind::Sgd;
  cfg.early_stop_patience = 1;
  try {
    const auto r = bcnn::train(corpus, small_model(), cfg);
    CHECK(r.records.size() < 30);
  } catch (const bcnn::TrainingError&) {
    // divergence to a non-finite loss is also a valid outcome here
  }
}

TEST_CASE("a non-finite loss aborts with the failing step") {
  const auto corpus = bcnn::synth_corpus(4, 32, 1);
  auto params = bcnn::build_model(small_model());
  params.get("head.bias")[0] = std::numeric_limits<float>::quiet_NaN();
  try {
    bcnn::train(corpus, small_model(), short_run(), params);
    FAIL("expected TrainingError");
  } catch (const bcnn::TrainingError& e) {
    CHECK(std::string(e.what()).find("epoch 1, batch 1") != std::string::npos);
  }
}

TEST_CASE("configuration errors") {
  const auto corpus = bcnn::synth_corpus(4, 32, 1);
  auto cfg = short_run();
  cfg.val_ratio = 0.0;
  CHECK_THROWS_AS(bcnn::train(corpus, small_model(), cfg), bcnn::ConfigError);
  auto model = small_model();
  model.classes = 4;
  CHECK_THROWS_AS(bcnn::train(corpus, model, short_run()), bcnn::ConsistencyError);
  CHECK_THROWS_AS(bcnn::evaluate(bcnn::build_model(model), model, corpus, 8),
                  bcnn::ConsistencyError);
}

TEST_CASE("evaluation accuracy comes from the confusion matrix") {
  const auto corpus = bcnn::synth_corpus(5, 32, 2);
  const auto ev = bcnn::evaluate(bcnn::build_model(small_model()), small_model(), corpus, 4);
  CHECK(ev.matrix.total() == 15);
  CHECK(ev.report.accuracy ==
        static_cast<double>(ev.matrix.trace()) / static_cast<double>(ev.matrix.total()));
  CHECK(ev.mean_loss > 0.0);
}

TEST_CASE("log and checkpoint artifacts") {
  bcnn::testing::TempDir dir("trainer");
  const auto corpus = bcnn::synth_corpus(4, 32, 1);
  auto cfg = short_run();
  cfg.epochs = 2;
  cfg.log_path = dir / "log.csv";
  cfg.checkpoint_path = dir / "ck.bin";
  const auto r = bcnn::train(corpus, small_model(), cfg);
  const std::string log = slurp(cfg.log_path);
  CHECK(log.rfind("epoch,train_loss,train_acc,val_loss,val_acc\n1,", 0) == 0);
  CHECK(std::count(log.begin(), log.end(), '\n') == 3);
  const auto ck = bcnn::load_checkpoint(cfg.checkpoint_path);
  CHECK(ck.params == r.params);
  CHECK(ck.epoch == 2);
  CHECK(ck.train_seed == 5);
  CHECK(ck.config == small_model());
  CHECK_THROWS_AS(bcnn::write_log(dir / "empty.csv", {}), bcnn::ConfigError);
}
