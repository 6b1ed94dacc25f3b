#pragma once

#include "bcnn/augment.hpp"
#include "bcnn/dataset.hpp"
#include "bcnn/metrics.hpp"
#include "bcnn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

namespace bcnn {

enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
  std::uint32_t epochs = 15;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double val_ratio = 0.25;
  std::uint32_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::Adam;

  // Off by default.
  std::optional<double> clip_norm;
  double weight_decay = 0.0;
  double head_dropout = 0.0;
  std::uint32_t early_stop_patience = 0; // 0 disables early stopping

  // Augmentation of the training side, or of the whole corpus before the split.
  std::optional<AugmentSpec> augment;
  bool augment_before_split = false;

  // Written at the end of training when non-empty.
  std::filesystem::path log_path;
  std::filesystem::path checkpoint_path;
};

// Throws ConfigError on out-of-range values.
void validate(const TrainConfig& config);

struct EpochRecord {
  std::uint32_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  ParameterSet params;
  std::vector<EpochRecord> records;
  DatasetManifest train_split;
  DatasetManifest val_split;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Stratified split, then per epoch: shuffled mini-batch updates followed by a
// full evaluation pass over both splits. A non-finite loss aborts with a
// TrainingError naming the epoch and batch.
TrainResult train(const DatasetManifest& manifest, const ModelConfig& model_config,
                  const TrainConfig& train_config,
                  const std::optional<ParameterSet>& initial_params = std::nullopt,
                  const EpochCallback& on_epoch = {});

struct Evaluation {
  ConfusionMatrix matrix;
  MetricsReport report;
  double mean_loss = 0.0;
};

Evaluation evaluate(const ParameterSet& params, const ModelConfig& model_config,
                    const DatasetManifest& manifest, std::size_t batch_size);

// CSV `epoch,train_loss,train_acc,val_loss,val_acc`, 6 decimals.
void write_log(const std::filesystem::path& path, const std::vector<EpochRecord>& records);

} // namespace bcnn
