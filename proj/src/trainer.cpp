#include "bcnn/trainer.hpp"

#include "bcnn/checkpoint.hpp"
#include "bcnn/errors.hpp"
#include "bcnn/optimizer.hpp"
#include "bcnn/random.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace bcnn {

void validate(const TrainConfig& config) {
  if (config.epochs < 1) {
    throw ConfigError("epochs must be at least 1");
  }
  if (config.batch_size < 1) {
    throw ConfigError("batch size must be at least 1");
  }
  if (!(config.val_ratio > 0.0 && config.val_ratio < 1.0)) {
    throw ConfigError("validation ratio must lie in (0, 1)");
  }
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (config.clip_norm && !(*config.clip_norm > 0.0)) {
    throw ConfigError("clip norm must be positive");
  }
  if (config.weight_decay < 0.0) {
    throw ConfigError("weight decay must be non-negative");
  }
  if (!(config.head_dropout >= 0.0 && config.head_dropout < 1.0)) {
    throw ConfigError("head dropout must lie in [0, 1)");
  }
  if (config.augment) {
    validate(*config.augment);
  }
}

namespace {

void check_classes(const ModelConfig& model_config, const DatasetManifest& manifest) {
  if (manifest.class_count() != model_config.classes) {
    throw ConsistencyError("model predicts " + std::to_string(model_config.classes) +
                           " classes but the corpus has " +
                           std::to_string(manifest.class_count()));
  }
}

Evaluation evaluate_batches(const ParameterSet& params, const std::vector<std::string>& names,
                            const std::vector<Batch>& batches) {
  ConfusionMatrix matrix(names);
  double loss_sum = 0.0;
  std::size_t n = 0;
  for (const auto& batch : batches) {
    const auto logits = forward(params, batch.images).logits;
    loss_sum += softmax_xent(logits, batch.labels).loss * static_cast<double>(batch.labels.size());
    n += batch.labels.size();
    matrix.accumulate(batch.labels, argmax_rows(logits));
  }
  if (n == 0) {
    throw CorpusError("cannot evaluate an empty manifest");
  }
  MetricsReport report = metrics_report(matrix);
  return {std::move(matrix), std::move(report), loss_sum / static_cast<double>(n)};
}

} // namespace

Evaluation evaluate(const ParameterSet& params, const ModelConfig& model_config,
                    const DatasetManifest& manifest, std::size_t batch_size) {
  check_classes(model_config, manifest);
  if (params.get(kHeadBias).size() != model_config.classes) {
    throw ConsistencyError("parameter head does not match the model config");
  }
  if (manifest.items.empty()) {
    throw CorpusError("cannot evaluate an empty manifest");
  }
  return evaluate_batches(params, manifest.class_names,
                          to_batches(manifest, batch_size, model_config.input_size));
}

TrainResult train(const DatasetManifest& manifest, const ModelConfig& model_config,
                  const TrainConfig& cfg, const std::optional<ParameterSet>& initial_params,
                  const EpochCallback& on_epoch) {
  validate(model_config);
  validate(cfg);
  check_classes(model_config, manifest);

  TrainResult result;
  const double train_ratio = 1.0 - cfg.val_ratio;
  const std::uint64_t split_seed = derive_seed(cfg.seed, {0x73706c6974ULL});
  if (cfg.augment && cfg.augment_before_split) {
    std::tie(result.train_split, result.val_split) =
        stratified_split(augment_dataset(manifest, *cfg.augment), train_ratio, split_seed);
  } else {
    std::tie(result.train_split, result.val_split) =
        stratified_split(manifest, train_ratio, split_seed);
    if (cfg.augment) {
      result.train_split = augment_dataset(result.train_split, *cfg.augment);
    }
  }
  if (result.train_split.items.empty() || result.val_split.items.empty()) {
    throw CorpusError("split left an empty side (" + std::to_string(result.train_split.items.size()) +
                      " train / " + std::to_string(result.val_split.items.size()) + " val)");
  }

  ParameterSet params = initial_params ? *initial_params : build_model(model_config);
  if (!params.congruent(build_model(model_config))) {
    throw ConsistencyError("initial parameters do not match the model config");
  }
  AdamState adam = adam_init(params, AdamHyper{cfg.learning_rate});

  const std::size_t size = model_config.input_size;
  const auto train_eval = to_batches(result.train_split, cfg.batch_size, size);
  const auto val_eval = to_batches(result.val_split, cfg.batch_size, size);

  double best_val = std::numeric_limits<double>::infinity();
  std::uint32_t stale = 0;
  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto batches =
        to_batches(result.train_split, cfg.batch_size, size, derive_seed(cfg.seed, {epoch}));
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      ForwardOptions options;
      options.head_dropout = cfg.head_dropout;
      options.dropout_seed = derive_seed(cfg.seed, {epoch, b, 0x64726f70ULL});
      auto fwd = forward(params, batch.images, options);
      auto loss = softmax_xent(fwd.logits, batch.labels);
      if (!std::isfinite(loss.loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(b + 1));
      }
      ParameterSet grads = backward(params, fwd.trace, loss.grad);
      if (cfg.weight_decay > 0.0) {
        for (std::size_t i = 0; i < grads.size(); ++i) {
          auto g = grads[i].value.data();
          const auto p = params[i].value.data();
          for (std::size_t j = 0; j < g.size(); ++j) {
            g[j] += static_cast<float>(cfg.weight_decay) * p[j];
          }
        }
      }
      if (cfg.clip_norm) {
        clip_global_norm(grads, *cfg.clip_norm);
      }
      try {
        if (cfg.optimizer == OptimizerKind::Adam) {
          adam_step(adam, params, grads);
        } else {
          sgd_step(params, grads, cfg.learning_rate);
        }
      } catch (const UpdateError& e) {
        throw TrainingError("update failed at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(b + 1) + ": " + e.what());
      }
    }

    const Evaluation tr = evaluate_batches(params, result.train_split.class_names, train_eval);
    const Evaluation va = evaluate_batches(params, result.val_split.class_names, val_eval);
    if (!std::isfinite(tr.mean_loss) || !std::isfinite(va.mean_loss)) {
      throw TrainingError("non-finite evaluation loss after epoch " + std::to_string(epoch));
    }
    EpochRecord record{epoch, tr.mean_loss, tr.report.accuracy, va.mean_loss, va.report.accuracy};
    result.records.push_back(record);
    if (on_epoch) {
      on_epoch(record);
    }

    if (cfg.early_stop_patience > 0) {
      if (va.mean_loss < best_val) {
        best_val = va.mean_loss;
        stale = 0;
      } else if (++stale >= cfg.early_stop_patience) {
        break;
      }
    }
  }

  result.params = std::move(params);
  if (!cfg.log_path.empty()) {
    write_log(cfg.log_path, result.records);
  }
  if (!cfg.checkpoint_path.empty()) {
    save_checkpoint(cfg.checkpoint_path,
                    Checkpoint{kCheckpointVersion, model_config, result.params, cfg.seed,
                               result.records.back().epoch});
  }
  return result;
}

void write_log(const std::filesystem::path& path, const std::vector<EpochRecord>& records) {
  if (records.empty()) {
    throw ConfigError("training log needs at least one record");
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write log " + path.string());
  }
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : records) {
    out << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ',' << r.val_loss << ','
        << r.val_acc << '\n';
  }
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

} // namespace bcnn
