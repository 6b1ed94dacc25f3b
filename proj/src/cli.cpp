#include "bcnn/cli.hpp"

#include "bcnn/augment.hpp"
#include "bcnn/checkpoint.hpp"
#include "bcnn/dataset.hpp"
#include "bcnn/errors.hpp"
#include "bcnn/metrics.hpp"
#include "bcnn/model.hpp"
#include "bcnn/synth.hpp"
#include "bcnn/trainer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace bcnn::cli {

namespace {

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << (i ? "," : "") << values[i];
  }
  return os.str();
}

struct SynthArgs {
  std::string out;
  std::size_t per_class = 0;
  std::size_t size = 64;
  std::uint32_t seed = 0;
};

struct AugmentArgs {
  std::string in;
  std::string out;
  AugmentSpec spec;
  std::uint32_t seed = 0;
};

struct TrainArgs {
  std::string data;
  std::string checkpoint;
  std::string log;
  std::string optimizer = "adam";
  bool split_ratio_alt = false;
  std::size_t size = 64;
  std::vector<std::uint32_t> channels{16, 32, 64};
  std::size_t augment_variants = 0;
  double clip = 0.0;
  TrainConfig config;
};

struct EvalArgs {
  std::string data;
  std::string checkpoint;
  std::string report;
  std::size_t batch = 32;
};

struct PredictArgs {
  std::string image;
  std::string checkpoint;
  std::vector<std::string> class_names;
};

struct GradcheckArgs {
  std::uint32_t seed = 0;
  double tol = 1e-4;
  std::size_t batch = 2;
};

std::vector<std::string> default_class_names(std::size_t classes) {
  if (classes == kDistressClassCount) {
    return {"fatigue", "linear", "potholes"};
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < classes; ++i) {
    names.push_back("class" + std::to_string(i));
  }
  return names;
}

int do_synth(const SynthArgs& a, std::ostream& out) {
  out << "synth: out=" << a.out << " per_class=" << a.per_class << " size=" << a.size
      << " seed=" << a.seed << '\n';
  DatasetManifest corpus = synth_corpus(a.per_class, a.size, a.seed);
  write_dataset(corpus, a.out);
  out << "wrote " << corpus.items.size() << " images to " << a.out << '\n';
  return kOk;
}

int do_augment(AugmentArgs a, std::ostream& out) {
  a.spec.seed = a.seed;
  out << "augment: in=" << a.in << " out=" << a.out << " variants=" << a.spec.variants
      << " rotations=" << join(a.spec.rotations) << " scales=" << join(a.spec.scales)
      << " brightness=" << join(a.spec.brightness) << " seed=" << a.seed << '\n';
  const DatasetManifest source = load_dataset(a.in);
  for (const auto& w : source.warnings) {
    out << "warning: " << w << '\n';
  }
  DatasetManifest augmented = augment_dataset(source, a.spec);
  write_dataset(augmented, a.out);
  out << "wrote " << augmented.items.size() << " images to " << a.out << '\n';
  return kOk;
}

int do_train(TrainArgs a, std::ostream& out) {
  TrainConfig& cfg = a.config;
  if (a.split_ratio_alt) {
    cfg.val_ratio = 0.2;
  }
  cfg.optimizer = a.optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
  if (a.clip > 0.0) {
    cfg.clip_norm = a.clip;
  }
  if (a.augment_variants > 0) {
    AugmentSpec spec;
    spec.variants = a.augment_variants;
    spec.seed = cfg.seed;
    cfg.augment = spec;
  }
  cfg.checkpoint_path = a.checkpoint;
  cfg.log_path = a.log;

  ModelConfig model;
  model.input_size = static_cast<std::uint32_t>(a.size);
  model.channels = a.channels;
  model.seed = cfg.seed;

  out << "train: data=" << a.data << " epochs=" << cfg.epochs << " batch=" << cfg.batch_size
      << " lr=" << cfg.learning_rate << " val_ratio=" << cfg.val_ratio << " seed=" << cfg.seed
      << " optimizer=" << a.optimizer << " size=" << a.size << " channels=" << join(a.channels)
      << " clip=" << a.clip << " weight_decay=" << cfg.weight_decay
      << " dropout=" << cfg.head_dropout << " patience=" << cfg.early_stop_patience
      << " augment_variants=" << a.augment_variants
      << " augment_before_split=" << (cfg.augment_before_split ? "true" : "false")
      << " checkpoint=" << a.checkpoint << " log=" << a.log << '\n';

  const DatasetManifest data = load_dataset(a.data);
  for (const auto& w : data.warnings) {
    out << "warning: " << w << '\n';
  }
  model.classes = static_cast<std::uint32_t>(data.class_count());

  const auto result = train(data, model, cfg, std::nullopt, [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << std::fixed << std::setprecision(4)
        << " train_loss=" << r.train_loss << " train_acc=" << r.train_acc
        << " val_loss=" << r.val_loss << " val_acc=" << r.val_acc << std::defaultfloat << std::endl;
  });
  out << "split: " << result.train_split.items.size() << " train / "
      << result.val_split.items.size() << " val\n";
  return kOk;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  out << "eval: data=" << a.data << " checkpoint=" << a.checkpoint << " report=" << a.report
      << " batch=" << a.batch << '\n';
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const DatasetManifest data = load_dataset(a.data);
  for (const auto& w : data.warnings) {
    out << "warning: " << w << '\n';
  }
  const Evaluation ev = evaluate(ck.params, ck.config, data, a.batch);
  write_report_csv(ev.report, a.report);
  print_report(out, ev.report);
  print_confusion(out, ev.matrix);
  return kOk;
}

int do_predict(const PredictArgs& a, std::ostream& out) {
  out << "predict: image=" << a.image << " checkpoint=" << a.checkpoint
      << " class_names=" << join(a.class_names) << '\n';
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const auto names = a.class_names.empty() ? default_class_names(ck.config.classes) : a.class_names;
  if (names.size() != ck.config.classes) {
    throw ConsistencyError("checkpoint predicts " + std::to_string(ck.config.classes) +
                           " classes but " + std::to_string(names.size()) + " names were given");
  }
  const Tensor input = image_to_tensor(read_pnm(a.image), ck.config.input_size);
  const Tensor logits = forward(ck.params, input).logits;
  const std::vector<double> probs = softmax_row(logits, 0);
  const auto best = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  out << names[best] << '\n' << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ' ' << probs[i] << '\n';
  }
  out << std::defaultfloat;
  return kOk;
}

int do_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  out << "gradcheck: seed=" << a.seed << " tol=" << a.tol << " batch=" << a.batch << '\n';
  const auto report = check_model_gradients(tiny_model_config(a.seed), a.batch, a.seed);
  out << std::scientific << std::setprecision(3);
  for (const auto& t : report.tensors) {
    out << t.name << ' ' << t.max_rel_error << '\n';
  }
  out << "max_rel_error " << report.max_rel_error << std::defaultfloat << '\n';
  if (report.max_rel_error < a.tol) {
    out << "PASS\n";
    return kOk;
  }
  out << "FAIL\n";
  return kGradcheckFailed;
}

} // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bidirectional cascaded CNN for pavement distress images", "bcnn"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--per-class", synth.per_class, "Images per class")->required()->check(CLI::PositiveNumber);
  s->add_option("--size", synth.size, "Image side length")->check(CLI::Range(32, 4096));
  s->add_option("--seed", synth.seed, "Generator seed");

  AugmentArgs aug;
  auto* g = app.add_subcommand("augment", "Write originals plus augmented variants");
  g->add_option("--in", aug.in, "Input corpus directory")->required()->check(CLI::ExistingDirectory);
  g->add_option("--out", aug.out, "Output directory")->required();
  g->add_option("--variants", aug.spec.variants, "Variants per image")->check(CLI::NonNegativeNumber);
  g->add_option("--rotations", aug.spec.rotations, "Rotation angles in degrees")->delimiter(',');
  g->add_option("--scales", aug.spec.scales, "Scale factors")->delimiter(',');
  g->add_option("--brightness", aug.spec.brightness, "Brightness factors")->delimiter(',');
  g->add_option("--seed", aug.seed, "Augmentation seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train on a corpus directory");
  t->add_option("--data", tr.data, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  t->add_option("--epochs", tr.config.epochs, "Epochs")->check(CLI::PositiveNumber);
  t->add_option("--batch", tr.config.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.config.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  t->add_option("--val-ratio", tr.config.val_ratio, "Validation fraction");
  t->add_option("--seed", tr.config.seed, "Seed for init, split and shuffling");
  t->add_option("--checkpoint", tr.checkpoint, "Checkpoint output path")->required();
  t->add_option("--log", tr.log, "Per-epoch CSV log path")->required();
  t->add_option("--optimizer", tr.optimizer, "adam or sgd")->check(CLI::IsMember({"adam", "sgd"}));
  t->add_flag("--split-ratio-alt", tr.split_ratio_alt, "Use an 80/20 split instead of --val-ratio");
  t->add_option("--size", tr.size, "Network input side length");
  t->add_option("--channels", tr.channels, "Stage channel counts")->delimiter(',');
  t->add_option("--clip", tr.clip, "Global gradient-norm clip (0 = off)")->check(CLI::NonNegativeNumber);
  t->add_option("--weight-decay", tr.config.weight_decay, "L2 weight decay")->check(CLI::NonNegativeNumber);
  t->add_option("--dropout", tr.config.head_dropout, "Dropout before the classifier head");
  t->add_option("--patience", tr.config.early_stop_patience, "Early-stop patience in epochs (0 = off)");
  t->add_option("--augment-variants", tr.augment_variants, "Augmented variants per training image");
  t->add_flag("--augment-before-split", tr.config.augment_before_split,
              "Augment the whole corpus before splitting");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a corpus");
  e->add_option("--data", ev.data, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
  e->add_option("--report", ev.report, "report.csv output path")->required();
  e->add_option("--batch", ev.batch, "Evaluation batch size")->check(CLI::PositiveNumber);

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Classify one image");
  p->add_option("--image", pr.image, "PGM or PPM image")->required()->check(CLI::ExistingFile);
  p->add_option("--checkpoint", pr.checkpoint, "Checkpoint path")->required()->check(CLI::ExistingFile);
  p->add_option("--class-names", pr.class_names, "Class names in label order")->delimiter(',');

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Finite-difference check of the tiny model");
  c->add_option("--seed", gc.seed, "Seed for parameters and inputs");
  c->add_option("--tol", gc.tol, "Maximum relative error")->check(CLI::PositiveNumber);
  c->add_option("--batch", gc.batch, "Batch size")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) {
      return do_synth(synth, out);
    }
    if (g->parsed()) {
      return do_augment(aug, out);
    }
    if (t->parsed()) {
      return do_train(tr, out);
    }
    if (e->parsed()) {
      return do_eval(ev, out);
    }
    if (p->parsed()) {
      return do_predict(pr, out);
    }
    return do_gradcheck(gc, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kRuntime;
  }
}

} // namespace bcnn::cli
