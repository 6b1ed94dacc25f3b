#include "bcnn/dataset.hpp"

#include "bcnn/errors.hpp"
#include "bcnn/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

namespace fs = std::filesystem;

namespace bcnn {

const char* to_string(Provenance p) noexcept {
  switch (p) {
  case Provenance::Loaded:
    return "loaded";
  case Provenance::Synthetic:
    return "synthetic";
  case Provenance::Augmented:
    return "augmented";
  }
  return "unknown";
}

void recount(DatasetManifest& manifest) {
  manifest.counts.assign(manifest.class_names.size(), 0);
  for (const auto& item : manifest.items) {
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= manifest.counts.size()) {
      throw ConsistencyError("item label " + std::to_string(item.label) + " outside " +
                             std::to_string(manifest.counts.size()) + " classes");
    }
    ++manifest.counts[static_cast<std::size_t>(item.label)];
  }
}

void validate(const DatasetManifest& manifest) {
  if (manifest.counts.size() != manifest.class_names.size()) {
    throw ConsistencyError("manifest lists " + std::to_string(manifest.class_names.size()) +
                           " classes but " + std::to_string(manifest.counts.size()) + " counts");
  }
  auto names = manifest.class_names;
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw ConsistencyError("manifest class names are not unique");
  }
  std::vector<std::size_t> seen(manifest.counts.size(), 0);
  for (const auto& item : manifest.items) {
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= seen.size()) {
      throw ConsistencyError("item label " + std::to_string(item.label) + " outside " +
                             std::to_string(seen.size()) + " classes");
    }
    ++seen[static_cast<std::size_t>(item.label)];
  }
  if (seen != manifest.counts) {
    throw ConsistencyError("manifest class counts do not match its items");
  }
}

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".ppm";
}

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (directories ? entry.is_directory() : !entry.is_directory()) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

DatasetManifest load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw CorpusError("corpus root " + root.string() + " is not a directory");
  }
  const auto class_dirs = sorted_entries(root, true);
  if (class_dirs.size() < 2) {
    throw CorpusError("corpus root " + root.string() + " needs at least 2 class directories, found " +
                      std::to_string(class_dirs.size()));
  }
  DatasetManifest manifest;
  manifest.provenance = Provenance::Loaded;
  for (std::size_t label = 0; label < class_dirs.size(); ++label) {
    const std::string name = class_dirs[label].filename().string();
    manifest.class_names.push_back(name);
    std::size_t usable = 0;
    for (const auto& file : sorted_entries(class_dirs[label], false)) {
      const std::string rel = name + "/" + file.filename().string();
      if (!has_image_extension(file)) {
        manifest.warnings.push_back("skipped non-image file " + rel);
        continue;
      }
      try {
        manifest.items.push_back({read_pnm(file), static_cast<int>(label), rel});
        ++usable;
      } catch (const Error& e) {
        manifest.warnings.push_back("skipped unreadable file " + rel + ": " + e.what());
      }
    }
    if (usable == 0) {
      throw CorpusError("class '" + name + "' has no usable images");
    }
  }
  recount(manifest);
  return manifest;
}

void write_manifest_csv(const DatasetManifest& manifest, const fs::path& file) {
  std::ofstream out(file);
  if (!out) {
    throw IoError("cannot write " + file.string());
  }
  out << "path,label,class\n";
  for (const auto& item : manifest.items) {
    out << item.path << ',' << item.label << ','
        << manifest.class_names[static_cast<std::size_t>(item.label)] << '\n';
  }
  if (!out) {
    throw IoError("short write to " + file.string());
  }
}

void write_dataset(DatasetManifest& manifest, const fs::path& root) {
  validate(manifest);
  for (const auto& name : manifest.class_names) {
    fs::create_directories(root / name);
  }
  std::vector<std::size_t> next(manifest.class_names.size(), 0);
  for (auto& item : manifest.items) {
    const auto label = static_cast<std::size_t>(item.label);
    std::string stem;
    if (!item.path.empty()) {
      stem = fs::path(item.path).stem().string();
    } else {
      const std::string index = std::to_string(next[label]++);
      stem = std::string(6 - std::min<std::size_t>(6, index.size()), '0') + index;
    }
    item.path = manifest.class_names[label] + "/" + stem + ".pgm";
    write_pgm(root / item.path, item.image);
  }
  write_manifest_csv(manifest, root / "manifest.csv");
}

std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& manifest,
                                                             double train_ratio,
                                                             std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw ConfigError("split ratio must lie in (0, 1), got " + std::to_string(train_ratio));
  }
  validate(manifest);
  const std::size_t classes = manifest.class_count();
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < manifest.items.size(); ++i) {
    members[static_cast<std::size_t>(manifest.items[i].label)].push_back(i);
  }
  std::vector<std::size_t> take(classes);
  std::vector<bool> has_remainder(classes);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (members[c].size() < 2) {
      throw CorpusError("class '" + manifest.class_names[c] + "' has " +
                        std::to_string(members[c].size()) + " items; splitting needs at least 2");
    }
    Rng rng(derive_seed(seed, {c}));
    rng.shuffle(std::span(members[c]));
    const double exact = static_cast<double>(members[c].size()) * train_ratio;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    has_remainder[c] = exact > static_cast<double>(take[c]);
    assigned += take[c];
  }
  const auto target = static_cast<std::size_t>(
      std::llround(static_cast<double>(manifest.items.size()) * train_ratio));
  for (std::size_t c = 0; c < classes && assigned < target; ++c) {
    if (has_remainder[c]) {
      ++take[c];
      ++assigned;
    }
  }

  DatasetManifest train;
  DatasetManifest val;
  for (DatasetManifest* side : {&train, &val}) {
    side->class_names = manifest.class_names;
    side->provenance = manifest.provenance;
    side->seed = seed;
  }
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t j = 0; j < members[c].size(); ++j) {
      (j < take[c] ? train : val).items.push_back(manifest.items[members[c][j]]);
    }
  }
  recount(train);
  recount(val);
  return {std::move(train), std::move(val)};
}

Tensor image_to_tensor(const GrayImage& image, std::size_t image_size) {
  const GrayImage sized = resize_nearest(image, image_size, image_size);
  Tensor t({1, 1, image_size, image_size});
  for (std::size_t i = 0; i < sized.pixels.size(); ++i) {
    t[i] = static_cast<float>(sized.pixels[i]) / 255.0f;
  }
  return t;
}

std::vector<Batch> to_batches(const DatasetManifest& manifest, std::size_t batch_size,
                              std::size_t image_size, std::optional<std::uint64_t> shuffle_seed) {
  if (batch_size == 0) {
    throw ConfigError("batch size must be at least 1");
  }
  if (image_size == 0) {
    throw ConfigError("image size must be positive");
  }
  validate(manifest);
  std::vector<std::size_t> order(manifest.items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(std::span(order));
  }
  const std::size_t plane = image_size * image_size;
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    Batch batch{Tensor({n, 1, image_size, image_size}), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      const auto& item = manifest.items[order[start + i]];
      const GrayImage sized = resize_nearest(item.image, image_size, image_size);
      float* dst = batch.images.raw() + i * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        dst[p] = static_cast<float>(sized.pixels[p]) / 255.0f;
      }
      batch.labels[i] = item.label;
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

} // namespace bcnn
