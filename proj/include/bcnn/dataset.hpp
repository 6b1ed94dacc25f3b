#pragma once

#include "bcnn/image.hpp"
#include "bcnn/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bcnn {

struct LabeledImage {
  GrayImage image;
  int label = 0;
  std::string path; // relative to the corpus root; empty for in-memory items

  bool operator==(const LabeledImage&) const = default;
};

enum class Provenance { Loaded, Synthetic, Augmented };

const char* to_string(Provenance p) noexcept;

// Class-indexed corpus. Class order is the sorted order of class names.
struct DatasetManifest {
  std::vector<std::string> class_names;
  std::vector<std::size_t> counts;
  std::vector<LabeledImage> items;
  Provenance provenance = Provenance::Loaded;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings; // skipped or unreadable files

  std::size_t class_count() const noexcept { return class_names.size(); }
  bool operator==(const DatasetManifest&) const = default;
};

// Recomputes counts from the item labels.
void recount(DatasetManifest& manifest);

// Throws ConsistencyError if counts, labels or class names disagree.
void validate(const DatasetManifest& manifest);

// Class sizes of the pavement corpus the default configuration targets:
// training side per class and the held-out supports used in its metric table.
struct ReferenceCorpus {
  std::array<const char*, 3> classes{"fatigue", "linear", "potholes"};
  std::array<std::size_t, 3> train_counts{822, 863, 770};
  std::array<std::size_t, 3> test_supports{205, 205, 189};
};
inline constexpr ReferenceCorpus kReferenceCorpus{};

// Reads <root>/<class>/<file>.pgm|.ppm. Non-image and unreadable files are
// skipped and reported in `warnings`.
DatasetManifest load_dataset(const std::filesystem::path& root);

// Writes every item as <root>/<class>/<name>.pgm plus <root>/manifest.csv and
// stores the relative paths back into the manifest.
void write_dataset(DatasetManifest& manifest, const std::filesystem::path& root);

// Header `path,label,class`, one row per item.
void write_manifest_csv(const DatasetManifest& manifest, const std::filesystem::path& file);

std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& manifest,
                                                             double train_ratio,
                                                             std::uint64_t seed);

struct Batch {
  Tensor images; // [b x 1 x S x S], values p / 255
  std::vector<int> labels;
};

// Consecutive batches over the manifest; the last may be short. With a
// shuffle seed the item order is a seeded permutation, otherwise manifest order.
std::vector<Batch> to_batches(const DatasetManifest& manifest, std::size_t batch_size,
                              std::size_t image_size,
                              std::optional<std::uint64_t> shuffle_seed = std::nullopt);

Tensor image_to_tensor(const GrayImage& image, std::size_t image_size);

} // namespace bcnn
