#include "bcnn/augment.hpp"

#include "bcnn/errors.hpp"
#include "bcnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>

namespace bcnn {

namespace {

GrayImage rotate_quarter_ccw(const GrayImage& in) {
  // out[r][c] = in[c][W - 1 - r]
  GrayImage out(in.width, in.height);
  for (std::size_t r = 0; r < out.height; ++r) {
    for (std::size_t c = 0; c < out.width; ++c) {
      out.at(r, c) = in.at(c, in.width - 1 - r);
    }
  }
  return out;
}

GrayImage rotate_half(const GrayImage& in) {
  GrayImage out = in;
  std::reverse(out.pixels.begin(), out.pixels.end());
  return out;
}

} // namespace

std::uint8_t median_intensity(const GrayImage& image) {
  if (image.pixels.empty()) {
    return 0;
  }
  std::vector<std::uint8_t> values = image.pixels;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

GrayImage rotate(const GrayImage& image, double degrees) {
  double turn = std::fmod(degrees, 360.0);
  if (turn < 0.0) {
    turn += 360.0;
  }
  if (turn == 0.0) {
    return image;
  }
  if (turn == 90.0) {
    return rotate_quarter_ccw(image);
  }
  if (turn == 180.0) {
    return rotate_half(image);
  }
  if (turn == 270.0) {
    return rotate_half(rotate_quarter_ccw(image));
  }

  const double theta = turn * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cy = (static_cast<double>(image.height) - 1.0) / 2.0;
  const double cx = (static_cast<double>(image.width) - 1.0) / 2.0;
  const std::uint8_t fill = median_intensity(image);
  GrayImage out(image.height, image.width, fill);
  for (std::size_t r = 0; r < image.height; ++r) {
    const double y = static_cast<double>(r) - cy;
    for (std::size_t c = 0; c < image.width; ++c) {
      const double x = static_cast<double>(c) - cx;
      // Inverse map of a counterclockwise turn in row-down image coordinates.
      const double sx = std::round(x * cs - y * sn + cx);
      const double sy = std::round(x * sn + y * cs + cy);
      if (sx >= 0.0 && sy >= 0.0 && sx < static_cast<double>(image.width) &&
          sy < static_cast<double>(image.height)) {
        out.at(r, c) = image.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
      }
    }
  }
  return out;
}

GrayImage scale_image(const GrayImage& image, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) {
    throw ConfigError("scale factor " + std::to_string(factor) + " outside [0.5, 2.0]");
  }
  if (factor == 1.0) {
    return image;
  }
  auto source_index = [factor](std::size_t i, std::size_t extent) {
    const double centre = static_cast<double>(extent / 2);
    const double s = std::floor(centre + (static_cast<double>(i) - centre) / factor + 0.5);
    return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(extent - 1)));
  };
  GrayImage out(image.height, image.width);
  for (std::size_t r = 0; r < image.height; ++r) {
    const std::size_t sr = source_index(r, image.height);
    for (std::size_t c = 0; c < image.width; ++c) {
      out.at(r, c) = image.at(sr, source_index(c, image.width));
    }
  }
  return out;
}

GrayImage adjust_brightness(const GrayImage& image, double factor) {
  if (!(factor >= 0.25 && factor <= 4.0)) {
    throw ConfigError("brightness factor " + std::to_string(factor) + " outside [0.25, 4.0]");
  }
  GrayImage out = image;
  for (auto& p : out.pixels) {
    const double v = std::round(static_cast<double>(p) * factor);
    p = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

void validate(const AugmentSpec& spec) {
  if (spec.rotations.empty() || spec.scales.empty() || spec.brightness.empty()) {
    throw ConfigError("augmentation sets must not be empty");
  }
  for (double a : spec.rotations) {
    if (!std::isfinite(a)) {
      throw ConfigError("rotation angles must be finite");
    }
  }
  for (double s : spec.scales) {
    if (!(s >= 0.5 && s <= 2.0)) {
      throw ConfigError("scale factor " + std::to_string(s) + " outside [0.5, 2.0]");
    }
  }
  for (double b : spec.brightness) {
    if (!(b >= 0.25 && b <= 4.0)) {
      throw ConfigError("brightness factor " + std::to_string(b) + " outside [0.25, 4.0]");
    }
  }
}

GrayImage augment_image(const GrayImage& image, const AugmentSpec& spec, std::uint64_t item_seed) {
  Rng rng(item_seed);
  const double angle = spec.rotations[rng.index(spec.rotations.size())];
  const double scale = spec.scales[rng.index(spec.scales.size())];
  const double bright = spec.brightness[rng.index(spec.brightness.size())];
  return rotate(scale_image(adjust_brightness(image, bright), scale), angle);
}

DatasetManifest augment_dataset(const DatasetManifest& manifest, const AugmentSpec& spec) {
  validate(spec);
  validate(manifest);
  DatasetManifest out;
  out.class_names = manifest.class_names;
  out.provenance = Provenance::Augmented;
  out.seed = spec.seed;
  out.warnings = manifest.warnings;
  out.items.reserve(manifest.items.size() * (1 + spec.variants));
  out.items = manifest.items;
  for (std::size_t i = 0; i < manifest.items.size(); ++i) {
    const auto& src = manifest.items[i];
    for (std::size_t v = 0; v < spec.variants; ++v) {
      LabeledImage variant;
      variant.image = augment_image(src.image, spec, derive_seed(spec.seed, {i, v}));
      variant.label = src.label;
      if (!src.path.empty()) {
        const std::filesystem::path p(src.path);
        variant.path = (p.parent_path() / (p.stem().string() + "_aug" + std::to_string(v) +
                                           p.extension().string()))
                           .generic_string();
      }
      out.items.push_back(std::move(variant));
    }
  }
  recount(out);
  return out;
}

} // namespace bcnn
