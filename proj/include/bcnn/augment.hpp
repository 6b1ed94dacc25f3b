#pragma once

#include "bcnn/dataset.hpp"
#include "bcnn/image.hpp"

#include <cstdint>
#include <vector>

namespace bcnn {

// Counterclockwise rotation. Multiples of 90 degrees are exact index
// permutations (a 90-degree turn of an H x W image is W x H); any other angle
// is nearest-neighbour resampling about the centre, keeping the original
// extent and filling uncovered pixels with the image's median intensity.
GrayImage rotate(const GrayImage& image, double degrees);

// Nearest-neighbour zoom about the centre, same output extent. Factors above
// 1 crop, below 1 replicate edges. factor in [0.5, 2.0].
GrayImage scale_image(const GrayImage& image, double factor);

// round(p * factor) clamped to [0, 255]. factor in [0.25, 4.0].
GrayImage adjust_brightness(const GrayImage& image, double factor);

// Lower median of the pixel intensities.
std::uint8_t median_intensity(const GrayImage& image);

struct AugmentSpec {
  std::vector<double> rotations{90.0, 180.0, 270.0};
  std::vector<double> scales{0.8, 1.2};
  std::vector<double> brightness{0.8, 1.2};
  std::size_t variants = 1;
  std::uint64_t seed = 0;
};

// Throws ConfigError for empty sets or factors outside their ranges.
void validate(const AugmentSpec& spec);

// One variant: rotate(scale(brightness(image))) with each parameter drawn
// uniformly from its set using the given per-item seed.
GrayImage augment_image(const GrayImage& image, const AugmentSpec& spec, std::uint64_t item_seed);

// Originals followed by spec.variants variants per original. The variant seed
// depends only on (spec.seed, item index, variant index).
DatasetManifest augment_dataset(const DatasetManifest& manifest, const AugmentSpec& spec);

} // namespace bcnn
