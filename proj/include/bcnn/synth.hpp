#pragma once

#include "bcnn/dataset.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace bcnn {

// Pavement distress classes in canonical label order (sorted directory names).
enum class DistressClass : int { Fatigue = 0, Linear = 1, Pothole = 2 };

inline constexpr std::size_t kDistressClassCount = 3;

const char* class_dir_name(DistressClass c) noexcept; // "fatigue", "linear", "potholes"
DistressClass parse_distress_class(std::string_view name);

// Pixels at or below this value form the "dark" distress mask; the generated
// background never reaches it and distress ink never exceeds it.
inline constexpr std::uint8_t kDarkThreshold = 100;

// Textured light-gray pavement with one class signature:
//  linear   one dark polyline, width 1-3 px, joining two opposite borders
//  fatigue  4-8 crossing dark polylines forming closed cells
//  pothole  one dark filled ellipse, axis lengths 15-40% of size, eccentricity <= 0.9
// Deterministic per (class, size, seed); size >= 32.
LabeledImage synth_generate(DistressClass cls, std::size_t size, std::uint64_t seed);
LabeledImage synth_generate(std::string_view cls, std::size_t size, std::uint64_t seed);

// per_class images of every class, labels in canonical order.
DatasetManifest synth_corpus(std::size_t per_class, std::size_t size, std::uint64_t seed);

} // namespace bcnn
