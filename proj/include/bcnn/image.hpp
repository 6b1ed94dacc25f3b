#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bcnn {

// 8-bit grayscale raster, row-major.
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::size_t h, std::size_t w, std::uint8_t fill = 0)
      : height(h), width(w), pixels(h * w, fill) {}

  std::uint8_t& at(std::size_t r, std::size_t c) noexcept { return pixels[r * width + c]; }
  std::uint8_t at(std::size_t r, std::size_t c) const noexcept { return pixels[r * width + c]; }

  bool operator==(const GrayImage&) const = default;
};

// round(0.299 R + 0.587 G + 0.114 B) in exact integer arithmetic.
constexpr std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

// Binary portable pixmaps: P5 (gray) and P6 (RGB, converted by luma), maxval 255.
GrayImage decode_pnm(std::span<const std::uint8_t> bytes);
GrayImage read_pnm(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

GrayImage resize_nearest(const GrayImage& image, std::size_t height, std::size_t width);

} // namespace bcnn
