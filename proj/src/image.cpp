#include "bcnn/image.hpp"

#include "bcnn/errors.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

namespace bcnn {

namespace {

class PnmHeaderReader {
public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t next_number() {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 24)) {
        throw FormatError("pnm: header value too large");
      }
      ++pos_;
      ++digits;
    }
    if (digits == 0) {
      throw FormatError("pnm: malformed header");
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("pnm: missing separator before raster");
    }
    return pos_ + 1;
  }

private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

} // namespace

GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("pnm: expected binary P5 or P6 magic");
  }
  const bool rgb = bytes[1] == '6';
  PnmHeaderReader header(bytes);
  const std::size_t width = header.next_number();
  const std::size_t height = header.next_number();
  const std::size_t maxval = header.next_number();
  if (width == 0 || height == 0) {
    throw FormatError("pnm: zero image extent");
  }
  if (maxval != 255) {
    throw FormatError("pnm: only maxval 255 is supported, got " + std::to_string(maxval));
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t channels = rgb ? 3 : 1;
  const std::size_t needed = width * height * channels;
  if (bytes.size() < offset + needed) {
    throw FormatError("pnm: raster truncated");
  }
  GrayImage image(height, width);
  const std::uint8_t* src = bytes.data() + offset;
  for (std::size_t i = 0; i < width * height; ++i) {
    image.pixels[i] = rgb ? luma(src[3 * i], src[3 * i + 1], src[3 * i + 2]) : src[i];
  }
  return image;
}

GrayImage read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_pnm(bytes);
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

GrayImage resize_nearest(const GrayImage& image, std::size_t height, std::size_t width) {
  if (image.height == height && image.width == width) {
    return image;
  }
  GrayImage out(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t sr = (2 * r + 1) * image.height / (2 * height);
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t sc = (2 * c + 1) * image.width / (2 * width);
      out.at(r, c) = image.at(sr, sc);
    }
  }
  return out;
}

} // namespace bcnn
