#include "bcnn/synth.hpp"

#include "bcnn/errors.hpp"
#include "bcnn/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace bcnn {

const char* class_dir_name(DistressClass c) noexcept {
  switch (c) {
  case DistressClass::Fatigue:
    return "fatigue";
  case DistressClass::Linear:
    return "linear";
  case DistressClass::Pothole:
    return "potholes";
  }
  return "unknown";
}

DistressClass parse_distress_class(std::string_view name) {
  if (name == "fatigue") {
    return DistressClass::Fatigue;
  }
  if (name == "linear") {
    return DistressClass::Linear;
  }
  if (name == "potholes" || name == "pothole") {
    return DistressClass::Pothole;
  }
  throw ConfigError("unknown distress class '" + std::string(name) +
                    "' (expected fatigue, linear or potholes)");
}

namespace {

struct Point {
  double x;
  double y;
};

class Canvas {
public:
  Canvas(std::size_t size, Rng& rng) : image_(size, size), rng_(rng) {}

  void paint_background() {
    const double size = static_cast<double>(image_.width);
    const double base = rng_.uniform(170.0, 210.0);
    // A few broad undulations plus per-pixel grain.
    std::array<std::array<double, 4>, 3> waves{};
    for (auto& w : waves) {
      w = {rng_.uniform(3.0, 9.0), rng_.uniform(0.5, 3.0) / size,
           rng_.uniform(0.0, 2.0 * std::numbers::pi), rng_.uniform(0.0, std::numbers::pi)};
    }
    for (std::size_t r = 0; r < image_.height; ++r) {
      for (std::size_t c = 0; c < image_.width; ++c) {
        double v = base + rng_.uniform(-15.0, 15.0);
        for (const auto& w : waves) {
          const double along = std::cos(w[3]) * static_cast<double>(c) +
                               std::sin(w[3]) * static_cast<double>(r);
          v += w[0] * std::sin(2.0 * std::numbers::pi * w[1] * along + w[2]);
        }
        image_.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::round(v), 120.0, 250.0));
      }
    }
  }

  void ink(long r, long c) {
    const long n = static_cast<long>(image_.width);
    if (r < 0 || c < 0 || r >= n || c >= n) {
      return;
    }
    image_.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
        static_cast<std::uint8_t>(rng_.uniform_int(15, 75));
  }

  void stroke(const std::vector<Point>& poly, int width) {
    const long lo = -static_cast<long>((width - 1) / 2);
    const long hi = static_cast<long>(width / 2);
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      const Point a = poly[i];
      const Point b = poly[i + 1];
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      const auto steps = static_cast<std::size_t>(std::ceil(len * 4.0)) + 1;
      for (std::size_t s = 0; s <= steps; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(steps);
        const long x = std::lround(a.x + (b.x - a.x) * t);
        const long y = std::lround(a.y + (b.y - a.y) * t);
        for (long dy = lo; dy <= hi; ++dy) {
          for (long dx = lo; dx <= hi; ++dx) {
            ink(y + dy, x + dx);
          }
        }
      }
    }
  }

  void ellipse(Point centre, double semi_major, double semi_minor, double angle) {
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    for (std::size_t r = 0; r < image_.height; ++r) {
      for (std::size_t c = 0; c < image_.width; ++c) {
        const double dx = static_cast<double>(c) - centre.x;
        const double dy = static_cast<double>(r) - centre.y;
        const double u = (dx * cs + dy * sn) / semi_major;
        const double v = (-dx * sn + dy * cs) / semi_minor;
        if (u * u + v * v <= 1.0) {
          ink(static_cast<long>(r), static_cast<long>(c));
        }
      }
    }
  }

  GrayImage take() { return std::move(image_); }

private:
  GrayImage image_;
  Rng& rng_;
};

// Polyline crossing the square along one axis. `across` is the coordinate on
// the other axis; vertices jitter by at most `wobble` around it.
std::vector<Point> crossing_polyline(Rng& rng, double size, bool horizontal, double across,
                                     double wobble, int vertices) {
  std::vector<Point> poly;
  const double last = size - 1.0;
  double offset = across;
  for (int i = 0; i < vertices; ++i) {
    double along = last * static_cast<double>(i) / static_cast<double>(vertices - 1);
    if (i > 0 && i + 1 < vertices) {
      along += rng.uniform(-0.3, 0.3) * last / static_cast<double>(vertices - 1);
    }
    offset = std::clamp(across + rng.uniform(-wobble, wobble), 1.0, size - 2.0);
    poly.push_back(horizontal ? Point{along, offset} : Point{offset, along});
  }
  return poly;
}

void draw_linear(Canvas& canvas, Rng& rng, double size) {
  const bool horizontal = rng.uniform() < 0.5;
  const int vertices = rng.uniform_int(3, 6);
  const int width = rng.uniform_int(1, 3);
  // Random walk keeps the crack a single meandering (possibly diagonal) path.
  std::vector<Point> poly;
  double offset = rng.uniform(0.2, 0.8) * size;
  const double drift = rng.uniform(-0.25, 0.25) * size / static_cast<double>(vertices - 1);
  const double last = size - 1.0;
  for (int i = 0; i < vertices; ++i) {
    const double along = last * static_cast<double>(i) / static_cast<double>(vertices - 1);
    poly.push_back(horizontal ? Point{along, offset} : Point{offset, along});
    offset = std::clamp(offset + drift + rng.uniform(-0.12, 0.12) * size, 2.0, size - 3.0);
  }
  canvas.stroke(poly, width);
}

void draw_fatigue(Canvas& canvas, Rng& rng, double size) {
  const int rows = rng.uniform_int(2, 4);
  const int cols = rng.uniform_int(2, 4);
  for (int pass = 0; pass < 2; ++pass) {
    const bool horizontal = pass == 0;
    const int count = horizontal ? rows : cols;
    const double spacing = size / static_cast<double>(count + 1);
    for (int i = 0; i < count; ++i) {
      const double across =
          spacing * static_cast<double>(i + 1) + rng.uniform(-0.2, 0.2) * spacing;
      const auto poly =
          crossing_polyline(rng, size, horizontal, across, 0.2 * spacing, rng.uniform_int(4, 7));
      canvas.stroke(poly, rng.uniform_int(1, 2));
    }
  }
}

void draw_pothole(Canvas& canvas, Rng& rng, double size) {
  const double major = rng.uniform(0.15, 0.40) * size;
  const double eccentricity = rng.uniform(0.0, 0.9);
  const double minor = std::max(0.15 * size, major * std::sqrt(1.0 - eccentricity * eccentricity));
  const double semi_major = major / 2.0;
  const double semi_minor = std::min(minor, major) / 2.0;
  const double margin = semi_major + 2.0;
  const Point centre{rng.uniform(margin, size - 1.0 - margin),
                     rng.uniform(margin, size - 1.0 - margin)};
  canvas.ellipse(centre, semi_major, semi_minor, rng.uniform(0.0, std::numbers::pi));
}

// ---- signature checks used to re-roll degenerate draws ----

struct DarkComponent {
  std::size_t pixels = 0;
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;
};

std::vector<DarkComponent> dark_components(const GrayImage& img) {
  const std::size_t h = img.height;
  const std::size_t w = img.width;
  std::vector<int> label(h * w, -1);
  std::vector<DarkComponent> comps;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (label[start] >= 0 || img.pixels[start] > kDarkThreshold) {
      continue;
    }
    DarkComponent comp{0, h, 0, w, 0};
    const int id = static_cast<int>(comps.size());
    label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t r = p / w;
      const std::size_t c = p % w;
      ++comp.pixels;
      comp.top = std::min(comp.top, r);
      comp.bottom = std::max(comp.bottom, r);
      comp.left = std::min(comp.left, c);
      comp.right = std::max(comp.right, c);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const long nr = static_cast<long>(r) + dr;
          const long nc = static_cast<long>(c) + dc;
          if (nr < 0 || nc < 0 || nr >= static_cast<long>(h) || nc >= static_cast<long>(w)) {
            continue;
          }
          const std::size_t q = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
          if (label[q] < 0 && img.pixels[q] <= kDarkThreshold) {
            label[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    comps.push_back(comp);
  }
  return comps;
}

// True if some 4-connected light region does not reach the border.
bool has_enclosed_cell(const GrayImage& img) {
  const std::size_t h = img.height;
  const std::size_t w = img.width;
  std::vector<std::uint8_t> seen(h * w, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (seen[start] || img.pixels[start] <= kDarkThreshold) {
      continue;
    }
    bool touches_border = false;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t r = p / w;
      const std::size_t c = p % w;
      if (r == 0 || c == 0 || r + 1 == h || c + 1 == w) {
        touches_border = true;
      }
      const std::array<std::array<long, 2>, 4> steps{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
      for (const auto& s : steps) {
        const long nr = static_cast<long>(r) + s[0];
        const long nc = static_cast<long>(c) + s[1];
        if (nr < 0 || nc < 0 || nr >= static_cast<long>(h) || nc >= static_cast<long>(w)) {
          continue;
        }
        const std::size_t q = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
        if (!seen[q] && img.pixels[q] > kDarkThreshold) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    if (!touches_border) {
      return true;
    }
  }
  return false;
}

bool signature_ok(DistressClass cls, const GrayImage& img) {
  const auto comps = dark_components(img);
  switch (cls) {
  case DistressClass::Linear:
    return std::any_of(comps.begin(), comps.end(), [&](const DarkComponent& c) {
      return (c.left == 0 && c.right + 1 == img.width) ||
             (c.top == 0 && c.bottom + 1 == img.height);
    });
  case DistressClass::Pothole: {
    if (comps.size() != 1) {
      return false;
    }
    const auto& c = comps.front();
    const double box = static_cast<double>((c.bottom - c.top + 1) * (c.right - c.left + 1));
    return static_cast<double>(c.pixels) / box >= 0.6;
  }
  case DistressClass::Fatigue:
    return has_enclosed_cell(img);
  }
  return false;
}

} // namespace

LabeledImage synth_generate(DistressClass cls, std::size_t size, std::uint64_t seed) {
  if (size < 32) {
    throw ConfigError("synthetic images need size >= 32, got " + std::to_string(size));
  }
  const auto label = static_cast<int>(cls);
  if (label < 0 || label >= static_cast<int>(kDistressClassCount)) {
    throw ConfigError("unknown distress class index " + std::to_string(label));
  }
  constexpr int kMaxAttempts = 32;
  GrayImage image;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(attempt)}));
    Canvas canvas(size, rng);
    canvas.paint_background();
    const double extent = static_cast<double>(size);
    switch (cls) {
    case DistressClass::Linear:
      draw_linear(canvas, rng, extent);
      break;
    case DistressClass::Fatigue:
      draw_fatigue(canvas, rng, extent);
      break;
    case DistressClass::Pothole:
      draw_pothole(canvas, rng, extent);
      break;
    }
    image = canvas.take();
    if (signature_ok(cls, image)) {
      break;
    }
  }
  return {std::move(image), label, {}};
}

LabeledImage synth_generate(std::string_view cls, std::size_t size, std::uint64_t seed) {
  return synth_generate(parse_distress_class(cls), size, seed);
}

DatasetManifest synth_corpus(std::size_t per_class, std::size_t size, std::uint64_t seed) {
  DatasetManifest manifest;
  manifest.provenance = Provenance::Synthetic;
  manifest.seed = seed;
  for (std::size_t c = 0; c < kDistressClassCount; ++c) {
    const auto cls = static_cast<DistressClass>(c);
    manifest.class_names.emplace_back(class_dir_name(cls));
    for (std::size_t i = 0; i < per_class; ++i) {
      manifest.items.push_back(synth_generate(cls, size, derive_seed(seed, {c, i})));
    }
  }
  recount(manifest);
  return manifest;
}

} // namespace bcnn
