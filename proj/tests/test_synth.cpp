#include <doctest.h>

#include "bcnn/errors.hpp"
#include "bcnn/synth.hpp"
#include "support/synth_oracle.hpp"

#include <algorithm>

using bcnn::DistressClass;
using bcnn::testing::dark_blobs;
using bcnn::testing::enclosed_regions;

TEST_CASE("class names and parsing") {
  CHECK(std::string(bcnn::class_dir_name(DistressClass::Fatigue)) == "fatigue");
  CHECK(std::string(bcnn::class_dir_name(DistressClass::Pothole)) == "potholes");
  CHECK(bcnn::parse_distress_class("pothole") == DistressClass::Pothole);
  CHECK(bcnn::parse_distress_class("linear") == DistressClass::Linear);
  CHECK_THROWS_AS(bcnn::parse_distress_class("rutting"), bcnn::ConfigError);
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = bcnn::synth_generate(DistressClass::Linear, 64, 9);
  CHECK(a == bcnn::synth_generate("linear", 64, 9));
  CHECK_FALSE(a.image == bcnn::synth_generate(DistressClass::Linear, 64, 10).image);
  CHECK(a.label == 1);
  CHECK(a.image.height == 64);
  CHECK_THROWS_AS(bcnn::synth_generate(DistressClass::Fatigue, 16, 1), bcnn::ConfigError);
}

TEST_CASE("linear cracks join opposite borders") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto img = bcnn::synth_generate(DistressClass::Linear, 64, seed).image;
    const auto blobs = dark_blobs(img, bcnn::kDarkThreshold);
    INFO("seed " << seed);
    CHECK(std::any_of(blobs.begin(), blobs.end(), [&](const auto& b) {
      return bcnn::testing::spans_opposite_borders(b, img);
    }));
  }
}

TEST_CASE("fatigue cracks enclose at least one cell") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto img = bcnn::synth_generate(DistressClass::Fatigue, 64, seed).image;
    INFO("seed " << seed);
    CHECK(enclosed_regions(img, bcnn::kDarkThreshold) >= 1);
  }
}

TEST_CASE("potholes are one compact blob of the declared size") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto img = bcnn::synth_generate(DistressClass::Pothole, 64, seed).image;
    const auto blobs = dark_blobs(img, bcnn::kDarkThreshold);
    INFO("seed " << seed);
    REQUIRE(blobs.size() == 1);
    const auto& b = blobs.front();
    const std::size_t bh = b.bottom - b.top + 1;
    const std::size_t bw = b.right - b.left + 1;
    // a filled ellipse covers pi/4 of its bounding box when axis-aligned
    CHECK(static_cast<double>(b.pixels) / static_cast<double>(bh * bw) >= 0.6);
    // axis lengths 15-40% of 64 -> at least ~9 px across, never the full frame
    CHECK(std::max(bh, bw) >= 9);
    CHECK(std::max(bh, bw) <= 40);
    CHECK_FALSE(bcnn::testing::spans_opposite_borders(b, img));
    CHECK(enclosed_regions(img, bcnn::kDarkThreshold) == 0);
  }
}

TEST_CASE("background stays light") {
  for (auto cls : {DistressClass::Fatigue, DistressClass::Linear, DistressClass::Pothole}) {
    const auto img = bcnn::synth_generate(cls, 64, 3).image;
    const auto dark = std::count_if(img.pixels.begin(), img.pixels.end(),
                                    [](std::uint8_t p) { return p <= bcnn::kDarkThreshold; });
    CHECK(dark > 0);
    CHECK(static_cast<std::size_t>(dark) < img.pixels.size() / 2);
  }
}

TEST_CASE("corpus layout") {
  const auto m = bcnn::synth_corpus(4, 32, 2);
  CHECK(m.class_names == std::vector<std::string>{"fatigue", "linear", "potholes"});
  CHECK(m.counts == std::vector<std::size_t>{4, 4, 4});
  CHECK(m.provenance == bcnn::Provenance::Synthetic);
  CHECK(m == bcnn::synth_corpus(4, 32, 2));
}
