#include <doctest.h>

#include "bcnn/augment.hpp"
#include "bcnn/errors.hpp"
#include "support/augment_invariants.hpp"

namespace {

bcnn::GrayImage grid(std::size_t h, std::size_t w, std::vector<std::uint8_t> px) {
  bcnn::GrayImage img(h, w);
  img.pixels = std::move(px);
  return img;
}

} // namespace

TEST_CASE("quarter turns are counterclockwise index permutations") {
  const auto img = grid(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(bcnn::rotate(img, 90.0) == grid(3, 2, {3, 6, 2, 5, 1, 4}));
  CHECK(bcnn::rotate(img, 180.0) == grid(2, 3, {6, 5, 4, 3, 2, 1}));
  CHECK(bcnn::rotate(img, 270.0) == grid(3, 2, {4, 1, 5, 2, 6, 3}));
  CHECK(bcnn::rotate(img, -90.0) == bcnn::rotate(img, 270.0));
  CHECK(bcnn::rotate(img, 360.0) == img);
}

TEST_CASE("arbitrary angles keep the extent and fill with the median") {
  bcnn::GrayImage img(5, 5, 200);
  img.at(0, 0) = 10;
  const auto out = bcnn::rotate(img, 45.0);
  CHECK(out.height == 5);
  CHECK(out.width == 5);
  CHECK(bcnn::median_intensity(img) == 200);
  // the corner maps from outside the frame
  CHECK(out.at(0, 0) == 200);
  CHECK(out.at(2, 2) == 200);
}

TEST_CASE("zoom about the centre") {
  bcnn::GrayImage img(4, 4, 0);
  img.at(2, 2) = 255;
  const auto out = bcnn::scale_image(img, 2.0);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const bool block = r >= 1 && r <= 2 && c >= 1 && c <= 2;
      CHECK(out.at(r, c) == (block ? 255 : 0));
    }
  }
  CHECK_THROWS_AS(bcnn::scale_image(img, 2.5), bcnn::ConfigError);
  CHECK_THROWS_AS(bcnn::scale_image(img, 0.4), bcnn::ConfigError);
}

TEST_CASE("brightness rounds and clamps") {
  const auto img = grid(1, 4, {100, 250, 101, 0});
  CHECK(bcnn::adjust_brightness(img, 1.2).pixels == std::vector<std::uint8_t>{120, 255, 121, 0});
  CHECK(bcnn::adjust_brightness(img, 0.5).pixels == std::vector<std::uint8_t>{50, 125, 51, 0});
  CHECK_THROWS_AS(bcnn::adjust_brightness(img, 5.0), bcnn::ConfigError);
}

TEST_CASE("lower median") {
  CHECK(bcnn::median_intensity(grid(1, 4, {4, 1, 3, 2})) == 2);
  CHECK(bcnn::median_intensity(grid(1, 3, {9, 1, 5})) == 5);
}

TEST_CASE("augmented manifest layout") {
  bcnn::DatasetManifest m;
  m.class_names = {"a", "b"};
  m.items = {{bcnn::GrayImage(4, 4, 50), 0, "a/x.pgm"}, {bcnn::GrayImage(4, 4, 90), 1, "b/y.pgm"}};
  bcnn::recount(m);
  bcnn::AugmentSpec spec;
  spec.variants = 2;
  spec.seed = 3;
  const auto out = bcnn::augment_dataset(m, spec);
  REQUIRE(out.items.size() == 6);
  CHECK(out.items[0] == m.items[0]);
  CHECK(out.items[2].path == "a/x_aug0.pgm");
  CHECK(out.items[5].path == "b/y_aug1.pgm");
  CHECK(out.items[5].label == 1);
  CHECK(out.counts == std::vector<std::size_t>{3, 3});
  CHECK(out.provenance == bcnn::Provenance::Augmented);

  spec.scales = {};
  CHECK_THROWS_AS(bcnn::augment_dataset(m, spec), bcnn::ConfigError);
}

TEST_CASE("augmentation invariants over random seeds") {
  for (const auto& r : bcnn::testing::run_augment_invariants(1000, 25)) {
    INFO(r.name);
    CHECK(r.cases == 25);
    CHECK(r.failures == 0);
  }
}
