#include <doctest.h>

#include "bcnn/dataset.hpp"
#include "bcnn/errors.hpp"
#include "support/temp_dir.hpp"

#include <fstream>
#include <set>

namespace {

bcnn::DatasetManifest sized(std::vector<std::size_t> per_class) {
  bcnn::DatasetManifest m;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    m.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      bcnn::GrayImage img(2, 2, static_cast<std::uint8_t>(i % 256));
      m.items.push_back({img, static_cast<int>(c), "c" + std::to_string(c) + "/" + std::to_string(i) + ".pgm"});
    }
  }
  bcnn::recount(m);
  return m;
}

std::size_t lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
  }
  return n;
}

} // namespace

TEST_CASE("stratified split of the held-out class sizes") {
  const auto m = sized({205, 205, 189});
  const auto [train, val] = bcnn::stratified_split(m, 0.75, 4);
  // floors 153 + 153 + 141 = 447; round(599 * 0.75) = 449 takes two remainders
  CHECK(train.items.size() == 449);
  CHECK(train.counts == std::vector<std::size_t>{154, 154, 141});
  CHECK(val.counts == std::vector<std::size_t>{51, 51, 48});

  std::set<std::string> seen;
  for (const auto* side : {&train, &val}) {
    for (const auto& item : side->items) {
      CHECK(seen.insert(item.path).second);
    }
  }
  CHECK(seen.size() == 599);
}

TEST_CASE("split is seeded and rejects bad ratios") {
  const auto m = sized({20, 20});
  CHECK(bcnn::stratified_split(m, 0.8, 1) == bcnn::stratified_split(m, 0.8, 1));
  CHECK_FALSE(bcnn::stratified_split(m, 0.8, 1).first == bcnn::stratified_split(m, 0.8, 2).first);
  CHECK(bcnn::stratified_split(m, 0.8, 1).first.counts == std::vector<std::size_t>{16, 16});
  CHECK_THROWS_AS(bcnn::stratified_split(m, 1.0, 1), bcnn::ConfigError);
  CHECK_THROWS_AS(bcnn::stratified_split(sized({1, 5}), 0.5, 1), bcnn::CorpusError);
}

TEST_CASE("manifest validation") {
  auto m = sized({2, 2});
  m.counts[0] = 3;
  CHECK_THROWS_AS(bcnn::validate(m), bcnn::ConsistencyError);
  m = sized({2, 2});
  m.items[0].label = 5;
  CHECK_THROWS_AS(bcnn::recount(m), bcnn::ConsistencyError);
}

TEST_CASE("write then load a corpus directory") {
  bcnn::testing::TempDir dir("dataset");
  auto m = sized({3, 2});
  bcnn::write_dataset(m, dir.path());
  CHECK(lines(dir / "manifest.csv") == 6);
  {
    std::ofstream(dir / "c0" / "notes.txt") << "x";
    std::ofstream(dir / "c1" / "broken.pgm") << "P5\n9 9\n255\n";
  }
  const auto loaded = bcnn::load_dataset(dir.path());
  CHECK(loaded.class_names == m.class_names);
  CHECK(loaded.counts == std::vector<std::size_t>{3, 2});
  CHECK(loaded.warnings.size() == 2);
  CHECK(loaded.provenance == bcnn::Provenance::Loaded);
}

TEST_CASE("corpus errors") {
  bcnn::testing::TempDir dir("corpus");
  CHECK_THROWS_AS(bcnn::load_dataset(dir / "nope"), bcnn::CorpusError);
  std::filesystem::create_directories(dir / "only");
  CHECK_THROWS_AS(bcnn::load_dataset(dir.path()), bcnn::CorpusError);
  std::filesystem::create_directories(dir / "empty");
  CHECK_THROWS_AS(bcnn::load_dataset(dir.path()), bcnn::CorpusError);
}

TEST_CASE("batches cover the manifest and scale pixels") {
  auto m = sized({5, 5});
  m.items[0].image.pixels = {255, 0, 51, 255};
  const auto batches = bcnn::to_batches(m, 4, 2);
  REQUIRE(batches.size() == 3);
  CHECK(batches[2].labels.size() == 2);
  CHECK(batches[0].images.shape() == bcnn::Shape{4, 1, 2, 2});
  CHECK(batches[0].images[0] == 1.0f);
  CHECK(batches[0].images[2] == doctest::Approx(0.2f));

  const auto shuffled = bcnn::to_batches(m, 10, 2, 7);
  auto labels = shuffled[0].labels;
  CHECK(labels != bcnn::to_batches(m, 10, 2)[0].labels);
  std::sort(labels.begin(), labels.end());
  CHECK(labels == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  CHECK(bcnn::to_batches(m, 10, 2, 7)[0].labels == shuffled[0].labels);
  CHECK_THROWS_AS(bcnn::to_batches(m, 0, 2), bcnn::ConfigError);
}
