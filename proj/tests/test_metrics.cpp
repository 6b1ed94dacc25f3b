#include <doctest.h>

#include "bcnn/errors.hpp"
#include "bcnn/metrics.hpp"
#include "support/table_oracle.hpp"

#include <sstream>

TEST_CASE("confusion matrix accumulation") {
  bcnn::ConfusionMatrix m({"a", "b"});
  const std::vector<int> truth{0, 0, 1, 1, 1};
  const std::vector<int> pred{0, 1, 1, 1, 0};
  m.accumulate(truth, pred);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(1, 0) == 1);
  CHECK(m.total() == 5);
  CHECK(m.trace() == 3);
  CHECK(m.row_sum(1) == 3);
  CHECK(m.col_sum(0) == 2);

  const auto before = m;
  const std::vector<int> bad_truth{0, 2};
  const std::vector<int> two{0, 0};
  CHECK_THROWS_AS(m.accumulate(bad_truth, two), bcnn::IndexError);
  CHECK(m == before);
  CHECK_THROWS_AS(m.accumulate(truth, two), bcnn::DimensionError);
}

TEST_CASE("per-class report on a hand-counted matrix") {
  const bcnn::ConfusionMatrix m({"a", "b"}, {{5, 1}, {2, 2}});
  const auto rows = bcnn::class_report(m);
  CHECK(rows[0].precision == doctest::Approx(5.0 / 7.0));
  CHECK(rows[0].recall == doctest::Approx(5.0 / 6.0));
  CHECK(rows[1].precision == doctest::Approx(2.0 / 3.0));
  CHECK(rows[1].recall == doctest::Approx(0.5));
  CHECK(rows[1].support == 4);
  const auto report = bcnn::metrics_report(m);
  CHECK(report.accuracy == doctest::Approx(0.7));
  CHECK(report.weighted.recall == report.accuracy);
  CHECK(report.macro.recall == doctest::Approx((5.0 / 6.0 + 0.5) / 2.0));
}

TEST_CASE("zero division is reported as zero") {
  const bcnn::ConfusionMatrix m({"a", "b", "c"}, {{3, 0, 0}, {2, 0, 0}, {0, 0, 1}});
  const auto rows = bcnn::class_report(m);
  CHECK(rows[1].precision == 0.0); // never predicted
  CHECK(rows[1].recall == 0.0);
  CHECK(rows[1].f1 == 0.0);
  CHECK(bcnn::f1_score(0.0, 0.0) == 0.0);
  CHECK(bcnn::f1_score(0.5, 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(bcnn::aggregate_report({}), bcnn::ConfigError);
}

TEST_CASE("half-away rounding") {
  CHECK(bcnn::round_to(0.875, 2) == 0.88);
  CHECK(bcnn::round_to(0.8749, 2) == 0.87);
  CHECK(bcnn::round_to(0.8752, 2) == 0.88);
}

TEST_CASE("reference table is self-consistent at two decimals") {
  const auto rows = bcnn::reference_pavement_rows();
  for (const auto& r : rows) {
    INFO(r.name);
    CHECK(bcnn::round_to(bcnn::f1_score(r.precision, r.recall), 2) == doctest::Approx(r.f1));
  }
  const auto agg = bcnn::aggregate_report(rows);
  // (205*0.85 + 205*0.85 + 189*0.93) / 599 = 0.87524...
  CHECK(agg.weighted.f1 == doctest::Approx(524.27 / 599.0));
  CHECK(bcnn::round_to(agg.weighted.f1, 2) == 0.88);
  CHECK(bcnn::round_to(agg.macro.f1, 2) == 0.88);
  // (205*0.83 + 205*0.89 + 189*0.90) / 599 = 0.87262...
  CHECK(bcnn::round_to(agg.accuracy, 2) == 0.87);
  CHECK(bcnn::round_to(agg.macro.recall, 2) == 0.87);
}

TEST_CASE("rounding predicate uses exact integer bounds") {
  using bcnn::testing::rounds_to;
  CHECK(rounds_to(87, 100, 87));
  CHECK(rounds_to(7, 8, 88));  // 0.875 rounds up
  CHECK_FALSE(rounds_to(7, 8, 87));
  CHECK(rounds_to(0, 5, 0));
  CHECK_FALSE(rounds_to(1, 0, 50));
}

TEST_CASE("some integer confusion matrix reproduces the reference table") {
  const bcnn::testing::RoundedTarget target{{87, 81, 96}, {83, 89, 90}, {205, 205, 189}};
  const auto hits = bcnn::testing::search_confusion_matrices(target, 1);
  REQUIRE(hits.size() == 1);
  const auto& h = hits.front();
  std::vector<std::vector<std::uint64_t>> counts(3, std::vector<std::uint64_t>(3));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      counts[i][j] = h[i][j];
    }
  }
  const bcnn::ConfusionMatrix m({"fatigue", "linear", "potholes"}, counts);
  const auto rows = bcnn::class_report(m);
  const auto reference = bcnn::reference_pavement_rows();
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(rows[c].support == reference[c].support);
    CHECK(bcnn::round_to(rows[c].precision, 2) == doctest::Approx(reference[c].precision));
    CHECK(bcnn::round_to(rows[c].recall, 2) == doctest::Approx(reference[c].recall));
  }
}

TEST_CASE("report csv layout") {
  const bcnn::ConfusionMatrix m({"a", "b"}, {{5, 1}, {2, 2}});
  const auto csv = bcnn::report_csv(bcnn::metrics_report(m));
  CHECK(csv.rfind("class,precision,recall,f1,support\na,0.7143,0.8333,", 0) == 0);
  CHECK(csv.find("\nmacro,") != std::string::npos);
  CHECK(csv.find(",10\nweighted,") != std::string::npos);
  CHECK(csv.find("\naccuracy,,,,0.7000\n") != std::string::npos);

  std::ostringstream os;
  bcnn::print_report(os, bcnn::metrics_report(m));
  CHECK(os.str().find("0.71") != std::string::npos);
}
