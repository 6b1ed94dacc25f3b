#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bcnn {

// counts[t][p]: items of true class t predicted as class p.
class ConfusionMatrix {
public:
  explicit ConfusionMatrix(std::vector<std::string> class_names);
  ConfusionMatrix(std::vector<std::string> class_names,
                  std::vector<std::vector<std::uint64_t>> counts);

  std::size_t classes() const noexcept { return names_.size(); }
  const std::vector<std::string>& class_names() const noexcept { return names_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_.at(truth).at(predicted);
  }

  // Adds one count per (truth, prediction) pair. IndexError on bad labels
  // (nothing is recorded in that case).
  void accumulate(std::span<const int> truth, std::span<const int> predicted);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::uint64_t>> counts_;
};

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  AverageMetrics macro;
  AverageMetrics weighted;
};

// Harmonic mean, 0 when both inputs are 0.
double f1_score(double precision, double recall) noexcept;

// Per-class rows; 0/0 is reported as 0.
std::vector<ClassMetrics> class_report(const ConfusionMatrix& matrix);

// Macro and support-weighted averages of the given rows. Accuracy is the
// weighted recall. Throws ConfigError for an empty report or zero total support.
MetricsReport aggregate_report(std::span<const ClassMetrics> rows);

MetricsReport metrics_report(const ConfusionMatrix& matrix);

// Round half away from zero to `decimals` places.
double round_to(double value, int decimals) noexcept;

// Reference per-class precision/recall/F1 for the pavement corpus, with its
// held-out supports (fatigue, linear, potholes).
std::vector<ClassMetrics> reference_pavement_rows();

// report.csv: header `class,precision,recall,f1,support`, per-class rows,
// `macro`, `weighted`, then `accuracy,,,,<value>`; 4 decimals.
void write_report_csv(const MetricsReport& report, const std::filesystem::path& file);
std::string report_csv(const MetricsReport& report);

// Human-readable table with 2-decimal values.
void print_report(std::ostream& os, const MetricsReport& report);
void print_confusion(std::ostream& os, const ConfusionMatrix& matrix);

} // namespace bcnn
