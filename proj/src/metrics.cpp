#include "bcnn/metrics.hpp"

#include "bcnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace bcnn {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : names_(std::move(class_names)),
      counts_(names_.size(), std::vector<std::uint64_t>(names_.size(), 0)) {
  if (names_.size() < 2) {
    throw ConfigError("confusion matrix needs at least 2 classes");
  }
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names,
                                 std::vector<std::vector<std::uint64_t>> counts)
    : names_(std::move(class_names)), counts_(std::move(counts)) {
  if (names_.size() < 2) {
    throw ConfigError("confusion matrix needs at least 2 classes");
  }
  if (counts_.size() != names_.size()) {
    throw DimensionError("confusion matrix rows do not match class count");
  }
  for (const auto& row : counts_) {
    if (row.size() != names_.size()) {
      throw DimensionError("confusion matrix must be square");
    }
  }
}

void ConfusionMatrix::accumulate(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw DimensionError("confusion: " + std::to_string(truth.size()) + " labels vs " +
                         std::to_string(predicted.size()) + " predictions");
  }
  const auto k = static_cast<int>(names_.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k) {
      throw IndexError("confusion: label pair (" + std::to_string(truth[i]) + ", " +
                       std::to_string(predicted[i]) + ") outside " + std::to_string(k) +
                       " classes");
    }
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++counts_[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.names_.size() != names_.size()) {
    throw DimensionError("cannot merge confusion matrices of different class counts");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    for (std::size_t j = 0; j < counts_.size(); ++j) {
      counts_[i][j] += other.counts_[i][j];
    }
  }
  return *this;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t n = 0;
  for (const auto& row : counts_) {
    for (auto v : row) {
      n += v;
    }
  }
  return n;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    n += counts_[i][i];
  }
  return n;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t n = 0;
  for (auto v : counts_.at(truth)) {
    n += v;
  }
  return n;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t n = 0;
  for (const auto& row : counts_) {
    n += row.at(predicted);
  }
  return n;
}

double f1_score(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

std::vector<ClassMetrics> class_report(const ConfusionMatrix& matrix) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  std::vector<ClassMetrics> rows;
  for (std::size_t j = 0; j < matrix.classes(); ++j) {
    ClassMetrics m;
    m.name = matrix.class_names()[j];
    m.support = matrix.row_sum(j);
    m.precision = ratio(matrix.at(j, j), matrix.col_sum(j));
    m.recall = ratio(matrix.at(j, j), m.support);
    m.f1 = f1_score(m.precision, m.recall);
    rows.push_back(std::move(m));
  }
  return rows;
}

MetricsReport aggregate_report(std::span<const ClassMetrics> rows) {
  if (rows.empty()) {
    throw ConfigError("cannot aggregate an empty report");
  }
  std::uint64_t total = 0;
  for (const auto& r : rows) {
    total += r.support;
  }
  if (total == 0) {
    throw ConfigError("cannot aggregate a report with zero total support");
  }
  MetricsReport report;
  report.per_class.assign(rows.begin(), rows.end());
  const double n = static_cast<double>(rows.size());
  const double t = static_cast<double>(total);
  for (const auto& r : rows) {
    report.macro.precision += r.precision / n;
    report.macro.recall += r.recall / n;
    report.macro.f1 += r.f1 / n;
    const double w = static_cast<double>(r.support) / t;
    report.weighted.precision += w * r.precision;
    report.weighted.recall += w * r.recall;
    report.weighted.f1 += w * r.f1;
  }
  report.accuracy = report.weighted.recall;
  return report;
}

MetricsReport metrics_report(const ConfusionMatrix& matrix) {
  const auto rows = class_report(matrix);
  MetricsReport report = aggregate_report(rows);
  // trace / total in one division. The weighted recall is the same quantity,
  // so it is set from it rather than from a sum of rounded terms.
  report.accuracy = static_cast<double>(matrix.trace()) / static_cast<double>(matrix.total());
  report.weighted.recall = report.accuracy;
  return report;
}

double round_to(double value, int decimals) noexcept {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::vector<ClassMetrics> reference_pavement_rows() {
  return {{"fatigue", 0.87, 0.83, 0.85, 205},
          {"linear", 0.81, 0.89, 0.85, 205},
          {"potholes", 0.96, 0.90, 0.93, 189}};
}

std::string report_csv(const MetricsReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "class,precision,recall,f1,support\n";
  std::uint64_t total = 0;
  for (const auto& r : report.per_class) {
    os << r.name << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ',' << r.support
       << '\n';
    total += r.support;
  }
  os << "macro," << report.macro.precision << ',' << report.macro.recall << ','
     << report.macro.f1 << ',' << total << '\n';
  os << "weighted," << report.weighted.precision << ',' << report.weighted.recall << ','
     << report.weighted.f1 << ',' << total << '\n';
  os << "accuracy,,,," << report.accuracy << '\n';
  return os.str();
}

void write_report_csv(const MetricsReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) {
    throw IoError("cannot write " + file.string());
  }
  out << report_csv(report);
  if (!out) {
    throw IoError("short write to " + file.string());
  }
}

void print_report(std::ostream& os, const MetricsReport& report) {
  std::size_t width = 8;
  for (const auto& r : report.per_class) {
    width = std::max(width, r.name.size());
  }
  auto cell = [&](double v) { os << std::setw(11) << round_to(v, 2); };
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(static_cast<int>(width)) << "class" << std::right
     << std::setw(11) << "precision" << std::setw(11) << "recall" << std::setw(11) << "f1"
     << std::setw(11) << "support" << '\n';
  std::uint64_t total = 0;
  for (const auto& r : report.per_class) {
    os << std::left << std::setw(static_cast<int>(width)) << r.name << std::right;
    cell(r.precision);
    cell(r.recall);
    cell(r.f1);
    os << std::setw(11) << r.support << '\n';
    total += r.support;
  }
  os << std::left << std::setw(static_cast<int>(width)) << "macro" << std::right;
  cell(report.macro.precision);
  cell(report.macro.recall);
  cell(report.macro.f1);
  os << std::setw(11) << total << '\n';
  os << std::left << std::setw(static_cast<int>(width)) << "weighted" << std::right;
  cell(report.weighted.precision);
  cell(report.weighted.recall);
  cell(report.weighted.f1);
  os << std::setw(11) << total << '\n';
  os << std::left << std::setw(static_cast<int>(width)) << "accuracy" << std::right
     << std::setw(33) << "";
  cell(report.accuracy);
  os << '\n';
  os.flags(flags);
}

void print_confusion(std::ostream& os, const ConfusionMatrix& matrix) {
  std::size_t width = 6;
  for (const auto& n : matrix.class_names()) {
    width = std::max(width, n.size() + 1);
  }
  const int w = static_cast<int>(width);
  os << std::setw(w) << "true\\pred";
  for (const auto& n : matrix.class_names()) {
    os << std::setw(w) << n;
  }
  os << '\n';
  for (std::size_t i = 0; i < matrix.classes(); ++i) {
    os << std::setw(w) << matrix.class_names()[i];
    for (std::size_t j = 0; j < matrix.classes(); ++j) {
      os << std::setw(w) << matrix.at(i, j);
    }
    os << '\n';
  }
}

} // namespace bcnn
