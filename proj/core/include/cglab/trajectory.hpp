#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cglab {

/// Time series of named diagnostics; each row carries a macroscopic time and
/// a tag (replica id, "mean", "se", ...).
class TrajectoryRecord {
 public:
  struct Row {
    double t = 0.0;
    std::string tag;
    std::vector<double> values;
  };

  TrajectoryRecord() = default;
  explicit TrajectoryRecord(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  void add(double t, std::string tag, std::vector<double> values);

  std::size_t column(const std::string& name) const;
  /// Values of one column over the rows with the given tag, in insertion order.
  std::vector<double> series(const std::string& name, const std::string& tag = "mean") const;
  std::vector<double> times(const std::string& tag = "mean") const;

  /// Columns: t, tag, then the diagnostic columns; 17 significant digits.
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<Row> rows_;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and its standard error (n - 1 normalization).
MeanSe mean_se(const std::vector<double>& samples);

}  // namespace cglab
