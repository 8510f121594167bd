#include "cglab/trajectory.hpp"

#include <cmath>

#include "cglab/csv.hpp"
#include "cglab/errors.hpp"

namespace cglab {

void TrajectoryRecord::add(double t, std::string tag, std::vector<double> values) {
  if (values.size() != columns_.size()) throw Error("trajectory row width does not match columns");
  rows_.push_back(Row{t, std::move(tag), std::move(values)});
}

std::size_t TrajectoryRecord::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw Error("trajectory has no column '" + name + "'");
}

std::vector<double> TrajectoryRecord::series(const std::string& name, const std::string& tag) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const Row& r : rows_) {
    if (r.tag == tag) out.push_back(r.values[c]);
  }
  return out;
}

std::vector<double> TrajectoryRecord::times(const std::string& tag) const {
  std::vector<double> out;
  for (const Row& r : rows_) {
    if (r.tag == tag) out.push_back(r.t);
  }
  return out;
}

void TrajectoryRecord::write_csv(const std::filesystem::path& path) const {
  CsvTable csv;
  csv.header = {"t", "tag"};
  csv.header.insert(csv.header.end(), columns_.begin(), columns_.end());
  for (const Row& r : rows_) {
    std::vector<std::string> cells{format_double(r.t), r.tag};
    for (double v : r.values) cells.push_back(format_double(v));
    csv.add_row(std::move(cells));
  }
  cglab::write_csv(path, csv);
}

MeanSe mean_se(const std::vector<double>& samples) {
  MeanSe r;
  const auto n = static_cast<double>(samples.size());
  if (samples.empty()) return r;
  for (double v : samples) r.mean += v;
  r.mean /= n;
  if (samples.size() < 2) return r;
  double var = 0.0;
  for (double v : samples) var += (v - r.mean) * (v - r.mean);
  var /= n - 1.0;
  r.se = std::sqrt(var / n);
  return r;
}

}  // namespace cglab
