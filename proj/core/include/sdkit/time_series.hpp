#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sdkit {

/// Sampled trajectories: a time vector plus equally long named columns.
class TimeSeriesTable {
 public:
  TimeSeriesTable() = default;
  explicit TimeSeriesTable(std::vector<std::string> column_names);

  /// `values` must match the column count; `time` must exceed the last time.
  void add_row(double time, std::span<const double> values);

  std::size_t row_count() const { return times_.size(); }
  std::size_t column_count() const { return names_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::string>& column_names() const { return names_; }

  bool has_column(std::string_view name) const;
  /// Throws MissingColumn.
  const std::vector<double>& column(std::string_view name) const;
  const std::vector<double>& column(std::size_t index) const { return columns_.at(index); }

  /// Linear interpolation of a column at `time`. Throws MissingColumn, or
  /// std::out_of_range when `time` lies outside the recorded horizon.
  double interpolate(std::string_view name, double time) const;

  /// Bitwise equality of names, times and values.
  friend bool operator==(const TimeSeriesTable& a, const TimeSeriesTable& b);

 private:
  std::vector<std::string> names_;
  std::vector<double> times_;
  std::vector<std::vector<double>> columns_;
};

/// Linear interpolation over sorted sample points; clamps nothing.
/// Precondition: xs.front() <= x <= xs.back().
double interpolate_linear(std::span<const double> xs, std::span<const double> ys, double x);

}  // namespace sdkit
