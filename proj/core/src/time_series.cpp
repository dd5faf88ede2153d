#include "sdkit/time_series.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "sdkit/errors.hpp"

namespace sdkit {

TimeSeriesTable::TimeSeriesTable(std::vector<std::string> column_names)
    : names_(std::move(column_names)), columns_(names_.size()) {}

void TimeSeriesTable::add_row(double time, std::span<const double> values) {
  if (values.size() != names_.size())
    throw std::invalid_argument("row has " + std::to_string(values.size()) + " values, table has " +
                                std::to_string(names_.size()) + " columns");
  if (!times_.empty() && !(time > times_.back()))
    throw std::invalid_argument("row times must be strictly increasing");
  times_.push_back(time);
  for (std::size_t i = 0; i < values.size(); ++i) columns_[i].push_back(values[i]);
}

bool TimeSeriesTable::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& TimeSeriesTable::column(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw MissingColumn(std::string(name));
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

double TimeSeriesTable::interpolate(std::string_view name, double time) const {
  const auto& ys = column(name);
  if (times_.empty() || time < times_.front() || time > times_.back())
    throw std::out_of_range("time " + std::to_string(time) + " is outside the recorded horizon");
  return interpolate_linear(times_, ys, time);
}

double interpolate_linear(std::span<const double> xs, std::span<const double> ys, double x) {
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  std::size_t i = static_cast<std::size_t>(it - xs.begin());
  if (i < xs.size() && xs[i] == x) return ys[i];
  if (i == 0 || i >= xs.size()) throw std::out_of_range("interpolation point outside samples");
  double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

bool operator==(const TimeSeriesTable& a, const TimeSeriesTable& b) {
  if (a.names_ != b.names_ || !same_bits(a.times_, b.times_)) return false;
  for (std::size_t i = 0; i < a.columns_.size(); ++i)
    if (!same_bits(a.columns_[i], b.columns_[i])) return false;
  return true;
}

}  // namespace sdkit
