#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdkit/model.hpp"
#include "sdkit/scenario.hpp"
#include "sdkit/time_series.hpp"

namespace sdkit {

/// a(at) - b(at), linearly interpolated. Throws MissingColumn, or
/// std::out_of_range outside the recorded horizon.
double gap_metric(const TimeSeriesTable& table, std::string_view a, std::string_view b, double at);

/// A desired trajectory for a focal variable, optionally with a feared one.
struct ReferenceMode {
  std::string focal;
  std::vector<std::pair<double, double>> desired;  // (time, value), sorted by time
  std::vector<std::pair<double, double>> feared;
  double start_time = 0.0;
  double end_time = 0.0;

  static ReferenceMode constant(std::string focal, double value, double start, double end);
  static ReferenceMode linear(std::string focal, double from, double to, double start, double end);
};

struct ReferenceComparison {
  std::vector<double> times;
  std::vector<double> gaps;  // desired - actual
  double max_abs_gap = 0.0;
  double max_abs_gap_time = 0.0;
  double gap_at_horizon = 0.0;
  /// Times where the gap changes sign, interpolated between samples.
  std::vector<double> crossing_times;
};

/// Throws MissingColumn; HorizonMismatch when the mode's horizon differs from
/// the table's or a trajectory does not cover it.
ReferenceComparison compare_to_reference(const TimeSeriesTable& table, const ReferenceMode& mode);

/// `gap(A,B)@t` | `final(X)` | `max(X)`
class Metric {
 public:
  enum class Kind { Gap, Final, Max };

  /// Throws std::invalid_argument.
  static Metric parse(std::string_view spec);
  static Metric gap(std::string a, std::string b, double at);
  static Metric final_value(std::string var);
  static Metric max_value(std::string var);

  Kind kind() const { return kind_; }
  /// Variables the metric reads.
  std::vector<std::string> variables() const;
  double evaluate(const TimeSeriesTable& table) const;
  std::string to_string() const;

 private:
  Kind kind_ = Kind::Final;
  std::string a_;
  std::string b_;
  double at_ = 0.0;
};

struct SweepRow {
  double value = 0.0;
  std::optional<double> metric;
  std::string error;
};

/// Grid start, start+step, ... up to stop (inclusive within 1e-9 of a step).
/// Throws std::invalid_argument on start > stop or step <= 0.
std::vector<double> sweep_values(double start, double stop, double step);

/// One independent run per value with `parameter` set to it. Rows come back
/// in input order; a failing run yields a row with no metric.
/// Throws std::invalid_argument if `parameter` is not a parameter.
std::vector<SweepRow> sweep(const ModelDefinition& model, const std::string& parameter,
                            std::span<const double> values, const Scenario& scenario, const Metric& metric,
                            unsigned jobs = 1);

}  // namespace sdkit
