#include "sdkit/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "sdkit/engine.hpp"
#include "sdkit/errors.hpp"

namespace sdkit {

double gap_metric(const TimeSeriesTable& table, std::string_view a, std::string_view b, double at) {
  double va = table.interpolate(a, at);
  double vb = table.interpolate(b, at);
  return va - vb;
}

ReferenceMode ReferenceMode::constant(std::string focal, double value, double start, double end) {
  return linear(std::move(focal), value, value, start, end);
}

ReferenceMode ReferenceMode::linear(std::string focal, double from, double to, double start, double end) {
  ReferenceMode m;
  m.focal = std::move(focal);
  m.desired = {{start, from}, {end, to}};
  m.start_time = start;
  m.end_time = end;
  return m;
}

namespace {

constexpr double kHorizonTolerance = 1e-9;

bool covers(const std::vector<std::pair<double, double>>& traj, double start, double end) {
  if (traj.empty()) return false;
  for (std::size_t i = 1; i < traj.size(); ++i)
    if (!(traj[i].first > traj[i - 1].first)) return false;
  return traj.front().first <= start + kHorizonTolerance && traj.back().first >= end - kHorizonTolerance;
}

double sample(const std::vector<std::pair<double, double>>& traj, double t) {
  if (t <= traj.front().first) return traj.front().second;
  if (t >= traj.back().first) return traj.back().second;
  auto it = std::upper_bound(traj.begin(), traj.end(), t,
                             [](double v, const std::pair<double, double>& p) { return v < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  double w = (t - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

}  // namespace

ReferenceComparison compare_to_reference(const TimeSeriesTable& table, const ReferenceMode& mode) {
  const auto& actual = table.column(mode.focal);
  const auto& times = table.times();
  if (times.empty()) throw HorizonMismatch("table has no rows");
  if (std::fabs(times.front() - mode.start_time) > kHorizonTolerance ||
      std::fabs(times.back() - mode.end_time) > kHorizonTolerance)
    throw HorizonMismatch("reference horizon [" + format_number(mode.start_time) + ", " +
                          format_number(mode.end_time) + "] does not match run horizon [" +
                          format_number(times.front()) + ", " + format_number(times.back()) + "]");
  if (!covers(mode.desired, mode.start_time, mode.end_time))
    throw HorizonMismatch("desired trajectory does not span the horizon");
  if (!mode.feared.empty() && !covers(mode.feared, mode.start_time, mode.end_time))
    throw HorizonMismatch("feared trajectory does not span the horizon");

  ReferenceComparison out;
  out.times = times;
  out.gaps.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double g = sample(mode.desired, times[i]) - actual[i];
    if (std::fabs(g) > out.max_abs_gap) {
      out.max_abs_gap = std::fabs(g);
      out.max_abs_gap_time = times[i];
    }
    if (i > 0) {
      double prev = out.gaps.back();
      if ((prev < 0.0 && g > 0.0) || (prev > 0.0 && g < 0.0)) {
        double w = prev / (prev - g);
        out.crossing_times.push_back(times[i - 1] + w * (times[i] - times[i - 1]));
      }
    }
    out.gaps.push_back(g);
  }
  if (out.max_abs_gap == 0.0) out.max_abs_gap_time = times.front();
  out.gap_at_horizon = out.gaps.back();
  return out;
}

// ---- metric specs ----

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

[[noreturn]] void bad_metric(std::string_view spec, const std::string& why) {
  throw std::invalid_argument("invalid metric '" + std::string(spec) + "': " + why +
                              " (expected gap(A,B)@t, final(X) or max(X))");
}

}  // namespace

Metric Metric::gap(std::string a, std::string b, double at) {
  Metric m;
  m.kind_ = Kind::Gap;
  m.a_ = std::move(a);
  m.b_ = std::move(b);
  m.at_ = at;
  return m;
}

Metric Metric::final_value(std::string var) {
  Metric m;
  m.kind_ = Kind::Final;
  m.a_ = std::move(var);
  return m;
}

Metric Metric::max_value(std::string var) {
  Metric m;
  m.kind_ = Kind::Max;
  m.a_ = std::move(var);
  return m;
}

Metric Metric::parse(std::string_view spec) {
  std::string_view s = trim(spec);
  auto open = s.find('(');
  auto close = s.find(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    bad_metric(spec, "missing parentheses");
  std::string_view head = trim(s.substr(0, open));
  std::string_view inner = s.substr(open + 1, close - open - 1);
  std::string_view rest = trim(s.substr(close + 1));

  if (head == "gap") {
    auto comma = inner.find(',');
    if (comma == std::string_view::npos) bad_metric(spec, "gap takes two variables");
    std::string_view a = trim(inner.substr(0, comma));
    std::string_view b = trim(inner.substr(comma + 1));
    if (!is_identifier(a) || !is_identifier(b)) bad_metric(spec, "gap takes two variable names");
    if (rest.empty() || rest.front() != '@') bad_metric(spec, "gap needs @<time>");
    auto t = parse_real(rest.substr(1));
    if (!t) bad_metric(spec, "bad time after @");
    return gap(std::string(a), std::string(b), *t);
  }
  if (head == "final" || head == "max") {
    std::string_view v = trim(inner);
    if (!is_identifier(v)) bad_metric(spec, head == "final" ? "final takes one variable name"
                                                           : "max takes one variable name");
    if (!rest.empty()) bad_metric(spec, "unexpected text after ')'");
    return head == "final" ? final_value(std::string(v)) : max_value(std::string(v));
  }
  bad_metric(spec, "unknown metric '" + std::string(head) + "'");
}

std::vector<std::string> Metric::variables() const {
  if (kind_ == Kind::Gap) return {a_, b_};
  return {a_};
}

double Metric::evaluate(const TimeSeriesTable& table) const {
  switch (kind_) {
    case Kind::Gap: return gap_metric(table, a_, b_, at_);
    case Kind::Final: {
      const auto& col = table.column(a_);
      if (col.empty()) throw std::out_of_range("table has no rows");
      return col.back();
    }
    case Kind::Max: {
      const auto& col = table.column(a_);
      if (col.empty()) throw std::out_of_range("table has no rows");
      return *std::max_element(col.begin(), col.end());
    }
  }
  return 0.0;
}

std::string Metric::to_string() const {
  switch (kind_) {
    case Kind::Gap: return "gap(" + a_ + "," + b_ + ")@" + format_number(at_);
    case Kind::Final: return "final(" + a_ + ")";
    case Kind::Max: return "max(" + a_ + ")";
  }
  return {};
}

// ---- sweeps ----

std::vector<double> sweep_values(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
    throw std::invalid_argument("sweep bounds must be finite");
  if (start > stop) throw std::invalid_argument("start exceeds stop");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  double span = (stop - start) / step;
  auto count = static_cast<std::size_t>(std::floor(span + 1e-9));
  std::vector<double> out;
  out.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k) {
    double v = (k == count && std::fabs(span - static_cast<double>(count)) <= 1e-9)
                   ? stop
                   : start + static_cast<double>(k) * step;
    // Snap to 15 significant digits so that 0.6 + 2*0.1 lands on 0.8.
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
    std::from_chars(buf, res.ptr, v);
    out.push_back(v);
  }
  return out;
}

std::vector<SweepRow> sweep(const ModelDefinition& model, const std::string& parameter,
                            std::span<const double> values, const Scenario& scenario, const Metric& metric,
                            unsigned jobs) {
  if (!model.parameter(parameter))
    throw std::invalid_argument("'" + parameter + "' is not a parameter of model " + model.name());

  Scenario sc = scenario;
  for (const auto& v : metric.variables())
    if (!model.stock(v) && std::find(sc.outputs.begin(), sc.outputs.end(), v) == sc.outputs.end())
      sc.outputs.push_back(v);

  auto one = [&](double value) {
    SweepRow row;
    row.value = value;
    try {
      TimeSeriesTable table = run(model.with_parameter_value(parameter, value), sc);
      row.metric = metric.evaluate(table);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };

  std::vector<SweepRow> rows(values.size());
  if (jobs <= 1 || values.size() <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) rows[i] = one(values[i]);
    return rows;
  }
  // Workers claim indices in order; each row lands in its own slot.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) rows[i] = one(values[i]);
  };
  std::vector<std::future<void>> pool;
  unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(values.size()));
  for (unsigned w = 0; w < n; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
  return rows;
}

}  // namespace sdkit
