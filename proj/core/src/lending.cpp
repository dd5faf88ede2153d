#include "sdkit/lending.hpp"

#include <cmath>
#include <sstream>

#include "sdkit/engine.hpp"
#include "sdkit/errors.hpp"
#include "sdkit/parser.hpp"
#include "sdkit/validate.hpp"

namespace sdkit::lending {

namespace {

void check_group(const GroupParams& g, const Constants& c, const char* suffix) {
  auto fail = [&](const std::string& what) {
    throw ValidationError(std::string("group ") + suffix + ": " + what);
  };
  if (!(g.payoff_probability >= 0.0 && g.payoff_probability <= 1.0))
    fail("payoff probability must lie in [0, 1]");
  if (!(g.initial_score >= 0.0 && g.initial_score <= c.max_score))
    fail("initial score must lie in [0, " + format_number(c.max_score) + "]");
  if (!(g.initial_borrowers >= 0.0) || !std::isfinite(g.initial_borrowers))
    fail("initial borrowers must be a finite non-negative number");
}

void emit_group(std::ostream& out, const GroupParams& g, const Constants& c, const char* j, bool verbatim) {
  const std::string s = std::string("_") + j;
  auto n = [](double v) { return format_number(v); };
  out << "// group " << j << "\n";
  out << "param pi" << s << " = " << n(g.payoff_probability) << " units dimensionless\n";
  out << "param S0" << s << " = " << n(g.initial_score) << " units points/people\n";
  out << "param O0" << s << " = " << n(g.initial_borrowers) << " units people\n";
  out << "param lambda" << s << " = " << n(c.threshold) << " units points\n";
  out << "param upsilon" << s << " = " << n(c.loan_term) << " units year\n";
  out << "stock S" << s << " = S0" << s << " units points/people nonneg\n";
  out << "stock O" << s << " = O0" << s << " units people nonneg\n";
  out << "aux g" << s << " = 1 / (1 + exp(-(g_intercept + g_slope * S" << s << " / lambda" << s
      << "))) units dimensionless\n";
  out << "aux x" << s << " = (1 / (1 + exp(-(x_center - x_slope * S" << s
      << "))) - 1) * x_scale + x_offset units dimensionless\n";
  out << "flow r" << s << " (cloud -> O" << s << ") = alpha * tau * g" << s << " units people/year\n";
  if (verbatim) {
    out << "flow p" << s << " (O" << s << " -> cloud) = O" << s << " * x" << s << " units people/year\n";
    out << "flow f" << s << " (O" << s << " -> cloud) = O" << s << " * (1 - x" << s << ") units people/year\n";
  } else {
    out << "flow p" << s << " (O" << s << " -> cloud) = O" << s << " * pi" << s << " / upsilon" << s
        << " units people/year\n";
    out << "flow f" << s << " (O" << s << " -> cloud) = O" << s << " * (1 - pi" << s << ") / upsilon" << s
        << " units people/year\n";
  }
  out << "flow n" << s << " (cloud -> S" << s << ") = O" << s << " * iota * (sigma - S" << s
      << ") / tau units points/year\n";
  out << "flow d" << s << " (S" << s << " -> cloud) = S" << s << " * f" << s << " * delta / tau units points/year\n";
}

}  // namespace

std::string model_source(const Config& config) {
  const Constants& c = config.constants;
  check_group(config.group_a, c, "A");
  check_group(config.group_b, c, "B");

  std::ostringstream out;
  auto n = [](double v) { return format_number(v); };
  out << "model lending\n";
  out << "// shared constants\n";
  out << "param alpha = " << n(c.application_rate) << " units 1/year\n";
  out << "param tau = " << n(c.population) << " units people\n";
  out << "param sigma = " << n(c.max_score) << " units points\n";
  out << "param iota = " << n(c.increase_per_repayment) << " units people/year\n";
  out << "param delta = " << n(c.decrease_per_default) << " units people/year\n";
  out << "param interest_rate = 0 units dimensionless\n";
  out << "param x_center = " << n(c.x_center) << " units dimensionless\n";
  out << "param x_slope = " << n(c.x_slope) << " units dimensionless\n";
  out << "param x_scale = " << n(c.x_scale) << " units dimensionless\n";
  out << "param x_offset = " << n(c.x_offset) << " units dimensionless\n";
  out << "param g_intercept = " << n(c.g_intercept) << " units dimensionless\n";
  out << "param g_slope = " << n(c.g_slope) << " units dimensionless\n";
  out << "param monthly_payment = " << n(c.monthly_payment) << " units dollars/people\n";
  out << "param payments_per_year = 12 units 1/year\n";
  emit_group(out, config.group_a, c, "A", config.verbatim_flows);
  emit_group(out, config.group_b, c, "B", config.verbatim_flows);
  out << "// profit\n";
  out << "stock cumulative_profit = 0 units dollars nonneg\n";
  out << "flow payments (cloud -> cumulative_profit) = (O_A + O_B) * monthly_payment * payments_per_year"
         " units dollars/year\n";
  return out.str();
}

ModelDefinition build_model(const Config& config) {
  std::string text = model_source(config);
  auto parsed = parse_model(text, "lending.sd");
  if (!parsed.ok()) {
    std::string msg = "bundled lending model failed to parse";
    for (const auto& d : parsed.diagnostics) msg += "\n" + format_diagnostic(d);
    throw ValidationError(msg);
  }
  auto report = validate_model(*parsed.value);
  if (!report.ok()) {
    std::string msg = "bundled lending model is invalid";
    for (const auto& v : report.violations) msg += "\n" + v.message;
    throw ValidationError(msg);
  }
  return std::move(*parsed.value);
}

const char* to_string(Intervention i) {
  switch (i) {
    case Intervention::None: return "none";
    case Intervention::Threshold: return "threshold";
    case Intervention::LoanTerm: return "loanterm";
  }
  return "none";
}

std::optional<Intervention> parse_intervention(std::string_view name) {
  if (name == "none") return Intervention::None;
  if (name == "threshold") return Intervention::Threshold;
  if (name == "loanterm") return Intervention::LoanTerm;
  return std::nullopt;
}

Scenario scenario_for(Intervention intervention, double horizon, double switch_time) {
  Scenario sc;
  sc.name = to_string(intervention);
  sc.config.start_time = 0.0;
  sc.config.end_time = horizon;
  sc.config.dt = 1.0 / 12.0;
  sc.config.method = Method::Euler;
  for (const char* j : {"A", "B"}) {
    std::string s = std::string("_") + j;
    if (intervention == Intervention::Threshold)
      sc.overrides.push_back({"lambda" + s, Expr::number(200.0), switch_time});
    else if (intervention == Intervention::LoanTerm)
      sc.overrides.push_back(
          {"upsilon" + s, Expr::binary(BinaryOp::Mul, Expr::number(10.0), Expr::variable("x" + s)), switch_time});
  }
  return sc;
}

std::map<Intervention, TimeSeriesTable> run_intervention_suite(const ModelDefinition& model, double horizon,
                                                               double switch_time) {
  std::map<Intervention, TimeSeriesTable> out;
  for (auto i : {Intervention::None, Intervention::Threshold, Intervention::LoanTerm})
    out.emplace(i, run(model, scenario_for(i, horizon, switch_time)));
  return out;
}

}  // namespace sdkit::lending
