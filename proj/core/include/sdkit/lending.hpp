#pragma once

#include <map>
#include <string>

#include "sdkit/model.hpp"
#include "sdkit/scenario.hpp"
#include "sdkit/time_series.hpp"

namespace sdkit::lending {

struct GroupParams {
  double payoff_probability = 0.8;  // pi
  double initial_score = 550.0;     // points
  double initial_borrowers = 1000.0;  // people
};

/// Constants shared by both groups. Defaults are the published calibration.
struct Constants {
  double threshold = 400.0;      // lambda, points
  double application_rate = 0.5;  // alpha, 1/year
  double population = 10000.0;   // tau, people
  double loan_term = 10.0;       // upsilon, years
  double max_score = 850.0;      // sigma, points
  double increase_per_repayment = 0.04;  // iota
  double decrease_per_default = 0.25;    // delta
  // x = (1 / (1 + exp(-(x_center - x_slope * S))) - 1) * x_scale + x_offset
  double x_center = 47.89;
  double x_slope = 0.083;
  double x_scale = 4.0;
  double x_offset = 5.0;
  // g = 1 / (1 + exp(-(g_intercept + g_slope * S / lambda)))
  double g_intercept = 3.57;
  double g_slope = 3.43;
  double monthly_payment = 1000.0;  // dollars per borrower
};

struct Config {
  GroupParams group_a{0.8};
  GroupParams group_b{0.6};
  Constants constants;
  /// Use p = O*x and f = O*(1-x) exactly as tabulated, instead of the
  /// unit-consistent p = O*pi/upsilon, f = O*(1-pi)/upsilon.
  bool verbatim_flows = false;
};

/// Model text for two independent group copies (suffixes _A and _B) plus the
/// shared cumulative_profit stock. Throws ValidationError on invalid params.
std::string model_source(const Config& config = {});
ModelDefinition build_model(const Config& config = {});

enum class Intervention { None, Threshold, LoanTerm };

const char* to_string(Intervention i);
/// Accepts none | threshold | loanterm.
std::optional<Intervention> parse_intervention(std::string_view name);

/// Threshold: lambda_j becomes 200 from `switch_time`. LoanTerm: upsilon_j
/// becomes 10 * x_j from `switch_time`. Euler, dt = 1/12, from 0 to `horizon`.
Scenario scenario_for(Intervention intervention, double horizon = 20.0, double switch_time = 10.0);

/// Baseline, threshold and loan-term runs of the bundled model.
std::map<Intervention, TimeSeriesTable> run_intervention_suite(const ModelDefinition& model, double horizon = 20.0,
                                                               double switch_time = 10.0);

}  // namespace sdkit::lending
