#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <cstring>

#include "lending_golden.hpp"
#include "sdkit/analysis.hpp"
#include "sdkit/engine.hpp"
#include "sdkit/errors.hpp"
#include "sdkit/lending.hpp"
#include "sdkit/parser.hpp"
#include "sdkit/validate.hpp"

using namespace sdkit;
namespace golden = sdkit::testing::golden;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

Big big_x(double score) {
  Big s(score);
  return (Big(1) / (Big(1) + exp(-(Big("47.89") - Big("0.083") * s))) - Big(1)) * Big(4) + Big(5);
}

Big big_g(double score, double threshold) {
  return Big(1) / (Big(1) + exp(-(Big("3.57") + Big("3.43") * Big(score) / Big(threshold))));
}

const ModelDefinition& model() {
  static const ModelDefinition m = lending::build_model();
  return m;
}

const std::map<lending::Intervention, TimeSeriesTable>& suite() {
  static const auto s = lending::run_intervention_suite(model());
  return s;
}

const TimeSeriesTable& table(lending::Intervention i) { return suite().at(i); }

TimeSeriesTable run_with(double pi_a, double pi_b, lending::Intervention i = lending::Intervention::None) {
  lending::Config cfg;
  cfg.group_a.payoff_probability = pi_a;
  cfg.group_b.payoff_probability = pi_b;
  return run(lending::build_model(cfg), lending::scenario_for(i));
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Independent Euler integration of the two-group system in plain doubles,
// written directly from the equations rather than through the model text.
struct OracleGroup {
  double S, O, pi;
};

struct OracleResult {
  double S_A, S_B, O_A, O_B, profit;
};

OracleResult oracle_run(lending::Intervention which) {
  const double alpha = 0.5, tau = 10000, sigma = 850, iota = 0.04, delta = 0.25;
  OracleGroup g[2] = {{550, 1000, 0.8}, {550, 1000, 0.6}};
  double profit = 0;
  const int n = 240;
  const double dt = 1.0 / 12.0;
  for (int k = 0; k < n; ++k) {
    double t = 20.0 * k / n;
    bool on = t >= 10.0;
    double dS[2], dO[2], income = 0;
    for (int j = 0; j < 2; ++j) {
      double S = g[j].S, O = g[j].O;
      double lambda = (which == lending::Intervention::Threshold && on) ? 200 : 400;
      double x = (1 / (1 + std::exp(-(47.89 - 0.083 * S))) - 1) * 4 + 5;
      double upsilon = (which == lending::Intervention::LoanTerm && on) ? 10 * x : 10;
      double grant = 1 / (1 + std::exp(-(3.57 + 3.43 * S / lambda)));
      double r = alpha * tau * grant;
      double p = O * g[j].pi / upsilon;
      double f = O * (1 - g[j].pi) / upsilon;
      double inc = O * iota * (sigma - S) / tau;
      double dec = S * f * delta / tau;
      dS[j] = inc - dec;
      dO[j] = r - p - f;
      income += O;
    }
    for (int j = 0; j < 2; ++j) {
      g[j].S = std::max(0.0, g[j].S + dt * dS[j]);
      g[j].O = std::max(0.0, g[j].O + dt * dO[j]);
    }
    profit += dt * (income * 1000 * 12);
  }
  return {g[0].S, g[1].S, g[0].O, g[1].O, profit};
}

}  // namespace

// ---- high-precision evaluation of the printed closed forms ----

TEST(LendingFormulas, LoanTermEffectOracle) {
  Environment env{{"x_center", 47.89}, {"x_slope", 0.083}, {"x_scale", 4}, {"x_offset", 5}};
  Expr x = model().auxiliary("x_A")->expr;
  for (double s : {0.0, 300.0, 550.0, 577.0, 700.0, 850.0}) {
    env["S_A"] = s;
    EXPECT_NEAR(evaluate(x, env, 0.0), big_x(s).convert_to<double>(), 1e-13) << s;
  }
  env["S_A"] = 850;
  EXPECT_NEAR(evaluate(x, env, 0.0), 1.0, 1e-6);
  env["S_A"] = 550;
  EXPECT_NEAR(evaluate(x, env, 0.0), 4.6159, 1e-3);
}

TEST(LendingFormulas, GrantFractionOracle) {
  Environment env{{"g_intercept", 3.57}, {"g_slope", 3.43}, {"lambda_A", 400}};
  Expr g = model().auxiliary("g_A")->expr;
  for (double s : {0.0, 550.0, 850.0}) {
    env["S_A"] = s;
    EXPECT_NEAR(evaluate(g, env, 0.0), big_g(s, 400).convert_to<double>(), 1e-15) << s;
  }
  env["S_A"] = 550;
  EXPECT_NEAR(evaluate(g, env, 0.0), 0.99975, 1e-5);
}

// ---- model construction ----

TEST(LendingModel, BuildsAndValidates) {
  EXPECT_TRUE(validate_model(model()).ok());
  EXPECT_EQ(model().name(), "lending");
  for (const char* s : {"S_A", "O_A", "S_B", "O_B", "cumulative_profit"}) EXPECT_NE(model().stock(s), nullptr) << s;
  EXPECT_EQ(format_expr(model().flow("p_A")->rate), "O_A * pi_A / upsilon_A");
  EXPECT_EQ(format_expr(model().flow("f_B")->rate), "O_B * (1 - pi_B) / upsilon_B");
  EXPECT_EQ(format_expr(model().flow("r_A")->rate), "alpha * tau * g_A");
  EXPECT_EQ(format_expr(model().flow("n_A")->rate), "O_A * iota * (sigma - S_A) / tau");
  EXPECT_EQ(format_expr(model().flow("d_A")->rate), "S_A * f_A * delta / tau");
  EXPECT_EQ(model().parameter("interest_rate")->value, 0.0);
  EXPECT_EQ(model().parameter("pi_B")->value, 0.6);
}

TEST(LendingModel, VerbatimFlows) {
  lending::Config cfg;
  cfg.verbatim_flows = true;
  auto m = lending::build_model(cfg);
  EXPECT_EQ(format_expr(m.flow("p_A")->rate), "O_A * x_A");
  EXPECT_EQ(format_expr(m.flow("f_A")->rate), "O_A * (1 - x_A)");
  // x lies in [1, 5], so the printed default flow is an inflow in disguise.
  Simulator sim(m);
  EXPECT_LT(sim.rate_vector(sim.initial_state(0.0)).at("f_A"), 0.0);
}

TEST(LendingModel, InvalidParams) {
  lending::Config cfg;
  cfg.group_a.payoff_probability = 1.2;
  EXPECT_THROW(lending::build_model(cfg), ValidationError);
  cfg = {};
  cfg.group_b.initial_score = 900;
  EXPECT_THROW(lending::build_model(cfg), ValidationError);
  cfg = {};
  cfg.group_b.initial_borrowers = -1;
  EXPECT_THROW(lending::build_model(cfg), ValidationError);
}

TEST(LendingModel, EmittedSourceRoundTrips) {
  auto parsed = parse_model(lending::model_source());
  ASSERT_TRUE(parsed.ok());
  EXPECT_EQ(*parsed.value, model());
}

// ---- suite ----

TEST(LendingSuite, ShapeAndInactiveOverride) {
  for (const auto& [which, t] : suite()) {
    EXPECT_EQ(t.row_count(), 241u);
    EXPECT_EQ(t.times().front(), 0.0);
    EXPECT_EQ(t.times().back(), 20.0);
    EXPECT_EQ(t.column_names(), (std::vector<std::string>{"S_A", "O_A", "S_B", "O_B", "cumulative_profit"}));
  }
  const auto& none = table(lending::Intervention::None);
  for (auto which : {lending::Intervention::Threshold, lending::Intervention::LoanTerm}) {
    const auto& other = table(which);
    // Row 120 is t = 10 itself, recorded before the override has acted.
    for (std::size_t r = 0; r <= 120; ++r)
      for (std::size_t c = 0; c < none.column_count(); ++c)
        EXPECT_EQ(std::memcmp(&none.column(c)[r], &other.column(c)[r], sizeof(double)), 0) << r;
    // Borrower flows react within the first step. Under the threshold
    // change the score only follows a step later, through O.
    EXPECT_NE(none.column("O_B")[121], other.column("O_B")[121]);
    if (which == lending::Intervention::Threshold)
      EXPECT_EQ(none.column("S_B")[121], other.column("S_B")[121]);
    else
      EXPECT_NE(none.column("S_B")[121], other.column("S_B")[121]);
    EXPECT_NE(none.column("S_B")[122], other.column("S_B")[122]);
  }
}

TEST(LendingSuite, MatchesIndependentOracle) {
  for (auto which : {lending::Intervention::None, lending::Intervention::Threshold, lending::Intervention::LoanTerm}) {
    auto o = oracle_run(which);
    const auto& t = table(which);
    EXPECT_NEAR(t.column("S_A").back(), o.S_A, 1e-9 * o.S_A);
    EXPECT_NEAR(t.column("S_B").back(), o.S_B, 1e-9 * o.S_B);
    EXPECT_NEAR(t.column("O_A").back(), o.O_A, 1e-9 * o.O_A);
    EXPECT_NEAR(t.column("O_B").back(), o.O_B, 1e-9 * o.O_B);
    EXPECT_NEAR(t.column("cumulative_profit").back(), o.profit, 1e-9 * o.profit);
  }
}

TEST(LendingSuite, GoldenValues) {
  const auto& none = table(lending::Intervention::None);
  const auto& thr = table(lending::Intervention::Threshold);
  const auto& lt = table(lending::Intervention::LoanTerm);
  EXPECT_EQ(none.column("S_A").back(), golden::kBaselineScoreA);
  EXPECT_EQ(none.column("S_B").back(), golden::kBaselineScoreB);
  EXPECT_EQ(none.column("O_A").back(), golden::kBaselineBorrowersA);
  EXPECT_EQ(none.column("cumulative_profit").back(), golden::kBaselineProfit);
  EXPECT_EQ(thr.column("cumulative_profit").back(), golden::kThresholdProfit);
  EXPECT_EQ(lt.column("cumulative_profit").back(), golden::kLoanTermProfit);
  EXPECT_EQ(gap_metric(none, "S_A", "S_B", 20.0), golden::kBaselineGap);
  EXPECT_EQ(gap_metric(thr, "S_A", "S_B", 20.0), golden::kThresholdGap);
  EXPECT_EQ(gap_metric(lt, "S_A", "S_B", 20.0), golden::kLoanTermGap);
}

TEST(LendingSuite, ThresholdWidensGap) {
  double base = gap_metric(table(lending::Intervention::None), "S_A", "S_B", 20.0);
  double thr = gap_metric(table(lending::Intervention::Threshold), "S_A", "S_B", 20.0);
  EXPECT_GT(base, 0.0);
  EXPECT_GT(thr, base);
}

TEST(LendingSuite, ProfitOrdering) {
  double none = table(lending::Intervention::None).column("cumulative_profit").back();
  double thr = table(lending::Intervention::Threshold).column("cumulative_profit").back();
  double lt = table(lending::Intervention::LoanTerm).column("cumulative_profit").back();
  EXPECT_GE(thr, none);
  EXPECT_GE(lt, none);
  EXPECT_LE(std::fabs(thr - lt) / std::max(thr, lt), 0.10);
}

TEST(LendingSuite, Invariants) {
  for (const auto& [which, t] : suite()) {
    const auto& profit = t.column("cumulative_profit");
    for (std::size_t r = 1; r < t.row_count(); ++r) EXPECT_GE(profit[r], profit[r - 1]);
    for (const char* j : {"_A", "_B"}) {
      const auto& S = t.column(std::string("S") + j);
      const auto& O = t.column(std::string("O") + j);
      for (std::size_t r = 0; r < t.row_count(); ++r) {
        EXPECT_GE(S[r], 0.0);
        EXPECT_LE(S[r], 850.0);
        EXPECT_GE(O[r], 0.0);
      }
      // Stocks move by one ordinary step across the switch.
      EXPECT_LT(std::fabs(S[121] - S[120]), 2 * std::fabs(S[120] - S[119]));
      EXPECT_LT(std::fabs(O[121] - O[120]), 0.01 * O[120]);
    }
    const auto& SA = t.column("S_A");
    const auto& SB = t.column("S_B");
    for (std::size_t r = 0; r < t.row_count(); ++r) EXPECT_GE(SA[r], SB[r]);
  }
}

TEST(LendingGroups, Symmetry) {
  auto t = run_with(0.7, 0.7, lending::Intervention::LoanTerm);
  EXPECT_TRUE(same_bits(t.column("S_A"), t.column("S_B")));
  EXPECT_TRUE(same_bits(t.column("O_A"), t.column("O_B")));
}

TEST(LendingGroups, Independence) {
  auto a = run_with(0.8, 0.6);
  auto b = run_with(0.8, 0.3);
  EXPECT_TRUE(same_bits(a.column("S_A"), b.column("S_A")));
  EXPECT_TRUE(same_bits(a.column("O_A"), b.column("O_A")));
  EXPECT_FALSE(same_bits(a.column("S_B"), b.column("S_B")));
}

TEST(LendingGroups, CertainRepayment) {
  lending::Config cfg;
  cfg.group_a.payoff_probability = 1.0;
  auto m = lending::build_model(cfg);
  Scenario sc = lending::scenario_for(lending::Intervention::None);
  sc.outputs = {"f_A", "d_A"};
  auto t = run(m, sc);
  for (double v : t.column("f_A")) EXPECT_EQ(v, 0.0);
  for (double v : t.column("d_A")) EXPECT_EQ(v, 0.0);
  const auto& S = t.column("S_A");
  for (std::size_t r = 1; r < S.size(); ++r) EXPECT_GE(S[r], S[r - 1]);
}

// ---- metrics ----

TEST(GapMetric, Basics) {
  const auto& none = table(lending::Intervention::None);
  EXPECT_EQ(gap_metric(none, "S_A", "S_A", 7.3), 0.0);
  EXPECT_EQ(gap_metric(none, "S_A", "S_B", 0.0), 0.0);
  double mid = gap_metric(none, "S_A", "S_B", 1.0 / 24.0);
  double lo = none.column("S_A")[0] - none.column("S_B")[0];
  double hi = none.column("S_A")[1] - none.column("S_B")[1];
  EXPECT_NEAR(mid, (lo + hi) / 2, 1e-12);
  EXPECT_THROW(gap_metric(none, "S_A", "Z", 1.0), MissingColumn);
  EXPECT_THROW(gap_metric(none, "S_A", "S_B", 20.5), std::out_of_range);
}

TEST(ReferenceModes, Identity) {
  const auto& none = table(lending::Intervention::None);
  ReferenceMode mode;
  mode.focal = "S_B";
  mode.start_time = 0;
  mode.end_time = 20;
  for (std::size_t r = 0; r < none.row_count(); ++r) mode.desired.push_back({none.times()[r], none.column("S_B")[r]});
  auto cmp = compare_to_reference(none, mode);
  EXPECT_EQ(cmp.max_abs_gap, 0.0);
  for (double g : cmp.gaps) EXPECT_EQ(g, 0.0);
  EXPECT_TRUE(cmp.crossing_times.empty());
}

TEST(ReferenceModes, MaxScore) {
  const auto& none = table(lending::Intervention::None);
  auto cmp = compare_to_reference(none, ReferenceMode::constant("S_A", 850, 0, 20));
  for (std::size_t r = 0; r < cmp.gaps.size(); ++r) {
    EXPECT_EQ(cmp.gaps[r], 850 - none.column("S_A")[r]);
    EXPECT_GT(cmp.gaps[r], 0.0);
  }
  EXPECT_EQ(cmp.max_abs_gap, 300.0);
  EXPECT_EQ(cmp.max_abs_gap_time, 0.0);
}

TEST(ReferenceModes, LinearTargetAgainstGroupB) {
  const auto& none = table(lending::Intervention::None);
  auto cmp = compare_to_reference(none, ReferenceMode::linear("S_B", 550, 700, 0, 20));
  EXPECT_EQ(cmp.gaps.front(), 0.0);
  // Not sign-consistent at this calibration: S_B overtakes the target
  // between the two crossings.
  ASSERT_EQ(cmp.crossing_times.size(), 2u);
  EXPECT_EQ(cmp.crossing_times[0], golden::kLinearTargetFirstCrossing);
  EXPECT_EQ(cmp.crossing_times[1], golden::kLinearTargetSecondCrossing);
  for (std::size_t r = 1; r < cmp.gaps.size(); ++r) {
    double t = cmp.times[r];
    if (t < cmp.crossing_times[0] || t > cmp.crossing_times[1]) EXPECT_GT(cmp.gaps[r], 0.0) << t;
    else EXPECT_LT(cmp.gaps[r], 0.0) << t;
  }
  EXPECT_EQ(cmp.gap_at_horizon, golden::kLinearTargetGapAtHorizon);
  EXPECT_EQ(cmp.max_abs_gap, golden::kLinearTargetMaxGap);
  EXPECT_EQ(cmp.max_abs_gap_time, 20.0);
}

TEST(ReferenceModes, Crossings) {
  TimeSeriesTable t({"v"});
  for (int k = 0; k <= 4; ++k) t.add_row(k, std::vector<double>{static_cast<double>(k)});
  auto cmp = compare_to_reference(t, ReferenceMode::constant("v", 1.5, 0, 4));
  ASSERT_EQ(cmp.crossing_times.size(), 1u);
  EXPECT_DOUBLE_EQ(cmp.crossing_times[0], 1.5);
  EXPECT_EQ(cmp.gap_at_horizon, -2.5);
}

TEST(ReferenceModes, Errors) {
  const auto& none = table(lending::Intervention::None);
  EXPECT_THROW(compare_to_reference(none, ReferenceMode::constant("nope", 1, 0, 20)), MissingColumn);
  EXPECT_THROW(compare_to_reference(none, ReferenceMode::constant("S_A", 1, 0, 10)), HorizonMismatch);
  auto short_traj = ReferenceMode::constant("S_A", 1, 0, 20);
  short_traj.desired = {{0, 1}, {15, 1}};
  EXPECT_THROW(compare_to_reference(none, short_traj), HorizonMismatch);
  auto feared = ReferenceMode::constant("S_A", 1, 0, 20);
  feared.feared = {{5, 1}, {20, 1}};
  EXPECT_THROW(compare_to_reference(none, feared), HorizonMismatch);
}

TEST(MetricSpec, Parse) {
  EXPECT_EQ(Metric::parse("gap(S_A,S_B)@20").to_string(), "gap(S_A,S_B)@20");
  EXPECT_EQ(Metric::parse(" gap( S_A , S_B ) @ 12.5 ").to_string(), "gap(S_A,S_B)@12.5");
  EXPECT_EQ(Metric::parse("final(cumulative_profit)").kind(), Metric::Kind::Final);
  EXPECT_EQ(Metric::parse("max(O_A)").kind(), Metric::Kind::Max);
  for (const char* bad : {"gap(S_A)@20", "gap(S_A,S_B)", "gap(S_A,S_B)@x", "final()", "mean(S_A)", "final(S_A) x",
                          "final S_A", "max(1x)"})
    EXPECT_THROW(Metric::parse(bad), std::invalid_argument) << bad;
}

TEST(MetricSpec, Evaluate) {
  const auto& none = table(lending::Intervention::None);
  EXPECT_EQ(Metric::parse("final(cumulative_profit)").evaluate(none), none.column("cumulative_profit").back());
  EXPECT_EQ(Metric::parse("max(S_A)").evaluate(none), none.column("S_A").back());
  EXPECT_EQ(Metric::parse("gap(S_A,S_B)@20").evaluate(none), gap_metric(none, "S_A", "S_B", 20));
}

// ---- sweeps ----

TEST(Sweep, Values) {
  EXPECT_EQ(sweep_values(0.6, 0.8, 0.1), (std::vector<double>{0.6, 0.7, 0.8}));
  EXPECT_EQ(sweep_values(1, 1, 0.5), std::vector<double>{1});
  EXPECT_EQ(sweep_values(0, 1, 0.3).size(), 4u);
  EXPECT_THROW(sweep_values(0.8, 0.6, 0.1), std::invalid_argument);
  EXPECT_THROW(sweep_values(0, 1, 0), std::invalid_argument);
}

TEST(Sweep, PayoffProbabilityGap) {
  auto values = sweep_values(0.6, 0.8, 0.1);
  auto rows = sweep(model(), "pi_B", values, lending::scenario_for(lending::Intervention::None),
                    Metric::parse("gap(S_A,S_B)@20"));
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) ASSERT_TRUE(r.metric) << r.error;
  EXPECT_EQ(rows[0].value, 0.6);
  EXPECT_EQ(*rows[0].metric, golden::kBaselineGap);
  EXPECT_GE(*rows[0].metric, *rows[1].metric);
  EXPECT_GE(*rows[1].metric, *rows[2].metric);
  EXPECT_EQ(*rows[2].metric, 0.0);
}

TEST(Sweep, ThresholdEffectOnBorrowers) {
  std::vector<double> values{400, 300, 200};
  auto sc = lending::scenario_for(lending::Intervention::None);
  auto metric = Metric::final_value("O_A");
  auto rows_a = sweep(model(), "lambda_A", values, sc, metric);
  // g rises as lambda falls (S/lambda grows), so more loans are granted.
  ASSERT_TRUE(rows_a[0].metric && rows_a[1].metric && rows_a[2].metric);
  EXPECT_LT(*rows_a[0].metric, *rows_a[1].metric);
  EXPECT_LT(*rows_a[1].metric, *rows_a[2].metric);
  EXPECT_EQ(*rows_a[0].metric, golden::kBaselineBorrowersA);
  EXPECT_EQ(*rows_a[1].metric, golden::kLambda300BorrowersA);
  EXPECT_EQ(*rows_a[2].metric, golden::kLambda200BorrowersA);
}

TEST(Sweep, EmptyParallelAndFailures) {
  auto sc = lending::scenario_for(lending::Intervention::None);
  auto metric = Metric::final_value("cumulative_profit");
  EXPECT_TRUE(sweep(model(), "pi_B", std::vector<double>{}, sc, metric).empty());
  EXPECT_THROW(sweep(model(), "S_A", std::vector<double>{1}, sc, metric), std::invalid_argument);

  std::vector<double> values{10, 0, 5};  // upsilon = 0 divides by zero
  auto serial = sweep(model(), "upsilon_A", values, sc, metric, 1);
  auto parallel = sweep(model(), "upsilon_A", values, sc, metric, 3);
  ASSERT_EQ(serial.size(), 3u);
  EXPECT_TRUE(serial[0].metric);
  EXPECT_FALSE(serial[1].metric);
  EXPECT_NE(serial[1].error.find("p_A"), std::string::npos) << serial[1].error;
  EXPECT_TRUE(serial[2].metric);
  EXPECT_EQ(*serial[0].metric, golden::kBaselineProfit);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(serial[i].value, parallel[i].value);
    EXPECT_EQ(serial[i].metric, parallel[i].metric);
  }
}
