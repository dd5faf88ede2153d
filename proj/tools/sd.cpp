// sd: command-line front end for sdkit.
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sdkit/analysis.hpp"
#include "sdkit/engine.hpp"
#include "sdkit/errors.hpp"
#include "sdkit/lending.hpp"
#include "sdkit/loops.hpp"
#include "sdkit/parser.hpp"
#include "sdkit/table_io.hpp"
#include "sdkit/validate.hpp"

namespace {

using namespace sdkit;

// Reported failure of user input; main maps it to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("failed writing " + path);
}

void print_diagnostics(const std::vector<ParseDiagnostic>& diags) {
  for (const auto& d : diags) std::cerr << format_diagnostic(d) << "\n";
}

// Parse errors abort; validation is left to the caller.
ModelDefinition load_model_unchecked(const std::string& path) {
  auto result = parse_model(read_file(path), path);
  print_diagnostics(result.diagnostics);
  if (!result.ok()) throw InputError("could not parse " + path);
  return std::move(*result.value);
}

ModelDefinition load_model(const std::string& path) {
  ModelDefinition m = load_model_unchecked(path);
  auto report = validate_model(m);
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cerr << path << ": error: " << v.message << "\n";
    throw InputError("model " + path + " is not valid");
  }
  return m;
}

Scenario load_scenario(const std::string& spec) {
  if (!std::filesystem::exists(spec)) {
    if (auto builtin = lending::parse_intervention(spec)) return lending::scenario_for(*builtin);
  }
  try {
    return parse_scenario_json(read_file(spec));
  } catch (const ScenarioFormatError& e) {
    throw InputError(spec + ": scenario key '" + e.key() + "': " + std::string(e.what()).substr(e.key().size() + 2));
  }
}

void emit_table(const TimeSeriesTable& table, const std::string& out, const std::string& format,
                const std::string& plot, const std::string& title) {
  write_output(out, format == "json" ? table_to_json(table) : table_to_csv(table));
  if (!plot.empty()) write_output(plot, table_to_svg(table, title));
}

// ---- subcommands ----

struct RunArgs {
  std::string model, scenario, out, format = "csv", plot;
};

int cmd_run(const RunArgs& a) {
  ModelDefinition model = load_model(a.model);
  Scenario sc = a.scenario.empty() ? Scenario{} : load_scenario(a.scenario);
  TimeSeriesTable table = run(model, sc);
  emit_table(table, a.out, a.format, a.plot, model.name() + " / " + sc.name);
  return 0;
}

struct CheckArgs {
  std::string model;
};

int cmd_check(const CheckArgs& a) {
  ModelDefinition model = load_model_unchecked(a.model);
  auto report = validate_model(model);
  std::cout << "model " << model.name() << ": " << model.stocks().size() << " stocks, " << model.flows().size()
            << " flows, " << model.auxiliaries().size() << " auxiliaries, " << model.parameters().size()
            << " parameters\n";
  if (report.ok()) {
    std::cout << "validation: ok\n";
  } else {
    std::cout << "validation: " << report.violations.size() << " error(s)\n";
    for (const auto& v : report.violations) std::cout << "  error: " << v.message << "\n";
  }
  auto units = check_units(model);
  if (units.consistent()) {
    std::cout << "units: consistent\n";
  } else {
    std::cout << "units: " << units.issues.size() << " warning(s)\n";
    for (const auto& i : units.issues) std::cout << "  warning: " << i.message << "\n";
  }
  if (!units.unchecked.empty()) {
    std::cout << "units: not declared for";
    for (const auto& n : units.unchecked) std::cout << " " << n;
    std::cout << "\n";
  }
  return report.ok() ? 0 : 1;
}

struct LoopArgs {
  std::string model, cld, scenario;
  double at = 0.0;
  bool at_given = false;
  bool json = false;
  bool dot = false;
  bool strict = false;
};

int cmd_loops(const LoopArgs& a) {
  CausalGraph graph;
  if (!a.cld.empty()) {
    auto result = parse_cld(read_file(a.cld), a.cld);
    print_diagnostics(result.diagnostics);
    if (!result.ok()) throw InputError("could not parse " + a.cld);
    graph = std::move(*result.value);
  } else {
    ModelDefinition model = load_model(a.model);
    PolarityOptions opts;
    opts.assume_positive_when_undetermined = !a.strict;
    if (!a.scenario.empty()) {
      Scenario sc = load_scenario(a.scenario);
      validate_scenario(model, sc);
      graph = graph_from_model(model, sc, a.at_given ? a.at : sc.config.start_time, opts);
    } else {
      graph = graph_from_model(model, std::span<const Override>{}, a.at, opts);
    }
  }
  if (a.dot) {
    std::cout << graph_to_dot(graph);
    return 0;
  }
  auto loops = enumerate_loops(graph);
  std::cout << (a.json ? loops_to_json(loops) : format_loop_report(loops));
  return 0;
}

struct SweepArgs {
  std::string model, param, scenario, metric, out;
  unsigned jobs = 1;
};

int cmd_sweep(const SweepArgs& a) {
  auto eq = a.param.find('=');
  if (eq == std::string::npos) throw InputError("--param must look like name=start:stop:step");
  std::string name = a.param.substr(0, eq);
  std::string range = a.param.substr(eq + 1);
  std::vector<double> bounds;
  std::stringstream rs(range);
  for (std::string part; std::getline(rs, part, ':');) {
    try {
      std::size_t used = 0;
      bounds.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InputError("--param: '" + part + "' is not a number");
    }
  }
  if (bounds.size() != 3) throw InputError("--param must look like name=start:stop:step");

  std::vector<double> values;
  Metric metric = Metric::final_value("time");
  try {
    values = sweep_values(bounds[0], bounds[1], bounds[2]);
    metric = Metric::parse(a.metric);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  ModelDefinition model = load_model(a.model);
  if (!model.parameter(name)) throw InputError("'" + name + "' is not a parameter of " + a.model);
  for (const auto& v : metric.variables())
    if (!model.find(v)) throw InputError("metric refers to unknown variable '" + v + "'");
  Scenario sc = a.scenario.empty() ? Scenario{} : load_scenario(a.scenario);
  validate_scenario(model, sc);

  auto rows = sweep(model, name, values, sc, metric, a.jobs);
  std::string csv = "value,metric\n";
  for (const auto& r : rows) {
    csv += format_number(r.value) + ",";
    if (r.metric && std::isfinite(*r.metric)) {
      csv += format_number(*r.metric);
    } else {
      csv += "NaN";
      std::cerr << "warning: " << name << "=" << format_number(r.value) << " failed: "
                << (r.error.empty() ? "metric is not finite" : r.error) << "\n";
    }
    csv += "\n";
  }
  write_output(a.out, csv);
  return 0;
}

struct LendingArgs {
  std::string intervention = "none";
  double pi_a = 0.8, pi_b = 0.6;
  std::string out, format = "csv", plot, emit_model;
  bool verbatim = false;
};

int cmd_lending(const LendingArgs& a) {
  auto which = lending::parse_intervention(a.intervention);
  if (!which) throw InputError("unknown intervention '" + a.intervention + "' (none, threshold, loanterm)");
  lending::Config cfg;
  cfg.group_a.payoff_probability = a.pi_a;
  cfg.group_b.payoff_probability = a.pi_b;
  cfg.verbatim_flows = a.verbatim;
  std::string source;
  try {
    source = lending::model_source(cfg);
  } catch (const ValidationError& e) {
    throw InputError(e.what());
  }
  if (!a.emit_model.empty()) write_output(a.emit_model, source);
  ModelDefinition model = lending::build_model(cfg);
  Scenario sc = lending::scenario_for(*which);
  TimeSeriesTable table = run(model, sc);
  emit_table(table, a.out, a.format, a.plot, std::string("lending / ") + lending::to_string(*which));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sd: system dynamics models, loops and sweeps"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate a model under a scenario");
  run_cmd->add_option("--model", run_args.model, "Model file (.sd)")->required();
  run_cmd->add_option("--scenario", run_args.scenario,
                      "Scenario file (.json), or a built-in lending scenario: none, threshold, loanterm");
  run_cmd->add_option("--out", run_args.out, "Output file (default: stdout)");
  run_cmd->add_option("--format", run_args.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--plot", run_args.plot, "Also write an SVG line chart");

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "Validate a model and report unit consistency");
  check_cmd->add_option("--model", check_args.model, "Model file (.sd)")->required();

  LoopArgs loop_args;
  auto* loops_cmd = app.add_subcommand("loops", "List feedback loops of a model or causal loop diagram");
  auto* loop_model = loops_cmd->add_option("--model", loop_args.model, "Model file (.sd)");
  auto* loop_cld = loops_cmd->add_option("--cld", loop_args.cld, "Causal loop diagram (.cld)");
  loop_model->excludes(loop_cld);
  loops_cmd->add_option("--scenario", loop_args.scenario, "Scenario whose overrides apply")->needs(loop_model);
  auto* at_opt = loops_cmd->add_option("--at", loop_args.at, "Analyze the equations in effect at this time");
  at_opt->needs(loop_model);
  loops_cmd->add_flag("--json", loop_args.json, "JSON output");
  loops_cmd->add_flag("--dot", loop_args.dot, "Print the causal graph in Graphviz format instead");
  loops_cmd->add_flag("--strict", loop_args.strict, "Mark links of undetermined sign as unknown");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a model once per parameter value");
  sweep_cmd->add_option("--model", sweep_args.model, "Model file (.sd)")->required();
  sweep_cmd->add_option("--param", sweep_args.param, "name=start:stop:step")->required();
  sweep_cmd->add_option("--scenario", sweep_args.scenario, "Scenario file (.json) or built-in name");
  sweep_cmd->add_option("--metric", sweep_args.metric, "gap(A,B)@t | final(X) | max(X)")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "Output CSV (default: stdout)");
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "Parallel runs")->check(CLI::Range(1u, 256u));

  LendingArgs lending_args;
  auto* lending_cmd = app.add_subcommand("lending", "Run the bundled two-group lending model");
  lending_cmd->add_option("--intervention", lending_args.intervention, "none, threshold or loanterm")
      ->check(CLI::IsMember({"none", "threshold", "loanterm"}));
  lending_cmd->add_option("--pi-a", lending_args.pi_a, "Payoff probability of group A");
  lending_cmd->add_option("--pi-b", lending_args.pi_b, "Payoff probability of group B");
  lending_cmd->add_option("--out", lending_args.out, "Output file (default: stdout)");
  lending_cmd->add_option("--format", lending_args.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  lending_cmd->add_option("--plot", lending_args.plot, "Also write an SVG line chart");
  lending_cmd->add_option("--emit-model", lending_args.emit_model, "Write the model source to this file");
  lending_cmd->add_flag("--verbatim-flows", lending_args.verbatim,
                        "Use p = O*x and f = O*(1-x) instead of the unit-consistent flows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  loop_args.at_given = at_opt->count() > 0;

  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*check_cmd) return cmd_check(check_args);
    if (*loops_cmd) {
      if (loop_args.model.empty() && loop_args.cld.empty()) throw InputError("loops needs --model or --cld");
      return cmd_loops(loop_args);
    }
    if (*sweep_cmd) return cmd_sweep(sweep_args);
    if (*lending_cmd) return cmd_lending(lending_args);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
