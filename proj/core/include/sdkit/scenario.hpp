#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdkit/model.hpp"
#include "sdkit/sim_config.hpp"

namespace sdkit {

/// Replaces the defining expression of a parameter or auxiliary from
/// `active_from` (inclusive) onward.
struct Override {
  std::string target;
  Expr replacement = Expr::number(0.0);
  double active_from = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  SimConfig config;
  std::vector<Override> overrides;
  /// Non-stock variables to record in addition to every stock.
  std::vector<std::string> outputs;
};

/// Throws ValidationError if a target is not a parameter or auxiliary, a
/// replacement references an unknown name, two overrides on one target share
/// `active_from`, or any activation time yields an instantaneous cycle.
void validate_overrides(const ModelDefinition& model, std::span<const Override> overrides);

/// validate_overrides plus config and output-name checks.
void validate_scenario(const ModelDefinition& model, const Scenario& scenario);

/// The computed variables in effect at `t`: auxiliaries and flows, plus any
/// parameter whose override is active. Among active overrides on one target,
/// the latest `active_from` wins. Throws ValidationError on an
/// instantaneous cycle.
struct EffectiveEquations {
  std::vector<Equation> equations;
  std::vector<std::string> overridden;
};

EffectiveEquations apply_overrides(const ModelDefinition& model, std::span<const Override> overrides,
                                   double t);

struct DependencyEdge {
  std::string from;
  std::string to;

  friend bool operator==(const DependencyEdge&, const DependencyEdge&) = default;
  friend auto operator<=>(const DependencyEdge&, const DependencyEdge&) = default;
};

/// Direct dependencies u→v where u appears in v's effective equation.
std::vector<DependencyEdge> dependency_edges(const EffectiveEquations& eqs);

struct StructureDiff {
  std::vector<DependencyEdge> added;
  std::vector<DependencyEdge> removed;

  bool empty() const { return added.empty() && removed.empty(); }
};

/// Dependency edges gained and lost at `t` relative to the baseline equations.
StructureDiff diff_structure(const ModelDefinition& model, const Scenario& scenario, double t);

/// Reads the scenario JSON document:
///   {"name": str, "horizon": {"start": num, "end": num, "dt": num},
///    "method": "euler"|"rk4", "record_every": int,
///    "overrides": [{"target": str, "expr": str, "from": num}], "outputs": [str]}
/// Only "horizon" is required. Throws ScenarioFormatError naming the key.
Scenario parse_scenario_json(std::string_view text);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace sdkit
