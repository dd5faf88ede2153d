#include "sdkit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "sdkit/errors.hpp"
#include "sdkit/parser.hpp"
#include "sdkit/validate.hpp"

namespace sdkit {

EffectiveEquations apply_overrides(const ModelDefinition& model, std::span<const Override> overrides,
                                   double t) {
  std::map<std::string, const Override*> active;
  for (const auto& o : overrides) {
    if (!(t >= o.active_from)) continue;
    auto& slot = active[o.target];
    if (!slot || o.active_from > slot->active_from) slot = &o;
  }

  EffectiveEquations eff;
  for (const auto& p : model.parameters()) {
    auto it = active.find(p.name);
    if (it == active.end()) continue;
    eff.equations.push_back({p.name, it->second->replacement});
    eff.overridden.push_back(p.name);
  }
  for (const auto& a : model.auxiliaries()) {
    auto it = active.find(a.name);
    if (it == active.end()) {
      eff.equations.push_back({a.name, a.expr});
    } else {
      eff.equations.push_back({a.name, it->second->replacement});
      eff.overridden.push_back(a.name);
    }
  }
  for (const auto& f : model.flows()) eff.equations.push_back({f.name, f.rate});

  auto order = order_equations(eff.equations);
  if (!order.acyclic())
    throw ValidationError("overrides active at t=" + format_number(t) +
                          " create an instantaneous cycle " + format_cycle(order.cycles.front()));
  return eff;
}

void validate_overrides(const ModelDefinition& model, std::span<const Override> overrides) {
  std::set<std::pair<std::string, double>> seen;
  std::set<double> switch_times;
  for (const auto& o : overrides) {
    auto kind = model.kind_of(o.target);
    if (!kind) throw ValidationError("override target '" + o.target + "' is not in the model");
    if (*kind != VariableKind::Parameter && *kind != VariableKind::Auxiliary)
      throw ValidationError("override target '" + o.target + "' is a " + to_string(*kind) +
                            "; only parameters and auxiliaries can be overridden");
    if (!std::isfinite(o.active_from))
      throw ValidationError("override of '" + o.target + "' has a non-finite start time");
    for (const auto& dep : referenced_names(o.replacement))
      if (!model.find(dep))
        throw ValidationError("override of '" + o.target + "' references unknown variable '" + dep + "'");
    if (!seen.emplace(o.target, o.active_from).second)
      throw ValidationError("two overrides of '" + o.target + "' start at t=" + format_number(o.active_from));
    switch_times.insert(o.active_from);
  }
  for (double t : switch_times) apply_overrides(model, overrides, t);
}

void validate_scenario(const ModelDefinition& model, const Scenario& scenario) {
  scenario.config.validate();
  validate_overrides(model, scenario.overrides);
  for (const auto& name : scenario.outputs)
    if (!model.find(name)) throw ValidationError("output '" + name + "' is not in the model");
}

std::vector<DependencyEdge> dependency_edges(const EffectiveEquations& eqs) {
  std::vector<DependencyEdge> edges;
  for (const auto& eq : eqs.equations)
    for (const auto& dep : referenced_names(eq.expr)) edges.push_back({dep, eq.name});
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

StructureDiff diff_structure(const ModelDefinition& model, const Scenario& scenario, double t) {
  auto before = dependency_edges(apply_overrides(model, {}, t));
  auto after = dependency_edges(apply_overrides(model, scenario.overrides, t));
  StructureDiff diff;
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                      std::back_inserter(diff.added));
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                      std::back_inserter(diff.removed));
  return diff;
}

namespace {

using nlohmann::json;

double require_number(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioFormatError(path + "." + key, "missing required key");
  if (!it->is_number()) throw ScenarioFormatError(path + "." + key, "expected a number");
  return it->get<double>();
}

std::string require_string(const json& value, const std::string& path) {
  if (!value.is_string()) throw ScenarioFormatError(path, "expected a string");
  return value.get<std::string>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) throw ScenarioFormatError(path.empty() ? key : path + "." + key, "unknown key");
  }
}

}  // namespace

Scenario parse_scenario_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ScenarioFormatError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioFormatError("<document>", "expected a JSON object");
  reject_unknown_keys(doc, {"name", "horizon", "method", "record_every", "overrides", "outputs"}, "");

  Scenario sc;
  if (auto it = doc.find("name"); it != doc.end()) sc.name = require_string(*it, "name");

  auto horizon = doc.find("horizon");
  if (horizon == doc.end()) throw ScenarioFormatError("horizon", "missing required key");
  if (!horizon->is_object()) throw ScenarioFormatError("horizon", "expected an object");
  reject_unknown_keys(*horizon, {"start", "end", "dt"}, "horizon");
  sc.config.start_time = require_number(*horizon, "start", "horizon");
  sc.config.end_time = require_number(*horizon, "end", "horizon");
  sc.config.dt = require_number(*horizon, "dt", "horizon");

  if (auto it = doc.find("method"); it != doc.end()) {
    std::string m = require_string(*it, "method");
    if (m == "euler") sc.config.method = Method::Euler;
    else if (m == "rk4") sc.config.method = Method::RK4;
    else throw ScenarioFormatError("method", "expected \"euler\" or \"rk4\", got \"" + m + "\"");
  }
  if (auto it = doc.find("record_every"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 1)
      throw ScenarioFormatError("record_every", "expected a positive integer");
    sc.config.record_every = it->get<int>();
  }
  try {
    sc.config.validate();
  } catch (const ValidationError& e) {
    throw ScenarioFormatError("horizon", e.what());
  }

  if (auto it = doc.find("overrides"); it != doc.end()) {
    if (!it->is_array()) throw ScenarioFormatError("overrides", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& entry = (*it)[i];
      std::string path = "overrides[" + std::to_string(i) + "]";
      if (!entry.is_object()) throw ScenarioFormatError(path, "expected an object");
      reject_unknown_keys(entry, {"target", "expr", "from"}, path);
      Override o;
      if (!entry.contains("target")) throw ScenarioFormatError(path + ".target", "missing required key");
      o.target = require_string(entry["target"], path + ".target");
      if (!entry.contains("expr")) throw ScenarioFormatError(path + ".expr", "missing required key");
      std::string expr_text = require_string(entry["expr"], path + ".expr");
      auto parsed = parse_expression(expr_text, path + ".expr");
      if (!parsed.ok())
        throw ScenarioFormatError(path + ".expr", parsed.diagnostics.front().message);
      o.replacement = *parsed.value;
      o.active_from = require_number(entry, "from", path);
      sc.overrides.push_back(std::move(o));
    }
  }
  if (auto it = doc.find("outputs"); it != doc.end()) {
    if (!it->is_array()) throw ScenarioFormatError("outputs", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i)
      sc.outputs.push_back(require_string((*it)[i], "outputs[" + std::to_string(i) + "]"));
  }
  return sc;
}

std::string scenario_to_json(const Scenario& scenario) {
  json doc;
  doc["name"] = scenario.name;
  doc["horizon"] = {{"start", scenario.config.start_time},
                    {"end", scenario.config.end_time},
                    {"dt", scenario.config.dt}};
  doc["method"] = scenario.config.method == Method::Euler ? "euler" : "rk4";
  if (scenario.config.record_every != 1) doc["record_every"] = scenario.config.record_every;
  json overrides = json::array();
  for (const auto& o : scenario.overrides)
    overrides.push_back({{"target", o.target}, {"expr", format_expr(o.replacement)}, {"from", o.active_from}});
  doc["overrides"] = overrides;
  doc["outputs"] = scenario.outputs;
  return doc.dump(2) + "\n";
}

}  // namespace sdkit
