#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdkit/expr.hpp"
#include "sdkit/units.hpp"

namespace sdkit {

enum class VariableKind { Stock, Flow, Auxiliary, Parameter };

const char* to_string(VariableKind kind);

struct ParameterDef {
  std::string name;
  double value = 0.0;
  std::optional<Unit> units;

  friend bool operator==(const ParameterDef&, const ParameterDef&) = default;
};

struct AuxiliaryDef {
  std::string name;
  Expr expr = Expr::number(0.0);
  std::optional<Unit> units;

  friend bool operator==(const AuxiliaryDef&, const AuxiliaryDef&) = default;
};

/// A flow endpoint: a stock name, or nullopt for a cloud.
using Endpoint = std::optional<std::string>;

struct FlowDef {
  std::string name;
  Endpoint source;
  Endpoint target;
  Expr rate = Expr::number(0.0);
  std::optional<Unit> units;

  friend bool operator==(const FlowDef&, const FlowDef&) = default;
};

struct StockDef {
  std::string name;
  Expr initial = Expr::number(0.0);
  // Filled from flow endpoints when the model is built.
  std::vector<std::string> inflows;
  std::vector<std::string> outflows;
  std::optional<Unit> units;
  bool non_negative = false;

  friend bool operator==(const StockDef&, const StockDef&) = default;
};

struct VariableRef {
  VariableKind kind;
  std::size_t index;

  friend bool operator==(const VariableRef&, const VariableRef&) = default;
};

/// A computed variable and its defining expression.
struct Equation {
  std::string name;
  Expr expr;
};

/// Immutable parsed model. Declaration order is kept per kind and globally.
/// Duplicate names are representable so that validation can report them;
/// lookups resolve to the first declaration.
class ModelDefinition {
 public:
  const std::string& name() const { return name_; }
  const std::vector<ParameterDef>& parameters() const { return parameters_; }
  const std::vector<AuxiliaryDef>& auxiliaries() const { return auxiliaries_; }
  const std::vector<FlowDef>& flows() const { return flows_; }
  const std::vector<StockDef>& stocks() const { return stocks_; }
  const std::vector<VariableRef>& declarations() const { return declarations_; }

  std::optional<VariableRef> find(std::string_view name) const;
  std::optional<VariableKind> kind_of(std::string_view name) const;
  const std::string& name_of(VariableRef ref) const;
  const std::optional<Unit>& units_of(VariableRef ref) const;

  const ParameterDef* parameter(std::string_view name) const;
  const AuxiliaryDef* auxiliary(std::string_view name) const;
  const FlowDef* flow(std::string_view name) const;
  const StockDef* stock(std::string_view name) const;

  /// Copy of this model with one parameter's value replaced.
  /// Throws std::invalid_argument if `name` is not a parameter.
  ModelDefinition with_parameter_value(std::string_view name, double value) const;

  /// Auxiliaries followed by flows, each in declaration order.
  std::vector<Equation> equations() const;

  /// Structural equality: names, kinds, expressions, endpoints, units.
  /// Cross-kind declaration interleaving is not compared.
  friend bool operator==(const ModelDefinition& a, const ModelDefinition& b);

 private:
  friend class ModelBuilder;
  ModelDefinition() = default;
  void index();

  std::string name_;
  std::vector<ParameterDef> parameters_;
  std::vector<AuxiliaryDef> auxiliaries_;
  std::vector<FlowDef> flows_;
  std::vector<StockDef> stocks_;
  std::vector<VariableRef> declarations_;
  std::map<std::string, VariableRef, std::less<>> lookup_;
};

class ModelBuilder {
 public:
  explicit ModelBuilder(std::string name = "model") { model_.name_ = std::move(name); }

  ModelBuilder& set_name(std::string name);
  ModelBuilder& add(ParameterDef def);
  ModelBuilder& add(AuxiliaryDef def);
  ModelBuilder& add(FlowDef def);
  ModelBuilder& add(StockDef def);

  ModelDefinition build() &&;

 private:
  ModelDefinition model_;
};

}  // namespace sdkit
