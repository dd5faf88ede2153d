#include "sdkit/model.hpp"

#include <stdexcept>

namespace sdkit {

const char* to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::Stock: return "stock";
    case VariableKind::Flow: return "flow";
    case VariableKind::Auxiliary: return "aux";
    case VariableKind::Parameter: return "param";
  }
  return "?";
}

void ModelDefinition::index() {
  lookup_.clear();
  for (const auto& ref : declarations_) lookup_.emplace(name_of(ref), ref);

  for (auto& s : stocks_) {
    s.inflows.clear();
    s.outflows.clear();
  }
  for (const auto& f : flows_) {
    for (auto& s : stocks_) {
      if (f.target && *f.target == s.name) s.inflows.push_back(f.name);
      if (f.source && *f.source == s.name) s.outflows.push_back(f.name);
    }
  }
}

std::optional<VariableRef> ModelDefinition::find(std::string_view name) const {
  auto it = lookup_.find(name);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<VariableKind> ModelDefinition::kind_of(std::string_view name) const {
  auto ref = find(name);
  if (!ref) return std::nullopt;
  return ref->kind;
}

const std::string& ModelDefinition::name_of(VariableRef ref) const {
  switch (ref.kind) {
    case VariableKind::Stock: return stocks_.at(ref.index).name;
    case VariableKind::Flow: return flows_.at(ref.index).name;
    case VariableKind::Auxiliary: return auxiliaries_.at(ref.index).name;
    case VariableKind::Parameter: return parameters_.at(ref.index).name;
  }
  throw std::logic_error("bad variable kind");
}

const std::optional<Unit>& ModelDefinition::units_of(VariableRef ref) const {
  switch (ref.kind) {
    case VariableKind::Stock: return stocks_.at(ref.index).units;
    case VariableKind::Flow: return flows_.at(ref.index).units;
    case VariableKind::Auxiliary: return auxiliaries_.at(ref.index).units;
    case VariableKind::Parameter: return parameters_.at(ref.index).units;
  }
  throw std::logic_error("bad variable kind");
}

const ParameterDef* ModelDefinition::parameter(std::string_view name) const {
  auto ref = find(name);
  return ref && ref->kind == VariableKind::Parameter ? &parameters_[ref->index] : nullptr;
}

const AuxiliaryDef* ModelDefinition::auxiliary(std::string_view name) const {
  auto ref = find(name);
  return ref && ref->kind == VariableKind::Auxiliary ? &auxiliaries_[ref->index] : nullptr;
}

const FlowDef* ModelDefinition::flow(std::string_view name) const {
  auto ref = find(name);
  return ref && ref->kind == VariableKind::Flow ? &flows_[ref->index] : nullptr;
}

const StockDef* ModelDefinition::stock(std::string_view name) const {
  auto ref = find(name);
  return ref && ref->kind == VariableKind::Stock ? &stocks_[ref->index] : nullptr;
}

ModelDefinition ModelDefinition::with_parameter_value(std::string_view name, double value) const {
  auto ref = find(name);
  if (!ref || ref->kind != VariableKind::Parameter)
    throw std::invalid_argument("'" + std::string(name) + "' is not a parameter");
  ModelDefinition copy = *this;
  copy.parameters_[ref->index].value = value;
  return copy;
}

std::vector<Equation> ModelDefinition::equations() const {
  std::vector<Equation> out;
  out.reserve(auxiliaries_.size() + flows_.size());
  for (const auto& a : auxiliaries_) out.push_back({a.name, a.expr});
  for (const auto& f : flows_) out.push_back({f.name, f.rate});
  return out;
}

bool operator==(const ModelDefinition& a, const ModelDefinition& b) {
  return a.name_ == b.name_ && a.parameters_ == b.parameters_ &&
         a.auxiliaries_ == b.auxiliaries_ && a.flows_ == b.flows_ && a.stocks_ == b.stocks_;
}

ModelBuilder& ModelBuilder::set_name(std::string name) {
  model_.name_ = std::move(name);
  return *this;
}

ModelBuilder& ModelBuilder::add(ParameterDef def) {
  model_.declarations_.push_back({VariableKind::Parameter, model_.parameters_.size()});
  model_.parameters_.push_back(std::move(def));
  return *this;
}

ModelBuilder& ModelBuilder::add(AuxiliaryDef def) {
  model_.declarations_.push_back({VariableKind::Auxiliary, model_.auxiliaries_.size()});
  model_.auxiliaries_.push_back(std::move(def));
  return *this;
}

ModelBuilder& ModelBuilder::add(FlowDef def) {
  model_.declarations_.push_back({VariableKind::Flow, model_.flows_.size()});
  model_.flows_.push_back(std::move(def));
  return *this;
}

ModelBuilder& ModelBuilder::add(StockDef def) {
  model_.declarations_.push_back({VariableKind::Stock, model_.stocks_.size()});
  model_.stocks_.push_back(std::move(def));
  return *this;
}

ModelDefinition ModelBuilder::build() && {
  model_.index();
  return std::move(model_);
}

}  // namespace sdkit
