#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdkit/model.hpp"

namespace sdkit {

enum class ViolationKind {
  DuplicateName,
  ReservedName,
  UnknownReference,
  UnknownStock,
  InvalidEndpoints,
  InitialDependency,
  NonFiniteParameter,
  BadArity,
  AuxiliaryCycle,
};

struct Violation {
  ViolationKind kind;
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// Structural checks. An empty report means the model can be simulated.
ValidationReport validate_model(const ModelDefinition& model);

/// Evaluation order for a set of equations. References to names outside the
/// set are treated as sources. When the set is cyclic, `order` holds only the
/// equations that could be ordered and `cycles` lists one closed path per
/// strongly connected component, e.g. {a, b, a}.
struct EquationOrder {
  std::vector<std::size_t> order;
  std::vector<std::vector<std::string>> cycles;

  bool acyclic() const { return cycles.empty(); }
};

EquationOrder order_equations(std::span<const Equation> equations);

/// `a→b→a`
std::string format_cycle(const std::vector<std::string>& cycle);

// -- units -------------------------------------------------------------------

inline constexpr const char* kTimeUnit = "year";

enum class UnitIssueKind { FlowStockMismatch, OperandMismatch, DefinitionMismatch };

struct UnitIssue {
  UnitIssueKind kind;
  std::string variable;
  std::string message;
};

struct UnitReport {
  std::vector<UnitIssue> issues;
  /// Variables without declared units; nothing involving them is checked.
  std::vector<std::string> unchecked;

  bool consistent() const { return issues.empty(); }
};

/// Advisory dimensional analysis. Literals adopt whatever unit their context
/// demands; undeclared units make dependent checks silent.
UnitReport check_units(const ModelDefinition& model);

}  // namespace sdkit
