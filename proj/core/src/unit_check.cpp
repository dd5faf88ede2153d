#include <optional>

#include "sdkit/validate.hpp"

namespace sdkit {

namespace {

// Inferred unit of a subexpression. Free values (literals) take on the unit
// their context requires; Unknown silences further checks.
struct Inferred {
  enum class State { Free, Known, Unknown } state = State::Unknown;
  Unit unit;

  static Inferred free() { return {State::Free, {}}; }
  static Inferred known(Unit u) { return {State::Known, std::move(u)}; }
  static Inferred unknown() { return {}; }
};

class UnitInference {
 public:
  UnitInference(const ModelDefinition& model, std::string owner, UnitReport& report)
      : model_(model), owner_(std::move(owner)), report_(report) {}

  Inferred infer(const Expr& e) {
    switch (e.kind()) {
      case Expr::Kind::Number: return Inferred::free();
      case Expr::Kind::Time: return Inferred::known(Unit::atom(kTimeUnit));
      case Expr::Kind::Variable: {
        auto ref = model_.find(e.name());
        if (!ref) return Inferred::unknown();
        const auto& units = model_.units_of(*ref);
        return units ? Inferred::known(*units) : Inferred::unknown();
      }
      case Expr::Kind::Negate: return infer(e.operands()[0]);
      case Expr::Kind::Binary: {
        Inferred lhs = infer(e.operands()[0]);
        Inferred rhs = infer(e.operands()[1]);
        switch (e.binary_op()) {
          case BinaryOp::Add:
          case BinaryOp::Sub: return join(lhs, rhs, e);
          case BinaryOp::Mul: return product(lhs, rhs, false);
          case BinaryOp::Div: return product(lhs, rhs, true);
          case BinaryOp::Pow: return power(lhs, e.operands()[1]);
        }
        return Inferred::unknown();
      }
      case Expr::Kind::Call: {
        if (e.builtin() == Builtin::Exp) {
          infer(e.operands()[0]);
          return Inferred::known(Unit::dimensionless());
        }
        Inferred acc = infer(e.operands()[0]);
        for (const auto& a : e.operands().subspan(1)) acc = join(acc, infer(a), e);
        return acc;
      }
      case Expr::Kind::Conditional: {
        auto ops = e.operands();
        join(infer(ops[0]), infer(ops[1]), e);
        return join(infer(ops[2]), infer(ops[3]), e);
      }
    }
    return Inferred::unknown();
  }

 private:
  Inferred join(const Inferred& a, const Inferred& b, const Expr& site) {
    using S = Inferred::State;
    if (a.state == S::Unknown || b.state == S::Unknown) return Inferred::unknown();
    if (a.state == S::Free) return b;
    if (b.state == S::Free) return a;
    if (!(a.unit == b.unit)) {
      report_.issues.push_back(
          {UnitIssueKind::OperandMismatch, owner_,
           "in " + owner_ + ": operands of '" + format_expr(site) + "' have units " +
               a.unit.to_string() + " and " + b.unit.to_string()});
      return Inferred::unknown();
    }
    return a;
  }

  static Inferred product(const Inferred& a, const Inferred& b, bool divide) {
    using S = Inferred::State;
    if (a.state == S::Unknown || b.state == S::Unknown) return Inferred::unknown();
    if (a.state == S::Free && b.state == S::Free) return Inferred::free();
    Unit lhs = a.state == S::Known ? a.unit : Unit{};
    Unit rhs = b.state == S::Known ? b.unit : Unit{};
    return Inferred::known(divide ? lhs / rhs : lhs * rhs);
  }

  static Inferred power(const Inferred& base, const Expr& exponent) {
    using S = Inferred::State;
    if (base.state != S::Known) return base;
    if (base.unit.is_dimensionless()) return base;
    if (exponent.kind() == Expr::Kind::Number) {
      double v = exponent.number_value();
      int iv = static_cast<int>(v);
      if (static_cast<double>(iv) == v) return Inferred::known(base.unit.pow(iv));
    }
    return Inferred::unknown();
  }

  const ModelDefinition& model_;
  std::string owner_;
  UnitReport& report_;
};

void check_definition(const ModelDefinition& model, const std::string& name, const Expr& expr,
                      const std::optional<Unit>& declared, UnitReport& report) {
  UnitInference inference(model, name, report);
  Inferred got = inference.infer(expr);
  if (!declared || got.state != Inferred::State::Known) return;
  if (!(got.unit == *declared))
    report.issues.push_back({UnitIssueKind::DefinitionMismatch, name,
                             name + " is declared " + declared->to_string() +
                                 " but its equation has units " + got.unit.to_string()});
}

}  // namespace

UnitReport check_units(const ModelDefinition& model) {
  UnitReport report;
  for (const auto& ref : model.declarations())
    if (!model.units_of(ref)) report.unchecked.push_back(model.name_of(ref));

  for (const auto& a : model.auxiliaries()) check_definition(model, a.name, a.expr, a.units, report);
  for (const auto& f : model.flows()) check_definition(model, f.name, f.rate, f.units, report);
  for (const auto& s : model.stocks()) check_definition(model, s.name, s.initial, s.units, report);

  const Unit per_time = Unit::atom(kTimeUnit).inverse();
  for (const auto& s : model.stocks()) {
    if (!s.units) continue;
    Unit expected = *s.units * per_time;
    auto check_flow = [&](const std::string& flow_name) {
      const FlowDef* f = model.flow(flow_name);
      if (!f || !f->units) return;
      if (!(*f->units == expected))
        report.issues.push_back({UnitIssueKind::FlowStockMismatch, f->name,
                                 "flow " + f->name + " has units " + f->units->to_string() +
                                     " but stock " + s.name + " needs " + expected.to_string()});
    };
    for (const auto& f : s.inflows) check_flow(f);
    for (const auto& f : s.outflows) check_flow(f);
  }
  return report;
}

}  // namespace sdkit
