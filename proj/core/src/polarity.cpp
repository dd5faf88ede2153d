#include <algorithm>
#include <cmath>
#include <limits>

#include "sdkit/loops.hpp"
#include "sdkit/validate.hpp"

namespace sdkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Interval full() { return {-kInf, kInf}; }
Interval point(double v) { return {v, v}; }

// Endpoint arithmetic without outward rounding: only signs are consumed.
Interval sanitize(Interval i) {
  if (std::isnan(i.lo)) i.lo = -kInf;
  if (std::isnan(i.hi)) i.hi = kInf;
  return i;
}

double mul_endpoint(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

Interval add(Interval a, Interval b) { return sanitize({a.lo + b.lo, a.hi + b.hi}); }
Interval neg(Interval a) { return {-a.hi, -a.lo}; }

Interval mul(Interval a, Interval b) {
  double c[] = {mul_endpoint(a.lo, b.lo), mul_endpoint(a.lo, b.hi), mul_endpoint(a.hi, b.lo),
                mul_endpoint(a.hi, b.hi)};
  return {*std::min_element(std::begin(c), std::end(c)), *std::max_element(std::begin(c), std::end(c))};
}

bool strictly_signed(Interval i) { return i.lo > 0.0 || i.hi < 0.0; }

Interval reciprocal(Interval b) {
  if (!strictly_signed(b)) return full();
  return {1.0 / b.hi, 1.0 / b.lo};
}

Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

Interval power(Interval base, Interval exponent) {
  if (exponent.lo == exponent.hi) {
    double p = exponent.lo;
    if (p == 0.0) return point(1.0);
    if (base.lo >= 0.0) {
      Interval r = p > 0 ? Interval{std::pow(base.lo, p), std::pow(base.hi, p)}
                         : (base.lo > 0.0 ? Interval{std::pow(base.hi, p), std::pow(base.lo, p)} : Interval{0.0, kInf});
      return sanitize(r);
    }
    return full();
  }
  if (base.lo == base.hi && base.lo > 0.0) {
    double a = std::pow(base.lo, exponent.lo), b = std::pow(base.lo, exponent.hi);
    return sanitize({std::min(a, b), std::max(a, b)});
  }
  return full();
}

enum class Mono { None, Inc, Dec, Unknown };

Mono flip(Mono m) {
  if (m == Mono::Inc) return Mono::Dec;
  if (m == Mono::Dec) return Mono::Inc;
  return m;
}

Mono combine(Mono a, Mono b) {
  if (a == Mono::None) return b;
  if (b == Mono::None) return a;
  return a == b ? a : Mono::Unknown;
}

struct Analysis {
  Interval range;
  Mono mono;
};

class PolarityAnalyzer {
 public:
  PolarityAnalyzer(const std::map<std::string, Interval>& bounds, const std::string& variable,
                   const PolarityOptions& options)
      : bounds_(bounds), variable_(variable), options_(options) {}

  Analysis analyze(const Expr& e) const {
    switch (e.kind()) {
      case Expr::Kind::Number: return {point(e.number_value()), Mono::None};
      case Expr::Kind::Time: return {full(), Mono::None};
      case Expr::Kind::Variable: {
        auto it = bounds_.find(e.name());
        Interval r = it == bounds_.end() ? full() : it->second;
        return {r, e.name() == variable_ ? Mono::Inc : Mono::None};
      }
      case Expr::Kind::Negate: {
        Analysis a = analyze(e.operands()[0]);
        return {neg(a.range), flip(a.mono)};
      }
      case Expr::Kind::Binary: {
        Analysis a = analyze(e.operands()[0]);
        Analysis b = analyze(e.operands()[1]);
        switch (e.binary_op()) {
          case BinaryOp::Add: return {add(a.range, b.range), combine(a.mono, b.mono)};
          case BinaryOp::Sub: return {add(a.range, neg(b.range)), combine(a.mono, flip(b.mono))};
          case BinaryOp::Mul: return product(a, b);
          case BinaryOp::Div: {
            Mono inv = b.mono;
            if (inv != Mono::None) {
              if (strictly_signed(b.range) || options_.assume_positive_when_undetermined) inv = flip(inv);
              else inv = Mono::Unknown;
            }
            return product(a, {reciprocal(b.range), inv});
          }
          case BinaryOp::Pow: return pow(a, b);
        }
        break;
      }
      case Expr::Kind::Call: {
        std::vector<Analysis> args;
        for (const auto& a : e.operands()) args.push_back(analyze(a));
        switch (e.builtin()) {
          case Builtin::Exp:
            return {sanitize({std::exp(args[0].range.lo), std::exp(args[0].range.hi)}), args[0].mono};
          case Builtin::Abs: {
            Interval r = args[0].range;
            if (r.lo >= 0.0) return {r, args[0].mono};
            if (r.hi <= 0.0) return {neg(r), flip(args[0].mono)};
            Interval out{0.0, std::max(-r.lo, r.hi)};
            return {out, options_.assume_positive_when_undetermined ? args[0].mono
                                                                    : (args[0].mono == Mono::None ? Mono::None : Mono::Unknown)};
          }
          case Builtin::Min:
          case Builtin::Max: {
            bool is_min = e.builtin() == Builtin::Min;
            Analysis acc = args[0];
            for (std::size_t i = 1; i < args.size(); ++i) {
              acc.range = is_min ? Interval{std::min(acc.range.lo, args[i].range.lo), std::min(acc.range.hi, args[i].range.hi)}
                                 : Interval{std::max(acc.range.lo, args[i].range.lo), std::max(acc.range.hi, args[i].range.hi)};
              acc.mono = combine(acc.mono, args[i].mono);
            }
            return acc;
          }
        }
        break;
      }
      case Expr::Kind::Conditional: {
        auto ops = e.operands();
        Analysis lhs = analyze(ops[0]);
        Analysis rhs = analyze(ops[1]);
        Analysis a = analyze(ops[2]);
        Analysis b = analyze(ops[3]);
        Mono m = combine(a.mono, b.mono);
        // A switch driven by the variable itself can jump either way.
        if (lhs.mono != Mono::None || rhs.mono != Mono::None) m = Mono::Unknown;
        return {hull(a.range, b.range), m};
      }
    }
    return {full(), Mono::Unknown};
  }

 private:
  // Mono of a scaled by the sign of `by`.
  Mono scale(Mono m, Interval by) const {
    if (m == Mono::None) return m;
    if (by.lo >= 0.0) return m;
    if (by.hi <= 0.0) return flip(m);
    return options_.assume_positive_when_undetermined ? m : Mono::Unknown;
  }

  Analysis product(const Analysis& a, const Analysis& b) const {
    return {mul(a.range, b.range), combine(scale(a.mono, b.range), scale(b.mono, a.range))};
  }

  Analysis pow(const Analysis& base, const Analysis& exponent) const {
    Interval range = power(base.range, exponent.range);
    if (base.mono == Mono::None && exponent.mono == Mono::None) return {range, Mono::None};
    if (exponent.mono == Mono::None && exponent.range.lo == exponent.range.hi) {
      double p = exponent.range.lo;
      if (p == 0.0) return {range, Mono::None};
      bool base_nonneg = base.range.lo >= 0.0;
      bool odd = std::trunc(p) == p && std::fmod(std::fabs(p), 2.0) == 1.0;
      if (base_nonneg || odd || options_.assume_positive_when_undetermined)
        return {range, p > 0 ? base.mono : flip(base.mono)};
      return {range, Mono::Unknown};
    }
    if (base.mono == Mono::None && base.range.lo == base.range.hi && base.range.lo > 0.0) {
      if (base.range.lo > 1.0) return {range, exponent.mono};
      if (base.range.lo < 1.0) return {range, flip(exponent.mono)};
      return {range, Mono::None};
    }
    return {range, Mono::Unknown};
  }

  const std::map<std::string, Interval>& bounds_;
  const std::string& variable_;
  const PolarityOptions& options_;
};

Polarity to_polarity(Mono m) {
  switch (m) {
    case Mono::Inc: return Polarity::Positive;
    case Mono::Dec: return Polarity::Negative;
    default: return Polarity::Unknown;
  }
}

}  // namespace

Polarity expression_polarity(const Expr& expr, const std::string& variable,
                             const std::map<std::string, Interval>& bounds, const PolarityOptions& options) {
  return to_polarity(PolarityAnalyzer(bounds, variable, options).analyze(expr).mono);
}

CausalGraph graph_from_model(const ModelDefinition& model, std::span<const Override> overrides, double t,
                             const PolarityOptions& options) {
  EffectiveEquations eff = apply_overrides(model, overrides, t);

  std::map<std::string, Interval> bounds;
  for (const auto& p : model.parameters()) bounds[p.name] = point(p.value);
  for (const auto& s : model.stocks()) bounds[s.name] = s.non_negative ? Interval{0.0, kInf} : full();
  for (const auto& name : eff.overridden) bounds.erase(name);
  static const std::string kNoVariable;
  for (std::size_t idx : order_equations(eff.equations).order) {
    const auto& eq = eff.equations[idx];
    bounds[eq.name] = PolarityAnalyzer(bounds, kNoVariable, options).analyze(eq.expr).range;
  }

  CausalGraph graph;
  for (const auto& ref : model.declarations()) graph.add_node(model.name_of(ref));
  for (const auto& eq : eff.equations) {
    for (const auto& dep : referenced_names(eq.expr))
      graph.add_edge({dep, eq.name, expression_polarity(eq.expr, dep, bounds, options), false});
  }
  for (const auto& s : model.stocks()) {
    for (const auto& f : s.inflows) graph.add_edge({f, s.name, Polarity::Positive, false});
    for (const auto& f : s.outflows) graph.add_edge({f, s.name, Polarity::Negative, false});
  }
  return graph;
}

CausalGraph graph_from_model(const ModelDefinition& model, const Scenario& scenario, double t,
                             const PolarityOptions& options) {
  return graph_from_model(model, scenario.overrides, t, options);
}

}  // namespace sdkit
