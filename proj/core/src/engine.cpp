#include "sdkit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "sdkit/errors.hpp"
#include "sdkit/validate.hpp"

namespace sdkit {

const char* to_string(Method m) { return m == Method::Euler ? "euler" : "rk4"; }

void SimConfig::validate() const {
  if (!std::isfinite(start_time) || !std::isfinite(end_time) || !(end_time > start_time))
    throw ValidationError("end time must be greater than start time");
  if (!std::isfinite(dt) || !(dt > 0.0)) throw ValidationError("dt must be positive");
  if (record_every < 1) throw ValidationError("record_every must be at least 1");
  double steps = (end_time - start_time) / dt;
  if (std::fabs(steps - std::round(steps)) > 1e-9)
    throw ValidationError("horizon " + std::to_string(end_time - start_time) +
                          " is not a whole number of steps of " + std::to_string(dt));
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::llround((end_time - start_time) / dt));
}

double SimConfig::time_at(std::size_t k) const {
  std::size_t n = step_count();
  if (k == n) return end_time;
  return start_time + (static_cast<double>(k) * (end_time - start_time)) / static_cast<double>(n);
}

namespace {

struct Instr {
  enum class Op { Const, Load, Time, Neg, Binary, Call, Compare, JumpIfFalse, Jump } op;
  double value = 0.0;
  std::size_t arg = 0;  // slot, jump target, argument count or enum value
  int sub = 0;          // BinaryOp / Builtin / Comparator
};

using Program = std::vector<Instr>;

void compile(const Expr& e, const std::map<std::string, std::size_t, std::less<>>& slots, Program& code) {
  switch (e.kind()) {
    case Expr::Kind::Number: code.push_back({Instr::Op::Const, e.number_value()}); return;
    case Expr::Kind::Time: code.push_back({Instr::Op::Time}); return;
    case Expr::Kind::Variable: code.push_back({Instr::Op::Load, 0.0, slots.at(e.name())}); return;
    case Expr::Kind::Negate:
      compile(e.operands()[0], slots, code);
      code.push_back({Instr::Op::Neg});
      return;
    case Expr::Kind::Binary:
      compile(e.operands()[0], slots, code);
      compile(e.operands()[1], slots, code);
      code.push_back({Instr::Op::Binary, 0.0, 0, static_cast<int>(e.binary_op())});
      return;
    case Expr::Kind::Call:
      for (const auto& a : e.operands()) compile(a, slots, code);
      code.push_back({Instr::Op::Call, 0.0, e.operands().size(), static_cast<int>(e.builtin())});
      return;
    case Expr::Kind::Conditional: {
      auto ops = e.operands();
      compile(ops[0], slots, code);
      compile(ops[1], slots, code);
      code.push_back({Instr::Op::Compare, 0.0, 0, static_cast<int>(e.comparator())});
      std::size_t branch = code.size();
      code.push_back({Instr::Op::JumpIfFalse});
      compile(ops[2], slots, code);
      std::size_t skip = code.size();
      code.push_back({Instr::Op::Jump});
      code[branch].arg = code.size();
      compile(ops[3], slots, code);
      code[skip].arg = code.size();
      return;
    }
  }
}

// Mirrors sdkit::evaluate operation for operation.
double execute(const Program& code, std::span<const double> values, double t, std::vector<double>& stack) {
  stack.clear();
  std::size_t pc = 0;
  while (pc < code.size()) {
    const Instr& in = code[pc++];
    switch (in.op) {
      case Instr::Op::Const: stack.push_back(in.value); break;
      case Instr::Op::Time: stack.push_back(t); break;
      case Instr::Op::Load: stack.push_back(values[in.arg]); break;
      case Instr::Op::Neg: stack.back() = -stack.back(); break;
      case Instr::Op::Binary: {
        double rhs = stack.back();
        stack.pop_back();
        stack.back() = apply_binary(static_cast<BinaryOp>(in.sub), stack.back(), rhs);
        break;
      }
      case Instr::Op::Call: {
        std::size_t first = stack.size() - in.arg;
        double r = apply_builtin(static_cast<Builtin>(in.sub),
                                 std::span<const double>(stack.data() + first, in.arg));
        stack.resize(first);
        stack.push_back(r);
        break;
      }
      case Instr::Op::Compare: {
        double rhs = stack.back();
        stack.pop_back();
        stack.back() = compare(static_cast<Comparator>(in.sub), stack.back(), rhs) ? 1.0 : 0.0;
        break;
      }
      case Instr::Op::JumpIfFalse: {
        double cond = stack.back();
        stack.pop_back();
        if (cond == 0.0) pc = in.arg;
        break;
      }
      case Instr::Op::Jump: pc = in.arg; break;
    }
  }
  return stack.back();
}

struct CompiledEquation {
  std::string name;
  std::size_t slot;
  Program program;
};

struct Phase {
  double from;
  std::vector<CompiledEquation> equations;  // evaluation order
};

}  // namespace

struct Simulator::Impl {
  explicit Impl(ModelDefinition m) : model(std::move(m)) {}

  ModelDefinition model;
  std::vector<Override> overrides;
  std::map<std::string, std::size_t, std::less<>> slots;
  std::vector<std::string> slot_names;
  std::vector<std::size_t> param_slots;
  std::vector<double> param_values;
  std::vector<std::size_t> stock_slots;
  std::vector<std::vector<std::size_t>> inflow_slots;
  std::vector<std::vector<std::size_t>> outflow_slots;
  std::vector<bool> non_negative;
  std::vector<std::size_t> computed_slots;  // aux and flow slots
  std::vector<Phase> phases;

  const Phase& phase_at(double t) const {
    auto it = std::upper_bound(phases.begin(), phases.end(), t,
                               [](double value, const Phase& p) { return value < p.from; });
    return *(it - 1);
  }

  // Recomputes every derived slot from stock slots and `t`.
  void refresh(std::vector<double>& values, double t) const {
    for (std::size_t i = 0; i < param_slots.size(); ++i) values[param_slots[i]] = param_values[i];
    std::vector<double> stack;
    stack.reserve(32);
    for (const auto& eq : phase_at(t).equations) {
      double v;
      try {
        v = execute(eq.program, values, t, stack);
      } catch (const EvalError& e) {
        throw NumericalError(t, eq.name, e.what());
      }
      if (!std::isfinite(v)) throw NumericalError(t, eq.name, "evaluated to " + format_number(v));
      values[eq.slot] = v;
    }
  }

  void derivatives(std::span<const double> values, std::vector<double>& out) const {
    out.resize(stock_slots.size());
    for (std::size_t i = 0; i < stock_slots.size(); ++i) {
      double in = 0.0;
      double outflow = 0.0;
      for (std::size_t s : inflow_slots[i]) in += values[s];
      for (std::size_t s : outflow_slots[i]) outflow += values[s];
      out[i] = in - outflow;
    }
  }
};

Simulator::Simulator(ModelDefinition model, std::vector<Override> overrides) {
  auto report = validate_model(model);
  if (!report.ok()) {
    std::string msg = "model '" + model.name() + "' is not runnable:";
    for (const auto& v : report.violations) msg += "\n  " + v.message;
    throw ValidationError(msg);
  }
  validate_overrides(model, overrides);

  impl_ = std::make_unique<Impl>(std::move(model));
  Impl& im = *impl_;
  im.overrides = std::move(overrides);
  const auto& m = im.model;
  auto add_slot = [&](const std::string& name) {
    im.slots.emplace(name, im.slot_names.size());
    im.slot_names.push_back(name);
    return im.slot_names.size() - 1;
  };
  for (const auto& p : m.parameters()) {
    im.param_slots.push_back(add_slot(p.name));
    im.param_values.push_back(p.value);
  }
  for (const auto& s : m.stocks()) {
    im.stock_slots.push_back(add_slot(s.name));
    im.non_negative.push_back(s.non_negative);
  }
  for (const auto& a : m.auxiliaries()) im.computed_slots.push_back(add_slot(a.name));
  for (const auto& f : m.flows()) im.computed_slots.push_back(add_slot(f.name));
  for (const auto& s : m.stocks()) {
    std::vector<std::size_t> in, out;
    for (const auto& f : s.inflows) in.push_back(im.slots.at(f));
    for (const auto& f : s.outflows) out.push_back(im.slots.at(f));
    im.inflow_slots.push_back(std::move(in));
    im.outflow_slots.push_back(std::move(out));
  }

  std::set<double> switches;
  for (const auto& o : im.overrides) switches.insert(o.active_from);
  std::vector<double> starts{-std::numeric_limits<double>::infinity()};
  starts.insert(starts.end(), switches.begin(), switches.end());
  for (double from : starts) {
    auto eff = apply_overrides(m, im.overrides, from);
    auto order = order_equations(eff.equations);
    Phase phase{from, {}};
    for (std::size_t idx : order.order) {
      const auto& eq = eff.equations[idx];
      CompiledEquation ce{eq.name, im.slots.at(eq.name), {}};
      compile(eq.expr, im.slots, ce.program);
      phase.equations.push_back(std::move(ce));
    }
    im.phases.push_back(std::move(phase));
  }
}

Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const ModelDefinition& Simulator::model() const { return impl_->model; }

std::size_t Simulator::slot_of(std::string_view name) const {
  auto it = impl_->slots.find(name);
  if (it == impl_->slots.end()) throw std::invalid_argument("unknown variable '" + std::string(name) + "'");
  return it->second;
}

double Simulator::value(const SimulationState& state, std::string_view name) const {
  return state.values_.at(slot_of(name));
}

SimulationState Simulator::initial_state(double t) const {
  return make_state(t, {});
}

SimulationState Simulator::make_state(double t, const std::map<std::string, double>& stocks) const {
  const Impl& im = *impl_;
  SimulationState state;
  state.time_ = t;
  state.values_.assign(im.slot_names.size(), 0.0);
  Environment params;
  for (const auto& p : im.model.parameters()) params.emplace(p.name, p.value);
  const auto& defs = im.model.stocks();
  for (std::size_t i = 0; i < defs.size(); ++i) {
    double v;
    try {
      v = evaluate(defs[i].initial, params, t);
    } catch (const EvalError& e) {
      throw NumericalError(t, defs[i].name, e.what());
    }
    if (!std::isfinite(v)) throw NumericalError(t, defs[i].name, "initial value is " + format_number(v));
    state.values_[im.stock_slots[i]] = v;
  }
  for (const auto& [name, v] : stocks) {
    if (!im.model.stock(name)) throw std::invalid_argument("'" + name + "' is not a stock");
    state.values_[im.slots.at(name)] = v;
  }
  im.refresh(state.values_, t);
  return state;
}

SimulationState Simulator::advance(const SimulationState& state, double dt, double new_time, Method method,
                                   std::size_t* clamps) const {
  const Impl& im = *impl_;
  const std::size_t n = im.stock_slots.size();
  SimulationState next = state;
  std::vector<double> k1;
  im.derivatives(state.values_, k1);

  if (method == Method::Euler) {
    for (std::size_t i = 0; i < n; ++i) next.values_[im.stock_slots[i]] += dt * k1[i];
  } else {
    std::vector<double> k2, k3, k4;
    std::vector<double> scratch = state.values_;
    const double half = dt / 2.0;
    const double t_mid = state.time_ + half;
    auto stage = [&](const std::vector<double>& k, double h, double t, std::vector<double>& out) {
      for (std::size_t i = 0; i < n; ++i)
        scratch[im.stock_slots[i]] = state.values_[im.stock_slots[i]] + h * k[i];
      im.refresh(scratch, t);
      im.derivatives(scratch, out);
    };
    stage(k1, half, t_mid, k2);
    stage(k2, half, t_mid, k3);
    stage(k3, dt, new_time, k4);
    for (std::size_t i = 0; i < n; ++i)
      next.values_[im.stock_slots[i]] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  for (std::size_t i = 0; i < n; ++i) {
    double& v = next.values_[im.stock_slots[i]];
    if (!std::isfinite(v))
      throw NumericalError(new_time, im.slot_names[im.stock_slots[i]], "stock became " + format_number(v));
    if (im.non_negative[i] && v < 0.0) {
      v = 0.0;
      if (clamps) ++*clamps;
    }
  }
  next.time_ = new_time;
  im.refresh(next.values_, new_time);
  return next;
}

SimulationState Simulator::step(const SimulationState& state, double dt, Method method) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  return advance(state, dt, state.time_ + dt, method, nullptr);
}

std::map<std::string, double> Simulator::rate_vector(const SimulationState& state) const {
  const Impl& im = *impl_;
  std::map<std::string, double> out;
  for (const auto& eq : im.phase_at(state.time_).equations) out.emplace(eq.name, state.values_[eq.slot]);
  return out;
}

std::vector<double> Simulator::derivatives(const SimulationState& state) const {
  std::vector<double> out;
  impl_->derivatives(state.values_, out);
  return out;
}

SimulationRun Simulator::run(const SimConfig& config, std::span<const std::string> outputs) const {
  config.validate();
  const Impl& im = *impl_;
  std::vector<std::string> columns;
  std::vector<std::size_t> column_slots;
  for (const auto& s : im.model.stocks()) {
    columns.push_back(s.name);
    column_slots.push_back(im.slots.at(s.name));
  }
  for (const auto& name : outputs) {
    if (std::find(columns.begin(), columns.end(), name) != columns.end()) continue;
    column_slots.push_back(slot_of(name));
    columns.push_back(name);
  }

  SimulationRun result{TimeSeriesTable(columns), {}};
  std::vector<double> row(columns.size());
  auto record = [&](const SimulationState& s) {
    for (std::size_t i = 0; i < column_slots.size(); ++i) row[i] = s.values_[column_slots[i]];
    result.table.add_row(s.time_, row);
  };

  const std::size_t n = config.step_count();
  SimulationState state = initial_state(config.start_time);
  record(state);
  for (std::size_t k = 1; k <= n; ++k) {
    double t_next = config.time_at(k);
    state = advance(state, config.dt, t_next, config.method, &result.stats.clamp_events);
    if (k % static_cast<std::size_t>(config.record_every) == 0 || k == n) record(state);
  }
  result.stats.steps = n;
  return result;
}

SimulationState step(const ModelDefinition& model, const SimulationState& state, double dt, Method method) {
  return Simulator(model).step(state, dt, method);
}

std::map<std::string, double> rate_vector(const ModelDefinition& model, const SimulationState& state) {
  return Simulator(model).rate_vector(state);
}

TimeSeriesTable run(const ModelDefinition& model, const Scenario& scenario) {
  validate_scenario(model, scenario);
  return Simulator(model, scenario.overrides).run(scenario.config, scenario.outputs).table;
}

}  // namespace sdkit
