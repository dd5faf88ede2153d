#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdkit/model.hpp"
#include "sdkit/scenario.hpp"
#include "sdkit/sim_config.hpp"
#include "sdkit/time_series.hpp"

namespace sdkit {

class Simulator;

/// Stock values at one instant plus every derived value at that instant.
/// Only a Simulator creates or advances states, so the cache is never stale.
class SimulationState {
 public:
  double time() const { return time_; }
  /// All variable values, indexed by Simulator::slot_of.
  std::span<const double> values() const { return values_; }

 private:
  friend class Simulator;
  double time_ = 0.0;
  std::vector<double> values_;
};

struct RunStats {
  std::size_t steps = 0;
  /// Number of times a nonneg stock was clamped at zero after a step.
  std::size_t clamp_events = 0;
};

struct SimulationRun {
  TimeSeriesTable table;
  RunStats stats;
};

/// A model compiled for integration under a fixed set of overrides.
/// Immutable and shareable; every call works on caller-owned state.
class Simulator {
 public:
  /// Throws ValidationError if the model or overrides are not runnable.
  explicit Simulator(ModelDefinition model, std::vector<Override> overrides = {});
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  const ModelDefinition& model() const;

  /// Stocks at their initial values (evaluated from baseline parameters).
  SimulationState initial_state(double t) const;
  /// A state with explicit stock values; unspecified stocks take initial values.
  /// Throws std::invalid_argument for names that are not stocks.
  SimulationState make_state(double t, const std::map<std::string, double>& stocks) const;

  /// One fixed step. Rates use the pre-step state only; all stocks advance
  /// together and nonneg stocks are clamped afterwards. Throws NumericalError.
  SimulationState step(const SimulationState& state, double dt, Method method) const;

  /// Every auxiliary, flow and overridden parameter at `state`, by name.
  std::map<std::string, double> rate_vector(const SimulationState& state) const;
  /// Net rate of change of each stock, in stock declaration order.
  std::vector<double> derivatives(const SimulationState& state) const;

  double value(const SimulationState& state, std::string_view name) const;
  std::size_t slot_of(std::string_view name) const;

  /// Records all stocks then `outputs` (non-stock names, in order) at t=start,
  /// every `record_every` steps and at end_time.
  SimulationRun run(const SimConfig& config, std::span<const std::string> outputs = {}) const;

 private:
  struct Impl;
  SimulationState advance(const SimulationState& state, double dt, double new_time, Method method,
                          std::size_t* clamps) const;

  std::unique_ptr<Impl> impl_;
};

// Per-operation entry points.
SimulationState step(const ModelDefinition& model, const SimulationState& state, double dt, Method method);
std::map<std::string, double> rate_vector(const ModelDefinition& model, const SimulationState& state);
TimeSeriesTable run(const ModelDefinition& model, const Scenario& scenario);

}  // namespace sdkit
