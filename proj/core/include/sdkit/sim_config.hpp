#pragma once

#include <cstddef>

namespace sdkit {

enum class Method { Euler, RK4 };

const char* to_string(Method m);

/// Fixed-step integration settings. Times are in years.
struct SimConfig {
  double start_time = 0.0;
  double end_time = 20.0;
  double dt = 1.0 / 12.0;
  Method method = Method::Euler;
  int record_every = 1;

  /// Throws ValidationError unless end > start, dt > 0, record_every >= 1 and
  /// the horizon is an integral number of steps (to within 1e-9).
  void validate() const;
  std::size_t step_count() const;
  /// Exact grid time of step k: start + k * span / N.
  double time_at(std::size_t k) const;
};

}  // namespace sdkit
