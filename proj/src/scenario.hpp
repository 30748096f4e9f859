#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plant.hpp"

namespace fcmpc {

// Closed-loop test scenario: a piecewise-linear workload current profile
// plus the reference, noise levels and seed for the run. Load steps are
// encoded as one-control-interval ramps so knot times stay strictly
// increasing.
struct Scenario {
  std::string name = "step";
  double duration = 140.0;  // s
  double dt = 0.5;          // s, control interval
  double reference = 48.0;  // V
  std::vector<std::pair<double, double>> current_knots;  // (time s, current A)
  Eigen::Vector2d initial_flows{100.0, 300.0};           // lpm at t=0
  NoiseStd noise{0.05, 0.005};
  std::uint64_t seed = 0;

  double current_at(double t) const;
  void validate() const;

  // Times at which a load event completes (end of each step/ramp segment).
  std::vector<double> event_times() const;

  // Step disturbance: +30 A at 25 s, -40 A at 75 s around the nominal load.
  static Scenario step_default();
  // Slope up over 65-85 s, step down at 110 s, step up at 140 s.
  static Scenario ramp_step_default();
  static Scenario by_name(const std::string& name);
};

}  // namespace fcmpc
