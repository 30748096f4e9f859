#include "scenario.hpp"

#include <cmath>

#include "errors.hpp"

namespace fcmpc {

double Scenario::current_at(double t) const {
  if (current_knots.empty()) throw ConfigError("scenario: no current knots");
  if (t <= current_knots.front().first) return current_knots.front().second;
  if (t >= current_knots.back().first) return current_knots.back().second;
  for (std::size_t k = 1; k < current_knots.size(); ++k) {
    if (t <= current_knots[k].first) {
      const auto& [t0, i0] = current_knots[k - 1];
      const auto& [t1, i1] = current_knots[k];
      return i0 + (i1 - i0) * (t - t0) / (t1 - t0);
    }
  }
  return current_knots.back().second;
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ConfigError("scenario: duration must be positive");
  if (!(dt > 0.0)) throw ConfigError("scenario: dt must be positive");
  if (current_knots.empty()) throw ConfigError("scenario: needs at least one current knot");
  for (std::size_t k = 1; k < current_knots.size(); ++k) {
    if (!(current_knots[k].first > current_knots[k - 1].first)) {
      throw ConfigError("scenario: knot times must be strictly increasing");
    }
  }
  for (const auto& [t, i] : current_knots) {
    if (!std::isfinite(t) || !std::isfinite(i) || i < 0.0) {
      throw ConfigError("scenario: knot values must be finite, current nonnegative");
    }
  }
  if (noise.v_fc < 0.0 || noise.p_h2 < 0.0) {
    throw ConfigError("scenario: noise stds must be nonnegative");
  }
  if (!(initial_flows.array() > 0.0).all()) {
    throw ConfigError("scenario: initial flows must be positive");
  }
}

std::vector<double> Scenario::event_times() const {
  std::vector<double> events;
  for (std::size_t k = 1; k < current_knots.size(); ++k) {
    if (current_knots[k].second != current_knots[k - 1].second) {
      // Segment with changing current; record its completion time.
      events.push_back(current_knots[k].first);
    }
  }
  return events;
}

Scenario Scenario::step_default() {
  Scenario s;
  s.name = "step";
  s.duration = 140.0;
  s.current_knots = {{0.0, 125.0},  {25.0, 125.0}, {25.5, 150.0},
                     {75.0, 150.0}, {75.5, 115.0}, {140.0, 115.0}};
  return s;
}

Scenario Scenario::ramp_step_default() {
  Scenario s;
  s.name = "ramp-step";
  s.duration = 205.0;
  s.current_knots = {{0.0, 125.0},   {65.0, 125.0},  {85.0, 150.0},  {110.0, 150.0},
                     {110.5, 125.0}, {140.0, 125.0}, {140.5, 150.0}, {205.0, 150.0}};
  return s;
}

Scenario Scenario::by_name(const std::string& name) {
  if (name == "step") return step_default();
  if (name == "ramp-step") return ramp_step_default();
  throw ConfigError("scenario: unknown name '" + name + "' (expected step or ramp-step)");
}

}  // namespace fcmpc
