#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "trace.hpp"

namespace fcmpc {

// Pipeline stages. Each writes its artifacts under config.out_dir and also
// returns the result for in-process use.

Dataset run_datagen(const RunConfig& config);

TrainedModel run_train(const RunConfig& config);
TrainedModel run_train(const RunConfig& config, const Dataset& dataset);

// Per-step context handed to an optional observer (diagnostics, audits).
struct StepContext {
  int step = 0;
  Measurement meas{};
  double current = 0.0;
  double prev_current = 0.0;
  Eigen::Vector2d flows_before{0, 0};  // applied during the previous interval
  Jacobian jac = Jacobian::Zero();
  const StepDecision* decision = nullptr;
};
using StepObserver = std::function<void(const StepContext&)>;

// Closed loop at the control interval: measure -> control step -> apply
// flows to the plant for one interval -> repeat. Deterministic given the
// seed. The model argument is required for the nn-mpc controller; when
// absent it is loaded from config.resolved_weights_path().
Trace run_scenario(const RunConfig& config);
Trace run_scenario(const RunConfig& config, const TrainedModel* model,
                   const StepObserver& observer = {});

// Scalar summary of one closed-loop trace.
struct TraceMetrics {
  double overshoot = 0.0;          // max(V_true - ref) during start-up, V
  std::vector<double> settle_times;  // s after each load event until the
                                     // +/-0.2 V band holds
  double max_p_h2 = 0.0;           // atm, true pressure
  double iae = 0.0;                // integral |V_true - ref| dt
  int pressure_violations = 0;     // rows with p_true > p_max
  double exceed_peak = 0.0;        // atm above the limit
  double exceed_longest = 0.0;     // s, longest violation episode
};

TraceMetrics compute_metrics(const Trace& trace, const Scenario& scenario, double p_max,
                             double band = 0.2);

struct ComparisonReport {
  TraceMetrics nn;
  TraceMetrics plant;
  std::string scenario;
  std::uint64_t seed = 0;
};

// Run both controller flavours on the same scenario and seed.
ComparisonReport compare(const RunConfig& config, const TrainedModel* model = nullptr);

// Pairwise form: the two runs must share scenario and seed.
ComparisonReport compare(const RunConfig& nn_config, const RunConfig& plant_config,
                         const TrainedModel* model);

std::string report_to_json(const ComparisonReport& report);

// Two figures per trace: voltage tracking (with current overlay) and
// constraint handling (P_H2 with its limit, flows, increments). Overlays
// every given trace; file names start with `stem`.
void emit_plots(const std::vector<Trace>& traces, const std::string& out_dir,
                const std::string& stem, double p_h2_max, double reference);

// Convenience: default figure emission for one run.
void emit_run_plots(const Trace& trace, const RunConfig& config);

}  // namespace fcmpc
