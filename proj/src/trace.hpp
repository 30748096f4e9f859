#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fcmpc {

struct TraceRow {
  double t = 0.0;
  double current = 0.0;
  double v_true = 0.0;
  double v_meas = 0.0;
  double p_true = 0.0;
  double p_meas = 0.0;
  double q_h2 = 0.0;
  double q_air = 0.0;
  double dq_h2 = 0.0;
  double dq_air = 0.0;
  double slack = 0.0;
  std::string status = "solved";
  int iters = 0;
  double ms = 0.0;
};

// Time-indexed closed-loop record, one row per 0.5 s control step.
struct Trace {
  std::vector<TraceRow> rows;
  std::string scenario;
  std::string controller;  // "nn-mpc" or "plant-mpc"
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Fixed-format CSV with header
//   t,i,v_true,v_meas,p_true,p_meas,qh2,qair,dqh2,dqair,slack,status,iters,ms
// Formats are pinned (documented in the README) so identical runs produce
// byte-identical files. A JSON sidecar <path>.meta.json carries the seed
// and config hash.
void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(const std::string& path);

}  // namespace fcmpc
