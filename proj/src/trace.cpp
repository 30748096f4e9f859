#include "trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"
#include "version.hpp"

namespace fcmpc {

namespace {
const char* kHeader = "t,i,v_true,v_meas,p_true,p_meas,qh2,qair,dqh2,dqair,slack,status,iters,ms";
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("write_trace_csv: cannot open " + path);
  f << kHeader << "\n";
  char buf[512];
  for (const TraceRow& r : trace.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.1f,%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6e,%s,%d,%.3f\n", r.t,
                  r.current, r.v_true, r.v_meas, r.p_true, r.p_meas, r.q_h2, r.q_air, r.dq_h2,
                  r.dq_air, r.slack, r.status.c_str(), r.iters, r.ms);
    f << buf;
  }
  f.close();
  if (!f) throw IoError("write_trace_csv: write failed for " + path);

  nlohmann::json meta;
  meta["format"] = "fcmpc-trace";
  meta["version"] = 1;
  meta["scenario"] = trace.scenario;
  meta["controller"] = trace.controller;
  meta["seed"] = trace.seed;
  meta["config_hash"] = trace.config_hash;
  meta["rows"] = trace.rows.size();
  meta["generator"] = std::string("fcmpc ") + FCMPC_VERSION_STRING;
  std::ofstream mf(path + ".meta.json");
  if (!mf) throw IoError("write_trace_csv: cannot open " + path + ".meta.json");
  mf << meta.dump(2) << "\n";
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != kHeader) {
    throw IoError("read_trace_csv: bad or missing header in " + path);
  }
  Trace t;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    TraceRow r;
    std::istringstream ss(line);
    std::string field;
    auto next_double = [&](double& out) {
      if (!std::getline(ss, field, ',')) throw IoError("read_trace_csv: short row in " + path);
      out = std::stod(field);
    };
    next_double(r.t);
    next_double(r.current);
    next_double(r.v_true);
    next_double(r.v_meas);
    next_double(r.p_true);
    next_double(r.p_meas);
    next_double(r.q_h2);
    next_double(r.q_air);
    next_double(r.dq_h2);
    next_double(r.dq_air);
    next_double(r.slack);
    if (!std::getline(ss, r.status, ',')) throw IoError("read_trace_csv: short row in " + path);
    double iters_d = 0.0, ms = 0.0;
    next_double(iters_d);
    if (!std::getline(ss, field, ',')) throw IoError("read_trace_csv: short row in " + path);
    ms = std::stod(field);
    r.iters = static_cast<int>(iters_d);
    r.ms = ms;
    t.rows.push_back(r);
  }

  std::ifstream mf(path + ".meta.json");
  if (mf) {
    nlohmann::json meta = nlohmann::json::parse(mf, nullptr, true, true);
    t.scenario = meta.value("scenario", "");
    t.controller = meta.value("controller", "");
    t.seed = meta.value("seed", std::uint64_t{0});
    t.config_hash = meta.value("config_hash", "");
  }
  return t;
}

}  // namespace fcmpc
