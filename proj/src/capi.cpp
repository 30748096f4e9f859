#include "fcmpc.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "version.hpp"

using namespace fcmpc;

struct fcmpc_config {
  RunConfig cfg;
};

struct fcmpc_model {
  TrainedModel model;
};

struct fcmpc_trace {
  Trace trace;
};

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Translate C++ exceptions at the boundary into status codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return FCMPC_OK;
  } catch (const ConfigError& e) {
    return set_error(FCMPC_ERR_CONFIG, e.what());
  } catch (const TrainingDivergedError& e) {
    return set_error(FCMPC_ERR_TRAINING, e.what());
  } catch (const SimulationError& e) {
    return set_error(FCMPC_ERR_SIMULATION, e.what());
  } catch (const IoError& e) {
    return set_error(FCMPC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(FCMPC_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(FCMPC_ERR_INTERNAL, "unknown error");
  }
}

}  // namespace

extern "C" {

const char* fcmpc_version(void) { return FCMPC_VERSION_STRING; }

const char* fcmpc_status_name(int status) {
  switch (status) {
    case FCMPC_OK: return "ok";
    case FCMPC_ERR_INVALID_ARG: return "invalid-argument";
    case FCMPC_ERR_CONFIG: return "config-error";
    case FCMPC_ERR_TRAINING: return "training-diverged";
    case FCMPC_ERR_SIMULATION: return "simulation-failure";
    case FCMPC_ERR_IO: return "io-error";
    case FCMPC_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* fcmpc_last_error(void) { return g_last_error.c_str(); }

int fcmpc_config_load(const char* path, fcmpc_config** out) {
  if (path == nullptr || out == nullptr) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_config_load: null argument");
  }
  *out = nullptr;
  return guarded([&] { *out = new fcmpc_config{load_config(path)}; });
}

int fcmpc_config_set_seed(fcmpc_config* cfg, uint64_t seed) {
  if (cfg == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null config");
  cfg->cfg.seed = seed;
  // Derived stage streams follow the master seed.
  cfg->cfg.scenario.seed = derive_seed(seed, 0x51e0);
  cfg->cfg.train.seed = derive_seed(seed, 0x7a11);
  return FCMPC_OK;
}

int fcmpc_config_set_out_dir(fcmpc_config* cfg, const char* dir) {
  if (cfg == nullptr || dir == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null argument");
  cfg->cfg.out_dir = dir;
  return FCMPC_OK;
}

int fcmpc_config_set_controller(fcmpc_config* cfg, const char* kind) {
  if (cfg == nullptr || kind == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null argument");
  return guarded([&] { cfg->cfg.controller = controller_kind_from_string(kind); });
}

void fcmpc_config_free(fcmpc_config* cfg) { delete cfg; }

int fcmpc_datagen(const fcmpc_config* cfg) {
  if (cfg == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null config");
  return guarded([&] { run_datagen(cfg->cfg); });
}

int fcmpc_train(const fcmpc_config* cfg) {
  if (cfg == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null config");
  return guarded([&] { run_train(cfg->cfg); });
}

int fcmpc_simulate(const fcmpc_config* cfg, fcmpc_trace** out_trace) {
  if (cfg == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null config");
  if (out_trace != nullptr) *out_trace = nullptr;
  return guarded([&] {
    Trace t = run_scenario(cfg->cfg);
    emit_run_plots(t, cfg->cfg);
    if (out_trace != nullptr) *out_trace = new fcmpc_trace{std::move(t)};
  });
}

int fcmpc_compare(const fcmpc_config* cfg, char** report_json) {
  if (cfg == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null config");
  if (report_json != nullptr) *report_json = nullptr;
  return guarded([&] {
    const ComparisonReport report = compare(cfg->cfg);
    if (report_json != nullptr) {
      const std::string text = report_to_json(report);
      *report_json = static_cast<char*>(std::malloc(text.size() + 1));
      if (*report_json == nullptr) throw std::bad_alloc();
      std::memcpy(*report_json, text.c_str(), text.size() + 1);
    }
  });
}

int fcmpc_plot(const fcmpc_config* cfg) {
  if (cfg == nullptr) return set_error(FCMPC_ERR_INVALID_ARG, "null config");
  return guarded([&] {
    const std::string path = cfg->cfg.out_dir + "/" + cfg->cfg.scenario.name + "_" +
                             to_string(cfg->cfg.controller) + ".csv";
    const Trace t = read_trace_csv(path);
    if (t.rows.empty()) throw IoError("fcmpc_plot: trace " + path + " is empty");
    emit_run_plots(t, cfg->cfg);
  });
}

void fcmpc_string_free(char* s) { std::free(s); }

int fcmpc_model_load(const char* path, fcmpc_model** out) {
  if (path == nullptr || out == nullptr) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_model_load: null argument");
  }
  *out = nullptr;
  return guarded([&] { *out = new fcmpc_model{load_weights(path)}; });
}

int fcmpc_model_predict(const fcmpc_model* m, const double input[5], double output[2]) {
  if (m == nullptr || input == nullptr || output == nullptr) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_model_predict: null argument");
  }
  return guarded([&] {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = input[i];
    const Eigen::VectorXd y = forward(m->model.net, m->model.scaler, x);
    output[0] = y(0);
    output[1] = y(1);
  });
}

int fcmpc_model_jacobian(const fcmpc_model* m, const double input[5], double out_jac[10]) {
  if (m == nullptr || input == nullptr || out_jac == nullptr) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_model_jacobian: null argument");
  }
  return guarded([&] {
    Eigen::VectorXd x(5);
    for (int i = 0; i < 5; ++i) x(i) = input[i];
    const Jacobian j = jacobian(m->model.net, m->model.scaler, x);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 5; ++c) out_jac[r * 5 + c] = j(r, c);
    }
  });
}

void fcmpc_model_free(fcmpc_model* m) { delete m; }

size_t fcmpc_trace_rows(const fcmpc_trace* t) { return t == nullptr ? 0 : t->trace.rows.size(); }

int fcmpc_trace_value(const fcmpc_trace* t, size_t row, const char* column, double* out) {
  if (t == nullptr || column == nullptr || out == nullptr) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_trace_value: null argument");
  }
  if (row >= t->trace.rows.size()) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_trace_value: row out of range");
  }
  const TraceRow& r = t->trace.rows[row];
  const std::string c = column;
  if (c == "t") *out = r.t;
  else if (c == "i") *out = r.current;
  else if (c == "v_true") *out = r.v_true;
  else if (c == "v_meas") *out = r.v_meas;
  else if (c == "p_true") *out = r.p_true;
  else if (c == "p_meas") *out = r.p_meas;
  else if (c == "qh2") *out = r.q_h2;
  else if (c == "qair") *out = r.q_air;
  else if (c == "dqh2") *out = r.dq_h2;
  else if (c == "dqair") *out = r.dq_air;
  else if (c == "slack") *out = r.slack;
  else if (c == "iters") *out = r.iters;
  else if (c == "ms") *out = r.ms;
  else return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_trace_value: unknown column " + c);
  return FCMPC_OK;
}

int fcmpc_trace_status(const fcmpc_trace* t, size_t row, const char** out) {
  if (t == nullptr || out == nullptr) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_trace_status: null argument");
  }
  if (row >= t->trace.rows.size()) {
    return set_error(FCMPC_ERR_INVALID_ARG, "fcmpc_trace_status: row out of range");
  }
  *out = t->trace.rows[row].status.c_str();
  return FCMPC_OK;
}

void fcmpc_trace_free(fcmpc_trace* t) { delete t; }

}  // extern "C"
