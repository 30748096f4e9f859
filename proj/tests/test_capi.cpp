#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "fcmpc.h"

namespace {

// Small end-to-end configuration: fast corpus and a short scenario.
const char* kConfigText = R"({
  "seed": 11,
  "out_dir": "capi_out",
  "datagen": {"n_samples": 150},
  "train": {"epochs": 60, "patience": 60},
  "scenario": {"name": "step", "duration": 25.0},
  "controller": "nn-mpc"
})";

std::string write_config() {
  const std::string path = "capi_config.json";
  std::ofstream f(path);
  f << kConfigText;
  return path;
}

}  // namespace

TEST_CASE("capi: version and status names") {
  CHECK(std::string(fcmpc_version()).size() >= 5);
  CHECK(std::string(fcmpc_status_name(FCMPC_OK)) == "ok");
  CHECK(std::string(fcmpc_status_name(FCMPC_ERR_CONFIG)) == "config-error");
  CHECK(std::string(fcmpc_status_name(FCMPC_ERR_TRAINING)) == "training-diverged");
  CHECK(std::string(fcmpc_status_name(999)) == "unknown");
}

TEST_CASE("capi: null and missing-file arguments are rejected") {
  fcmpc_config* cfg = nullptr;
  CHECK(fcmpc_config_load(nullptr, &cfg) == FCMPC_ERR_INVALID_ARG);
  CHECK(fcmpc_config_load("nonexistent.json", &cfg) == FCMPC_ERR_CONFIG);
  CHECK(std::string(fcmpc_last_error()).size() > 0);

  fcmpc_model* model = nullptr;
  CHECK(fcmpc_model_load("nonexistent.json", &model) == FCMPC_ERR_IO);
  CHECK(fcmpc_datagen(nullptr) == FCMPC_ERR_INVALID_ARG);
  CHECK(fcmpc_simulate(nullptr, nullptr) == FCMPC_ERR_INVALID_ARG);
}

TEST_CASE("capi: full pipeline through the shared library") {
  const std::string path = write_config();
  fcmpc_config* cfg = nullptr;
  REQUIRE(fcmpc_config_load(path.c_str(), &cfg) == FCMPC_OK);
  REQUIRE(cfg != nullptr);

  CHECK(fcmpc_config_set_seed(cfg, 11) == FCMPC_OK);
  CHECK(fcmpc_config_set_controller(cfg, "nn-mpc") == FCMPC_OK);
  CHECK(fcmpc_config_set_controller(cfg, "bogus") == FCMPC_ERR_CONFIG);

  REQUIRE(fcmpc_datagen(cfg) == FCMPC_OK);
  REQUIRE(fcmpc_train(cfg) == FCMPC_OK);

  fcmpc_trace* trace = nullptr;
  REQUIRE(fcmpc_simulate(cfg, &trace) == FCMPC_OK);
  REQUIRE(trace != nullptr);
  const size_t rows = fcmpc_trace_rows(trace);
  CHECK(rows == 51);

  // Loose band: this run uses a deliberately small corpus, the point here
  // is the API mechanics rather than control quality.
  double v = 0.0, t_last = 0.0;
  CHECK(fcmpc_trace_value(trace, rows - 1, "v_true", &v) == FCMPC_OK);
  CHECK(std::abs(v - 48.0) < 2.0);
  CHECK(fcmpc_trace_value(trace, rows - 1, "t", &t_last) == FCMPC_OK);
  CHECK(t_last == 25.0);
  const char* status = nullptr;
  CHECK(fcmpc_trace_status(trace, 0, &status) == FCMPC_OK);
  CHECK(std::string(status) == "solved");
  CHECK(fcmpc_trace_value(trace, rows, "t", &v) == FCMPC_ERR_INVALID_ARG);
  CHECK(fcmpc_trace_value(trace, 0, "bogus", &v) == FCMPC_ERR_INVALID_ARG);
  fcmpc_trace_free(trace);

  // Plot regeneration from the recorded CSV.
  CHECK(fcmpc_plot(cfg) == FCMPC_OK);
  CHECK(std::filesystem::exists("capi_out/step_nn-mpc_voltage.svg"));
  CHECK(std::filesystem::exists("capi_out/step_nn-mpc_constraints.svg"));

  // Compare produces a JSON report string.
  char* report = nullptr;
  REQUIRE(fcmpc_compare(cfg, &report) == FCMPC_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("nn-mpc") != std::string::npos);
  CHECK(std::string(report).find("plant-mpc") != std::string::npos);
  fcmpc_string_free(report);

  fcmpc_config_free(cfg);
  std::filesystem::remove(path);
}

TEST_CASE("capi: model predict and jacobian agree with finite differences") {
  // Reuses the weights trained by the pipeline test (file ordering in this
  // suite is top to bottom).
  fcmpc_model* model = nullptr;
  REQUIRE(fcmpc_model_load("capi_out/weights.json", &model) == FCMPC_OK);

  const double x[5] = {250.0, 500.0, 125.0, 48.0, 2.0};
  double y0[2] = {0, 0};
  REQUIRE(fcmpc_model_predict(model, x, y0) == FCMPC_OK);
  CHECK(std::isfinite(y0[0]));

  double jac[10];
  REQUIRE(fcmpc_model_jacobian(model, x, jac) == FCMPC_OK);
  for (int j = 0; j < 5; ++j) {
    double xp[5], xm[5];
    for (int i = 0; i < 5; ++i) xp[i] = xm[i] = x[i];
    const double h = (j < 3) ? 1e-3 : 1e-5;
    xp[j] += h;
    xm[j] -= h;
    double yp[2], ym[2];
    REQUIRE(fcmpc_model_predict(model, xp, yp) == FCMPC_OK);
    REQUIRE(fcmpc_model_predict(model, xm, ym) == FCMPC_OK);
    for (int i = 0; i < 2; ++i) {
      const double fd = (yp[i] - ym[i]) / (2 * h);
      CHECK(std::abs(jac[i * 5 + j] - fd) < 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
  fcmpc_model_free(model);
  std::filesystem::remove_all("capi_out");
}
