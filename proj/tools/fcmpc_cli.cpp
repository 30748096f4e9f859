// Command-line front end. Talks to the toolkit exclusively through the
// shared-library C API in fcmpc.h.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "fcmpc.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  std::string controller;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "run configuration JSON")->required();
  cmd->add_option("--seed", args.seed, "override the config seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--out", args.out_dir, "override the output directory");
  cmd->add_option("--controller", args.controller, "nn-mpc or plant-mpc");
}

// Loads the config and applies overrides; returns nullptr after printing
// the error (caller exits with the returned status).
fcmpc_config* open_config(const CommonArgs& args, int& status) {
  fcmpc_config* cfg = nullptr;
  status = fcmpc_config_load(args.config_path.c_str(), &cfg);
  if (status != FCMPC_OK) {
    std::fprintf(stderr, "error (%s): %s\n", fcmpc_status_name(status), fcmpc_last_error());
    return nullptr;
  }
  if (args.seed_set) fcmpc_config_set_seed(cfg, args.seed);
  if (!args.out_dir.empty()) fcmpc_config_set_out_dir(cfg, args.out_dir.c_str());
  if (!args.controller.empty()) {
    status = fcmpc_config_set_controller(cfg, args.controller.c_str());
    if (status != FCMPC_OK) {
      std::fprintf(stderr, "error (%s): %s\n", fcmpc_status_name(status), fcmpc_last_error());
      fcmpc_config_free(cfg);
      return nullptr;
    }
  }
  return cfg;
}

int run_stage(const CommonArgs& args, int (*stage)(const fcmpc_config*), const char* done_msg) {
  int status = 0;
  fcmpc_config* cfg = open_config(args, status);
  if (cfg == nullptr) return status;
  status = stage(cfg);
  if (status != FCMPC_OK) {
    std::fprintf(stderr, "error (%s): %s\n", fcmpc_status_name(status), fcmpc_last_error());
  } else {
    std::printf("%s\n", done_msg);
  }
  fcmpc_config_free(cfg);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fcmpc: neural-network MPC pipeline for a fuel cell plant"};
  app.require_subcommand(1);
  app.set_version_flag("--version", []() { return std::string(fcmpc_version()); });

  CommonArgs datagen_args, train_args, sim_args, cmp_args, plot_args;
  CLI::App* datagen = app.add_subcommand("datagen", "sample inputs and record plant transitions");
  add_common(datagen, datagen_args);
  CLI::App* train_cmd = app.add_subcommand("train", "fit the state-update network");
  add_common(train_cmd, train_args);
  CLI::App* simulate = app.add_subcommand("simulate", "run one closed-loop scenario");
  add_common(simulate, sim_args);
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run nn-mpc and plant-mpc on the same scenario");
  add_common(compare_cmd, cmp_args);
  CLI::App* plot = app.add_subcommand("plot", "re-render figures from a recorded trace");
  add_common(plot, plot_args);

  CLI11_PARSE(app, argc, argv);

  if (datagen->parsed()) return run_stage(datagen_args, fcmpc_datagen, "dataset written");
  if (train_cmd->parsed()) return run_stage(train_args, fcmpc_train, "weights written");
  if (plot->parsed()) return run_stage(plot_args, fcmpc_plot, "figures written");

  if (simulate->parsed()) {
    int status = 0;
    fcmpc_config* cfg = open_config(sim_args, status);
    if (cfg == nullptr) return status;
    fcmpc_trace* trace = nullptr;
    status = fcmpc_simulate(cfg, &trace);
    if (status != FCMPC_OK) {
      std::fprintf(stderr, "error (%s): %s\n", fcmpc_status_name(status), fcmpc_last_error());
    } else {
      const size_t rows = fcmpc_trace_rows(trace);
      double v_end = 0.0;
      fcmpc_trace_value(trace, rows - 1, "v_true", &v_end);
      std::printf("trace written: %zu rows, final voltage %.3f V\n", rows, v_end);
    }
    fcmpc_trace_free(trace);
    fcmpc_config_free(cfg);
    return status;
  }

  if (compare_cmd->parsed()) {
    int status = 0;
    fcmpc_config* cfg = open_config(cmp_args, status);
    if (cfg == nullptr) return status;
    char* report = nullptr;
    status = fcmpc_compare(cfg, &report);
    if (status != FCMPC_OK) {
      std::fprintf(stderr, "error (%s): %s\n", fcmpc_status_name(status), fcmpc_last_error());
    } else {
      std::printf("%s\n", report);
    }
    fcmpc_string_free(report);
    fcmpc_config_free(cfg);
    return status;
  }

  return 0;
}
