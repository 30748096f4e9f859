#include "harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "errors.hpp"
#include "json.hpp"
#include "svgplot.hpp"

namespace fcmpc {

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::string trace_path(const RunConfig& config) {
  return config.out_dir + "/" + config.scenario.name + "_" + to_string(config.controller) +
         ".csv";
}

}  // namespace

Dataset run_datagen(const RunConfig& config) {
  config.validate();
  ensure_dir(config.out_dir);

  Rng rng(derive_seed(config.seed, 0xda7a));
  const auto samples = lhs_sample(config.datagen.n_samples, config.datagen.bounds, rng);

  CollectConfig cc;
  cc.dt = config.datagen.dt;
  cc.warmup_min = config.datagen.warmup_min;
  cc.warmup_max = config.datagen.warmup_max;
  cc.noise = config.noise;
  cc.seed = derive_seed(config.seed, 0xc011);
  Dataset ds = collect(config.plant, samples, config.datagen.bounds, cc);
  save_dataset(ds, config.resolved_dataset_path());
  return ds;
}

TrainedModel run_train(const RunConfig& config) {
  return run_train(config, load_dataset(config.resolved_dataset_path()));
}

TrainedModel run_train(const RunConfig& config, const Dataset& dataset) {
  config.validate();
  ensure_dir(config.out_dir);

  TrainedModel model = train(dataset, config.train);
  save_weights(model.net, model.scaler, config.resolved_weights_path(), config_hash(config),
               model.report.best_val_loss);

  nlohmann::json report;
  report["epochs_run"] = model.report.epochs_run;
  report["best_epoch"] = model.report.best_epoch;
  report["best_val_loss"] = model.report.best_val_loss;
  report["train_loss"] = model.report.train_loss;
  report["val_loss"] = model.report.val_loss;
  std::ofstream rf(config.out_dir + "/train_report.json");
  if (!rf) throw IoError("run_train: cannot write train_report.json");
  rf << report.dump(2) << "\n";
  return model;
}

Trace run_scenario(const RunConfig& config) {
  if (config.controller == ControllerKind::NnMpc) {
    const TrainedModel model = load_weights(config.resolved_weights_path());
    return run_scenario(config, &model);
  }
  return run_scenario(config, nullptr);
}

Trace run_scenario(const RunConfig& config, const TrainedModel* model,
                   const StepObserver& observer) {
  config.validate();
  ensure_dir(config.out_dir);
  const Scenario& sc = config.scenario;
  if (config.controller == ControllerKind::NnMpc && model == nullptr) {
    throw ConfigError("run_scenario: nn-mpc controller needs a trained model");
  }

  Trace trace;
  trace.scenario = sc.name;
  trace.controller = to_string(config.controller);
  trace.seed = config.seed;
  trace.config_hash = config_hash(config);

  Rng rng(derive_seed(config.seed, sc.seed));

  const double i0 = sc.current_at(0.0);
  PlantState x = plant_equilibrium(PlantInputs{sc.initial_flows(0), sc.initial_flows(1), i0},
                                   config.plant);
  MpcController controller(config.mpc, sc.initial_flows, i0);

  const int n_steps = static_cast<int>(std::llround(sc.duration / sc.dt));
  Eigen::Vector2d prev_flows = sc.initial_flows;

  for (int k = 0; k <= n_steps; ++k) {
    const double t = k * sc.dt;
    const double current = sc.current_at(t);
    TraceRow row;
    row.t = t;
    row.current = current;

    try {
      const PlantInputs held{prev_flows(0), prev_flows(1), current};
      const PlantOutput out = plant_output(x, held, config.plant);
      const Measurement meas = measure(out, sc.noise, rng);
      row.v_true = out.v_fc;
      row.p_true = out.p_h2;
      row.v_meas = meas.v_fc;
      row.p_meas = meas.p_h2;

      const auto t_start = std::chrono::steady_clock::now();
      Jacobian jac;
      if (config.controller == ControllerKind::NnMpc) {
        jac = jacobian(model->net, model->scaler, controller.operating_point(meas, current));
      } else {
        jac = plant_fd_jacobian(x, controller.state().flows, current, config.plant, sc.dt);
      }
      const double prev_current = controller.state().prev_current;
      const StepDecision decision = controller.step(jac, meas, current);
      const auto t_end = std::chrono::steady_clock::now();

      if (observer) {
        StepContext ctx;
        ctx.step = k;
        ctx.meas = meas;
        ctx.current = current;
        ctx.prev_current = prev_current;
        ctx.flows_before = prev_flows;
        ctx.jac = jac;
        ctx.decision = &decision;
        observer(ctx);
      }

      row.q_h2 = decision.flows(0);
      row.q_air = decision.flows(1);
      row.dq_h2 = decision.flows(0) - prev_flows(0);
      row.dq_air = decision.flows(1) - prev_flows(1);
      row.slack = decision.slack_max;
      row.status = decision.degraded ? std::string("degraded-") + to_string(decision.qp_status)
                                     : to_string(decision.qp_status);
      row.iters = decision.qp_iterations;
      row.ms = config.timing
                   ? std::chrono::duration<double, std::milli>(t_end - t_start).count()
                   : 0.0;
      trace.rows.push_back(row);

      prev_flows = decision.flows;
      if (k < n_steps) {
        x = plant_step(x, PlantInputs{prev_flows(0), prev_flows(1), current}, config.plant,
                       sc.dt);
      }
    } catch (const std::runtime_error& e) {
      row.status = "failed";
      trace.rows.push_back(row);
      write_trace_csv(trace, trace_path(config));
      throw SimulationError("run_scenario: step " + std::to_string(k) + " failed: " + e.what());
    }
  }

  write_trace_csv(trace, trace_path(config));
  return trace;
}

TraceMetrics compute_metrics(const Trace& trace, const Scenario& scenario, double p_max,
                             double band) {
  TraceMetrics m;
  if (trace.rows.empty()) return m;
  const double ref = scenario.reference;
  const double dt = scenario.dt;

  const std::vector<double> events = scenario.event_times();
  const double first_event = events.empty() ? trace.rows.back().t : events.front();

  double exceed_run = 0.0;
  for (const TraceRow& r : trace.rows) {
    if (r.t < first_event) m.overshoot = std::max(m.overshoot, r.v_true - ref);
    m.max_p_h2 = std::max(m.max_p_h2, r.p_true);
    m.iae += std::abs(r.v_true - ref) * dt;
    if (r.p_true > p_max) {
      ++m.pressure_violations;
      m.exceed_peak = std::max(m.exceed_peak, r.p_true - p_max);
      exceed_run += dt;
      m.exceed_longest = std::max(m.exceed_longest, exceed_run);
    } else {
      exceed_run = 0.0;
    }
  }

  // Settling time after each event: first instant from which |V-ref| stays
  // inside the band until the next event (or the end of the trace).
  for (std::size_t e = 0; e < events.size(); ++e) {
    const double t0 = events[e];
    const double t1 = (e + 1 < events.size()) ? events[e + 1] : trace.rows.back().t + dt;
    double settle = -1.0;
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
      const TraceRow& r = trace.rows[i];
      if (r.t < t0 || r.t >= t1) continue;
      bool holds = true;
      for (std::size_t k = i; k < trace.rows.size() && trace.rows[k].t < t1; ++k) {
        if (std::abs(trace.rows[k].v_true - ref) >= band) {
          holds = false;
          break;
        }
      }
      if (holds) {
        settle = r.t - t0;
        break;
      }
    }
    m.settle_times.push_back(settle);  // -1 marks "never settled"
  }
  return m;
}

ComparisonReport compare(const RunConfig& config, const TrainedModel* model) {
  RunConfig nn_cfg = config;
  nn_cfg.controller = ControllerKind::NnMpc;
  RunConfig plant_cfg = config;
  plant_cfg.controller = ControllerKind::PlantMpc;
  return compare(nn_cfg, plant_cfg, model);
}

ComparisonReport compare(const RunConfig& nn_config, const RunConfig& plant_config,
                         const TrainedModel* model) {
  if (nn_config.scenario.name != plant_config.scenario.name ||
      nn_config.seed != plant_config.seed) {
    throw ConfigError("compare: runs must share scenario and seed (got " +
                      nn_config.scenario.name + "/" + std::to_string(nn_config.seed) + " vs " +
                      plant_config.scenario.name + "/" + std::to_string(plant_config.seed) + ")");
  }
  const RunConfig& config = nn_config;
  RunConfig nn_cfg = nn_config;
  nn_cfg.controller = ControllerKind::NnMpc;
  RunConfig plant_cfg = plant_config;
  plant_cfg.controller = ControllerKind::PlantMpc;

  ComparisonReport report;
  report.scenario = config.scenario.name;
  report.seed = config.seed;

  std::optional<TrainedModel> loaded;
  if (model == nullptr) {
    loaded = load_weights(config.resolved_weights_path());
    model = &*loaded;
  }

  const Trace nn_trace = run_scenario(nn_cfg, model);
  const Trace plant_trace = run_scenario(plant_cfg, nullptr);

  report.nn = compute_metrics(nn_trace, config.scenario, config.mpc.p_h2_max);
  report.plant = compute_metrics(plant_trace, config.scenario, config.mpc.p_h2_max);

  emit_plots({nn_trace, plant_trace}, config.out_dir, config.scenario.name + "_compare",
             config.mpc.p_h2_max, config.scenario.reference);

  std::ofstream f(config.out_dir + "/" + config.scenario.name + "_compare.json");
  if (!f) throw IoError("compare: cannot write report");
  f << report_to_json(report) << "\n";
  return report;
}

std::string report_to_json(const ComparisonReport& report) {
  nlohmann::json j;
  auto metrics = [](const TraceMetrics& m) {
    nlohmann::json o;
    o["overshoot_v"] = m.overshoot;
    o["settle_times_s"] = m.settle_times;
    o["max_p_h2_atm"] = m.max_p_h2;
    o["iae_vs"] = m.iae;
    o["pressure_violations"] = m.pressure_violations;
    o["exceed_peak_atm"] = m.exceed_peak;
    o["exceed_longest_s"] = m.exceed_longest;
    return o;
  };
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["nn-mpc"] = metrics(report.nn);
  j["plant-mpc"] = metrics(report.plant);
  return j.dump(2);
}

void emit_plots(const std::vector<Trace>& traces, const std::string& out_dir,
                const std::string& stem, double p_h2_max, double reference) {
  if (traces.empty()) throw ConfigError("emit_plots: no traces");
  for (const Trace& t : traces) {
    if (t.rows.empty()) throw ConfigError("emit_plots: empty trace");
  }
  ensure_dir(out_dir);

  const double x_max = traces.front().rows.back().t;
  const char* palette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b"};
  const char* palette2[] = {"#17becf", "#ff7f0e", "#e377c2", "#7f7f7f"};

  auto series_of = [&](const Trace& t, double TraceRow::* field, const std::string& label,
                       const char* color) {
    SvgSeries s;
    s.label = label;
    s.color = color;
    s.points.reserve(t.rows.size());
    for (const TraceRow& r : t.rows) s.points.emplace_back(r.t, r.*field);
    return s;
  };

  // Figure 1: voltage tracking with the workload current overlaid.
  {
    SvgPanel panel;
    panel.ylabel = "stack voltage [V]";
    panel.hlines.push_back({reference, "reference", "#777777"});
    for (std::size_t i = 0; i < traces.size(); ++i) {
      panel.series.push_back(
          series_of(traces[i], &TraceRow::v_true, traces[i].controller + " V", palette[i % 4]));
    }
    panel.right_series.push_back(
        series_of(traces.front(), &TraceRow::current, "current", "#d62728"));
    panel.right_series.back().dashed = true;
    panel.right_ylabel = "current [A]";
    render_svg(out_dir + "/" + stem + "_voltage.svg", "Output voltage under current disturbance",
               "time [s]", {panel}, 0.0, x_max);
  }

  // Figure 2: hydrogen pressure with its limit, flows, increments.
  {
    char limit_label[64];
    std::snprintf(limit_label, sizeof(limit_label), "%g atm limit", p_h2_max);
    SvgPanel pressure;
    pressure.ylabel = "P_H2 [atm]";
    pressure.hlines.push_back({p_h2_max, limit_label, "#c0392b"});
    for (std::size_t i = 0; i < traces.size(); ++i) {
      pressure.series.push_back(series_of(traces[i], &TraceRow::p_true,
                                          traces[i].controller + " P_H2", palette[i % 4]));
    }

    SvgPanel flows;
    flows.ylabel = "flow [lpm]";
    for (std::size_t i = 0; i < traces.size(); ++i) {
      flows.series.push_back(
          series_of(traces[i], &TraceRow::q_h2, traces[i].controller + " Q_H2", palette[i % 4]));
      flows.series.push_back(series_of(traces[i], &TraceRow::q_air,
                                       traces[i].controller + " Q_air", palette2[i % 4]));
    }

    SvgPanel incr;
    incr.ylabel = "increment [lpm]";
    for (std::size_t i = 0; i < traces.size(); ++i) {
      incr.series.push_back(
          series_of(traces[i], &TraceRow::dq_h2, traces[i].controller + " dQ_H2", palette[i % 4]));
      incr.series.push_back(series_of(traces[i], &TraceRow::dq_air,
                                      traces[i].controller + " dQ_air", palette2[i % 4]));
    }

    render_svg(out_dir + "/" + stem + "_constraints.svg", "Constraint handling and system inputs",
               "time [s]", {pressure, flows, incr}, 0.0, x_max);
  }
}

void emit_run_plots(const Trace& trace, const RunConfig& config) {
  emit_plots({trace}, config.out_dir,
             config.scenario.name + "_" + to_string(config.controller), config.mpc.p_h2_max,
             config.scenario.reference);
}

}  // namespace fcmpc
