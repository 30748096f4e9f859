#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "errors.hpp"
#include "harness.hpp"

using namespace fcmpc;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunConfig fast_config(const std::string& out_dir) {
  RunConfig cfg;
  cfg.out_dir = out_dir;
  cfg.controller = ControllerKind::PlantMpc;  // no weights needed
  cfg.scenario = Scenario::step_default();
  cfg.scenario.duration = 30.0;
  cfg.scenario.noise = cfg.noise;
  cfg.scenario.seed = derive_seed(cfg.seed, 0x51e0);
  return cfg;
}

}  // namespace

TEST_CASE("scenario: piecewise-linear current profile") {
  const Scenario s = Scenario::step_default();
  CHECK(s.current_at(0.0) == 125.0);
  CHECK(s.current_at(10.0) == 125.0);
  CHECK(s.current_at(25.25) == doctest::Approx(140.0));  // one-interval ramp
  CHECK(s.current_at(30.0) == 155.0);
  CHECK(s.current_at(139.0) == 115.0);
  CHECK(s.current_at(1000.0) == 115.0);

  const auto events = s.event_times();
  REQUIRE(events.size() == 2);
  CHECK(events[0] == 25.5);
  CHECK(events[1] == 75.5);
}

TEST_CASE("scenario: validation rejects bad knots") {
  Scenario s = Scenario::step_default();
  s.current_knots[1].first = s.current_knots[0].first;  // not strictly increasing
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = Scenario::step_default();
  s.current_knots.clear();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(Scenario::by_name("bogus"), ConfigError);
  CHECK_NOTHROW(Scenario::by_name("ramp-step").validate());
}

TEST_CASE("run_scenario: near-zero increment bounds hold flows constant") {
  RunConfig cfg = fast_config("test_out_hold");
  cfg.scenario.duration = 20.0;
  cfg.scenario.noise = {0.0, 0.0};
  cfg.mpc.du_min = -1e-9;
  cfg.mpc.du_max = 1e-9;
  const Trace t = run_scenario(cfg, nullptr);

  // Flows pinned at the initial values; the plant settles to the open-loop
  // equilibrium of those inputs.
  for (const TraceRow& r : t.rows) {
    CHECK(r.q_h2 == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(r.q_air == doctest::Approx(300.0).epsilon(1e-9));
  }
  const PlantState eq = plant_equilibrium({100.0, 300.0, 125.0}, cfg.plant);
  const PlantOutput out = plant_output(eq, {100.0, 300.0, 125.0}, cfg.plant);
  CHECK(t.rows.back().v_true == doctest::Approx(out.v_fc).epsilon(1e-6));
  CHECK(t.rows.back().p_true == doctest::Approx(eq.p_h2).epsilon(1e-6));
  std::filesystem::remove_all("test_out_hold");
}

TEST_CASE("run_scenario: trace shape, monotone time, increment consistency") {
  RunConfig cfg = fast_config("test_out_shape");
  const Trace t = run_scenario(cfg, nullptr);
  CHECK(t.rows.size() == static_cast<std::size_t>(30.0 / 0.5) + 1);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].t > t.rows[i - 1].t);
    CHECK(t.rows[i].q_h2 - t.rows[i - 1].q_h2 == doctest::Approx(t.rows[i].dq_h2).epsilon(1e-12));
    CHECK(t.rows[i].q_air - t.rows[i - 1].q_air ==
          doctest::Approx(t.rows[i].dq_air).epsilon(1e-12));
  }
  std::filesystem::remove_all("test_out_shape");
}

TEST_CASE("run_scenario: identical seeds produce byte-identical CSV") {
  RunConfig cfg = fast_config("test_out_det1");
  run_scenario(cfg, nullptr);
  const std::string a = slurp("test_out_det1/step_plant-mpc.csv");

  cfg.out_dir = "test_out_det2";
  run_scenario(cfg, nullptr);
  const std::string b = slurp("test_out_det2/step_plant-mpc.csv");
  CHECK(a == b);
  CHECK(a.find("t,i,v_true,v_meas,p_true,p_meas,qh2,qair,dqh2,dqair,slack,status,iters,ms") == 0);
  std::filesystem::remove_all("test_out_det1");
  std::filesystem::remove_all("test_out_det2");
}

TEST_CASE("trace csv: read reproduces written rows within print precision") {
  RunConfig cfg = fast_config("test_out_rt");
  const Trace t = run_scenario(cfg, nullptr);
  const Trace r = read_trace_csv("test_out_rt/step_plant-mpc.csv");
  REQUIRE(r.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(std::abs(r.rows[i].v_true - t.rows[i].v_true) < 1e-6);
    CHECK(std::abs(r.rows[i].q_h2 - t.rows[i].q_h2) < 1e-6);
    CHECK(r.rows[i].status == t.rows[i].status);
  }
  CHECK(r.scenario == "step");
  CHECK(r.controller == "plant-mpc");
  std::filesystem::remove_all("test_out_rt");
}

TEST_CASE("metrics: overshoot, settling, violations on a synthetic trace") {
  Scenario sc = Scenario::step_default();
  sc.duration = 100.0;
  Trace t;
  for (int k = 0; k <= 200; ++k) {
    TraceRow r;
    r.t = 0.5 * k;
    // Start-up overshoot of 0.3 V at t=5, settled afterwards; a pressure
    // bump above 2.5 for 3 samples.
    r.v_true = (r.t == 5.0) ? 48.3 : 48.05;
    if (r.t > 25.5 && r.t <= 40.0) r.v_true = 47.0;  // unsettled window after event 1
    r.p_true = (r.t >= 30.0 && r.t < 31.5) ? 2.52 : 2.0;
    t.rows.push_back(r);
  }
  const TraceMetrics m = compute_metrics(t, sc, 2.5);
  CHECK(m.overshoot == doctest::Approx(0.3));
  CHECK(m.max_p_h2 == doctest::Approx(2.52));
  CHECK(m.pressure_violations == 3);
  CHECK(m.exceed_peak == doctest::Approx(0.02));
  CHECK(m.exceed_longest == doctest::Approx(1.5));
  REQUIRE(m.settle_times.size() == 2);
  // Event 1 at t=25.5: settles when V returns in-band at 40.5 -> 15 s.
  CHECK(m.settle_times[0] == doctest::Approx(15.0));
  CHECK(m.settle_times[1] == doctest::Approx(0.0));

  // Identical traces give identical reports.
  const TraceMetrics m2 = compute_metrics(t, sc, 2.5);
  CHECK(m2.overshoot == m.overshoot);
  CHECK(m2.iae == m.iae);
  CHECK(m2.settle_times == m.settle_times);
}

TEST_CASE("emit_plots: figures exist, cover the duration, mark the limit") {
  RunConfig cfg = fast_config("test_out_plot");
  const Trace t = run_scenario(cfg, nullptr);
  emit_run_plots(t, cfg);

  const std::string voltage = slurp("test_out_plot/step_plant-mpc_voltage.svg");
  const std::string constraints = slurp("test_out_plot/step_plant-mpc_constraints.svg");
  CHECK(voltage.size() > 500);
  CHECK(constraints.size() > 500);
  CHECK(voltage.find("<svg") == 0);
  // x axis reaches the full duration and the pressure limit is drawn.
  CHECK(voltage.find(">30<") != std::string::npos);
  CHECK(constraints.find("2.5 atm limit") != std::string::npos);
  CHECK(voltage.find("reference") != std::string::npos);
  CHECK(voltage.find("current") != std::string::npos);
  std::filesystem::remove_all("test_out_plot");
}

TEST_CASE("config: JSON parsing, defaults and errors") {
  const std::string text = R"({
    "seed": 7,
    "out_dir": "cfg_out",
    "mpc": {"q_weight": 12.0, "r_weight": [0.01, 0.002]},
    "scenario": {"name": "ramp-step"},
    "controller": "plant-mpc",
    "noise": {"v_std": 0.02}
  })";
  const RunConfig cfg = config_from_json_text(text);
  CHECK(cfg.seed == 7);
  CHECK(cfg.mpc.q_weight == 12.0);
  CHECK(cfg.mpc.r_weight(1) == 0.002);
  CHECK(cfg.scenario.name == "ramp-step");
  CHECK(cfg.controller == ControllerKind::PlantMpc);
  CHECK(cfg.noise.v_fc == 0.02);
  CHECK(cfg.noise.p_h2 == 0.005);  // untouched default
  CHECK(cfg.mpc.reference == cfg.scenario.reference);

  CHECK_THROWS_AS(config_from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"controller": "x"})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"scenario": {"name": "none"}})"), ConfigError);
  CHECK_THROWS_AS(config_from_json_text(R"({"mpc": {"q_weight": -1}})"), ConfigError);
  CHECK_THROWS_AS(load_config("missing_config.json"), ConfigError);
}

TEST_CASE("config: hash is stable and sensitive") {
  RunConfig a;
  RunConfig b;
  CHECK(config_hash(a) == config_hash(b));
  b.mpc.q_weight += 1.0;
  CHECK(config_hash(a) != config_hash(b));
  RunConfig c;
  c.seed += 1;
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("compare: runs both controllers and reports identically on reruns") {
  RunConfig cfg = fast_config("test_out_cmp");
  cfg.scenario.duration = 20.0;
  cfg.datagen.n_samples = 120;
  cfg.train.epochs = 40;
  cfg.train.patience = 40;
  // Small corpus + quick training is enough for the mechanics of compare().
  const Dataset ds = run_datagen(cfg);
  const TrainedModel model = run_train(cfg, ds);

  const ComparisonReport r1 = compare(cfg, &model);
  const ComparisonReport r2 = compare(cfg, &model);
  CHECK(report_to_json(r1) == report_to_json(r2));
  CHECK(r1.scenario == "step");

  // Overlay figures from compare exist.
  CHECK(slurp("test_out_cmp/step_compare_voltage.svg").find("nn-mpc") != std::string::npos);
  CHECK(slurp("test_out_cmp/step_compare_voltage.svg").find("plant-mpc") != std::string::npos);
  std::filesystem::remove_all("test_out_cmp");
}

TEST_CASE("compare: mismatched scenarios or seeds rejected") {
  RunConfig a = fast_config("test_out_mismatch");
  RunConfig b = a;
  b.scenario = Scenario::ramp_step_default();
  b.scenario.noise = a.noise;
  CHECK_THROWS_AS(compare(a, b, nullptr), ConfigError);
  b = a;
  b.seed += 1;
  CHECK_THROWS_AS(compare(a, b, nullptr), ConfigError);
}

TEST_CASE("config: scenario currents must stay in the calibrated envelope") {
  RunConfig cfg;
  cfg.scenario.current_knots.back().second = 500.0;  // beyond the sampled box
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run_scenario: observer sees every step") {
  RunConfig cfg = fast_config("test_out_obs");
  cfg.scenario.duration = 10.0;
  int seen = 0;
  double last_current = -1.0;
  run_scenario(cfg, nullptr, [&](const StepContext& ctx) {
    CHECK(ctx.decision != nullptr);
    CHECK(ctx.step == seen);
    ++seen;
    last_current = ctx.current;
  });
  CHECK(seen == 21);
  CHECK(last_current == 125.0);
  std::filesystem::remove_all("test_out_obs");
}
