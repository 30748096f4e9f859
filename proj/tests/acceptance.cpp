// Acceptance suite: the release gate for the toolkit. Runs every criterion
// at its stated tolerance against the calibrated default configuration and
// prints one PASS/FAIL line each. Exit code = number of failures.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "harness.hpp"

using namespace fcmpc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* spec, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), spec, a, b, c);
  return buf;
}

// --- criterion 1: structure of the assembled state-space model -----------

bool structure_exact(const StateSpaceModel& m, const Jacobian& j) {
  Eigen::Matrix<double, 5, 5> a_expect = Eigen::Matrix<double, 5, 5>::Zero();
  a_expect(0, 0) = 1.0;
  a_expect(1, 1) = 1.0;
  a_expect(3, 3) = 1.0;
  a_expect(4, 4) = 1.0;
  a_expect(0, 2) = j(0, 2);
  a_expect(1, 2) = j(1, 2);
  Eigen::Matrix<double, 5, 2> b_expect = Eigen::Matrix<double, 5, 2>::Zero();
  b_expect(0, 0) = j(0, 0);
  b_expect(0, 1) = j(0, 1);
  b_expect(1, 0) = j(1, 0);
  b_expect(1, 1) = j(1, 1);
  b_expect(3, 0) = 1.0;
  b_expect(4, 1) = 1.0;
  Eigen::Matrix<double, 1, 5> c_expect = Eigen::Matrix<double, 1, 5>::Zero();
  c_expect(0, 0) = 1.0;
  return m.A == a_expect && m.B == b_expect && m.C == c_expect;
}

void criterion_1() {
  Rng rng(101);
  bool ok = true;
  for (int t = 0; t < 1000 && ok; ++t) {
    Jacobian j;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 5; ++c) j(r, c) = rng.uniform(-10.0, 10.0);
    }
    ok = structure_exact(assemble(j), j);
  }
  report(1, "state-space structure exact for 1000 random Jacobians", ok,
         ok ? "all entries placed, zero pattern intact" : "pattern mismatch");
}

// --- criterion 2: forward-mode AD vs finite differences ------------------

bool kink_free(const Network& net, const Eigen::VectorXd& xs, double margin) {
  Eigen::VectorXd a = xs;
  for (std::size_t l = 0; l + 1 < net.weights.size(); ++l) {
    a = (net.weights[l] * a + net.biases[l]).eval();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (std::abs(a(i)) < margin) return false;
      if (a(i) < 0.0) a(i) = 0.0;
    }
  }
  return true;
}

void criterion_2(const TrainedModel& model) {
  Rng rng(202);
  const double h = 1e-4;
  double worst = 0.0;
  int tested = 0;
  for (int trial = 0; trial < 5000 && tested < 100; ++trial) {
    Eigen::VectorXd xs(5);
    for (int i = 0; i < 5; ++i) xs(i) = rng.uniform(-1.5, 1.5);
    if (!kink_free(model.net, xs, 1e-2)) continue;
    ++tested;
    const Eigen::MatrixXd jac = jacobian_scaled(model.net, xs);
    for (int j = 0; j < 5; ++j) {
      Eigen::VectorXd up = xs, dn = xs;
      up(j) += h;
      dn(j) -= h;
      const Eigen::VectorXd fu = forward_scaled(model.net, up);
      const Eigen::VectorXd fd = forward_scaled(model.net, dn);
      for (int i = 0; i < 2; ++i) {
        worst = std::max(worst, std::abs(jac(i, j) - (fu(i) - fd(i)) / (2 * h)));
      }
    }
  }
  const bool ok = tested == 100 && worst <= 1e-5;
  report(2, "NN Jacobian matches central differences at 100 kink-free points", ok,
         fmt("max abs error %.2e (tol 1e-5), points %.0f", worst, double(tested)));
}

// --- criterion 3: backprop gradients vs finite differences ---------------

void criterion_3() {
  Rng rng(303);
  double worst_rel = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Network net = Network::he_uniform({5, 3, 2}, rng);
    Eigen::MatrixXd x(5, 4), y(2, 4);
    for (int i = 0; i < 20; ++i) x(i % 5, i / 5) = rng.uniform(-1, 1);
    for (int i = 0; i < 8; ++i) y(i % 2, i / 2) = rng.uniform(-1, 1);
    const Gradients g = backward(net, x, y);
    const double h = 1e-6;
    auto fd_of = [&](double& param) {
      const double keep = param;
      param = keep + h;
      const double up = loss_scaled(net, x, y);
      param = keep - h;
      const double dn = loss_scaled(net, x, y);
      param = keep;
      return (up - dn) / (2 * h);
    };
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      for (Eigen::Index i = 0; i < net.weights[l].size(); ++i) {
        const double analytic = g.weights[l](i);
        if (std::abs(analytic) <= 1e-8) continue;
        worst_rel = std::max(worst_rel,
                             std::abs(fd_of(net.weights[l](i)) - analytic) / std::abs(analytic));
        ++checked;
      }
      for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) {
        const double analytic = g.biases[l](i);
        if (std::abs(analytic) <= 1e-8) continue;
        worst_rel = std::max(worst_rel,
                             std::abs(fd_of(net.biases[l](i)) - analytic) / std::abs(analytic));
        ++checked;
      }
    }
  }
  const bool ok = worst_rel <= 1e-5 && checked > 50;
  report(3, "backprop matches finite differences on (5,3,2) networks", ok,
         fmt("max rel error %.2e over %.0f entries (tol 1e-5)", worst_rel, double(checked)));
}

// --- criterion 4: QP solver vs active-set enumeration oracle -------------

struct OneSided {
  Eigen::VectorXd normal;
  double bound;
};

std::optional<double> enumeration_oracle(const QpProblem& p) {
  const int n = p.num_vars();
  std::vector<OneSided> rows;
  for (int i = 0; i < p.num_constraints(); ++i) {
    const Eigen::VectorXd r = p.G.row(i).transpose();
    if (std::isfinite(p.upper(i))) rows.push_back({r, p.upper(i)});
    if (std::isfinite(p.lower(i))) rows.push_back({-r, -p.lower(i)});
  }
  const int m = static_cast<int>(rows.size());
  double best = kInf;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    const int k = __builtin_popcount(mask);
    if (k > n) continue;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    kkt.topLeftCorner(n, n) = p.H;
    rhs.head(n) = -p.g;
    int row = 0;
    for (int i = 0; i < m; ++i) {
      if (!(mask & (1u << i))) continue;
      kkt.block(n + row, 0, 1, n) = rows[i].normal.transpose();
      kkt.block(0, n + row, n, 1) = rows[i].normal;
      rhs(n + row) = rows[i].bound;
      ++row;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd z = sol.head(n);
    if ((sol.tail(k).array() < -1e-9).any()) continue;
    bool feasible = true;
    for (int i = 0; i < m && feasible; ++i) {
      if (rows[i].normal.dot(z) > rows[i].bound + 1e-8) feasible = false;
    }
    if (!feasible) continue;
    best = std::min(best, 0.5 * z.dot(p.H * z) + p.g.dot(z));
  }
  if (best == kInf) return std::nullopt;
  return best;
}

QpProblem random_feasible_qp(Rng& rng) {
  const int n = 2 + static_cast<int>(rng.uniform_int(9));
  const int m = 1 + static_cast<int>(rng.uniform_int(12));
  QpProblem p;
  Eigen::MatrixXd f(n, n);
  for (int i = 0; i < n * n; ++i) f(i / n, i % n) = rng.uniform(-1, 1);
  p.H = f.transpose() * f + 0.3 * Eigen::MatrixXd::Identity(n, n);
  p.g.resize(n);
  for (int i = 0; i < n; ++i) p.g(i) = rng.uniform(-2, 2);
  p.G.resize(m, n);
  for (int i = 0; i < m * n; ++i) p.G(i / n, i % n) = rng.uniform(-1, 1);
  Eigen::VectorXd z0(n);
  for (int i = 0; i < n; ++i) z0(i) = rng.uniform(-1, 1);
  p.lower.resize(m);
  p.upper.resize(m);
  int finite_sides = 0;
  for (int i = 0; i < m; ++i) {
    const double gz = p.G.row(i).dot(z0);
    const bool keep_low = rng.uniform() < 0.7 && finite_sides < 14;
    p.lower(i) = keep_low ? gz - rng.uniform(0.05, 1.5) : -kInf;
    if (keep_low) ++finite_sides;
    const bool keep_up = rng.uniform() < 0.7 && finite_sides < 14;
    p.upper(i) = keep_up ? gz + rng.uniform(0.05, 1.5) : kInf;
    if (keep_up) ++finite_sides;
  }
  return p;
}

void criterion_4() {
  Rng rng(404);
  const QpSolver solver;
  double worst_obj = 0.0, worst_kkt = 0.0;
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const QpProblem p = random_feasible_qp(rng);
    const QpSolution sol = solver.solve(p);
    if (sol.status != QpStatus::Solved) continue;
    ++solved;
    worst_kkt = std::max({worst_kkt, sol.stat_residual, sol.feas_residual, sol.comp_residual});
    const auto oracle = enumeration_oracle(p);
    if (!oracle) continue;
    worst_obj = std::max(worst_obj,
                         std::abs(sol.objective - *oracle) / std::max(1.0, std::abs(*oracle)));
  }
  const bool ok = solved == 200 && worst_obj <= 1e-6 && worst_kkt <= 1e-6;
  report(4, "QP solver matches the active-set enumeration oracle on 200 QPs", ok,
         fmt("max rel objective gap %.2e, max KKT residual %.2e, solved %.0f/200", worst_obj,
             worst_kkt, double(solved)));
}

// --- criterion 5: Latin hypercube stratification --------------------------

void criterion_5() {
  bool ok = true;
  for (int n : {4, 100, 2000}) {
    Rng rng(505 + n);
    SampleBounds b;
    const auto pts = lhs_sample(n, b, rng);
    for (int d = 0; d < 3 && ok; ++d) {
      std::vector<int> counts(n, 0);
      const double width = (b.high[d] - b.low[d]) / n;
      for (const auto& pt : pts) {
        const int s = static_cast<int>((pt[d] - b.low[d]) / width);
        if (s < 0 || s >= n) {
          ok = false;
          break;
        }
        ++counts[s];
      }
      for (int c : counts) ok = ok && (c == 1);
    }
  }
  report(5, "LHS stratification exact for n in {4, 100, 2000}", ok,
         ok ? "one point per stratum in every dimension" : "stratum count violated");
}

// --- criterion 6: model quality on the 2000-point corpus -----------------

void criterion_6(const RunConfig& cfg, const TrainedModel& model) {
  // Held-out evaluation set drawn from the same distribution with an
  // independent stream.
  RunConfig eval_cfg = cfg;
  eval_cfg.datagen.n_samples = 500;
  Rng rng(derive_seed(cfg.seed, 0xe7a1));
  const auto samples = lhs_sample(eval_cfg.datagen.n_samples, eval_cfg.datagen.bounds, rng);
  CollectConfig cc;
  cc.dt = eval_cfg.datagen.dt;
  cc.warmup_min = eval_cfg.datagen.warmup_min;
  cc.warmup_max = eval_cfg.datagen.warmup_max;
  cc.noise = eval_cfg.noise;
  cc.seed = derive_seed(cfg.seed, 0xe7a2);
  const Dataset eval = collect(eval_cfg.plant, samples, eval_cfg.datagen.bounds, cc);

  double se_v = 0.0, se_scaled = 0.0;
  Eigen::Vector2d mean_scaled = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> scaled_targets;
  for (const DataRecord& r : eval.records) {
    Eigen::VectorXd x(5);
    x << r.q_h2, r.q_air, r.current, r.v0, r.p0;
    const Eigen::VectorXd pred = forward(model.net, model.scaler, x);
    se_v += (pred(0) - r.v1) * (pred(0) - r.v1);
    Eigen::VectorXd target(2);
    target << r.v1, r.p1;
    const Eigen::VectorXd ts = model.scaler.scale_output(target);
    const Eigen::VectorXd ps = model.scaler.scale_output(pred);
    se_scaled += (ps - ts).squaredNorm();
    scaled_targets.push_back(ts);
    mean_scaled += ts;
  }
  const double n = static_cast<double>(eval.records.size());
  const double rmse_v = std::sqrt(se_v / n);
  const double mse_scaled = se_scaled / (2.0 * n);
  mean_scaled /= n;
  double var_scaled = 0.0;
  for (const auto& t : scaled_targets) var_scaled += (t - mean_scaled).squaredNorm();
  var_scaled /= (2.0 * n);

  const double ratio = var_scaled / mse_scaled;
  const bool ok = rmse_v <= 2.0 * cfg.noise.v_fc && ratio >= 100.0;
  report(6, "trained model beats noise floor and the mean predictor", ok,
         fmt("val RMSE(V) %.4f V (tol %.2f), MSE %.1fx below target variance (need 100x)",
             rmse_v, 2.0 * cfg.noise.v_fc, ratio));
}

// --- criteria 7-10: closed-loop properties --------------------------------

struct LoopAudit {
  Trace trace;
  TraceMetrics metrics;
  double worst_slack_feasible = 0.0;  // max slack at hard-feasible sampled steps
  int sampled = 0;
  bool bounds_ok = true;
};

LoopAudit run_audited(const RunConfig& cfg, const TrainedModel* model, std::uint64_t sample_seed) {
  LoopAudit audit;

  // Pre-draw 20 step indices for the slack audit.
  const int n_steps = static_cast<int>(std::llround(cfg.scenario.duration / cfg.scenario.dt)) + 1;
  Rng rng(sample_seed);
  std::vector<char> sampled(n_steps, 0);
  for (int i = 0; i < 20; ++i) sampled[rng.uniform_int(n_steps)] = 1;

  const QpSolver solver(QpOptions{cfg.mpc.qp_tol, cfg.mpc.qp_max_iter});
  const StepObserver observer = [&](const StepContext& ctx) {
    if (!sampled[ctx.step] || ctx.decision->qp_status != QpStatus::Solved) return;
    ++audit.sampled;
    // Hard-bound re-solve: pin every slack variable to zero.
    const StateSpaceModel model_k =
        assemble(ctx.jac, cfg.mpc.exact_state_jacobian ? StateCoupling::FromJacobian
                                                       : StateCoupling::Identity);
    Eigen::Matrix<double, 5, 1> x_init;
    x_init << ctx.meas.v_fc, ctx.meas.p_h2, ctx.current - ctx.prev_current, ctx.flows_before(0),
        ctx.flows_before(1);
    QpProblem qp = build_qp(model_k, cfg.mpc, x_init, Eigen::Vector2d::Zero());
    const int m = qp.num_constraints();
    for (int row = m - cfg.mpc.horizon_pred; row < m; ++row) qp.upper(row) = 0.0;
    const QpSolution hard = solver.solve(qp);
    if (hard.status == QpStatus::Solved) {
      audit.worst_slack_feasible =
          std::max(audit.worst_slack_feasible, ctx.decision->slack_max);
    }
  };

  audit.trace = run_scenario(cfg, model, observer);
  audit.metrics = compute_metrics(audit.trace, cfg.scenario, cfg.mpc.p_h2_max);

  for (std::size_t i = 1; i < audit.trace.rows.size(); ++i) {
    const TraceRow& r = audit.trace.rows[i];
    if (r.dq_h2 < -40.0 || r.dq_h2 > 20.0 || r.dq_air < -40.0 || r.dq_air > 20.0 ||
        r.q_h2 < 100.0 || r.q_h2 > 400.0 || r.q_air < 300.0 || r.q_air > 700.0) {
      audit.bounds_ok = false;
    }
  }
  return audit;
}

double startup_settle(const Trace& t, const Scenario& sc, double band = 0.2) {
  const double first_event =
      sc.event_times().empty() ? t.rows.back().t : sc.event_times().front();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].t >= first_event) break;
    bool holds = true;
    for (std::size_t k = i; k < t.rows.size() && t.rows[k].t < first_event; ++k) {
      if (std::abs(t.rows[k].v_true - sc.reference) >= band) {
        holds = false;
        break;
      }
    }
    if (holds) return t.rows[i].t;
  }
  return -1.0;
}

}  // namespace

int main() {
  std::printf("fcmpc acceptance suite\n");
  std::filesystem::create_directories("acceptance_out");

  criterion_1();

  // Fixture: default configuration, full corpus, trained model.
  RunConfig cfg;
  cfg.out_dir = "acceptance_out";
  cfg.scenario = Scenario::step_default();
  cfg.scenario.noise = cfg.noise;
  cfg.scenario.seed = derive_seed(cfg.seed, 0x51e0);
  cfg.train.seed = derive_seed(cfg.seed, 0x7a11);

  const Dataset corpus = run_datagen(cfg);
  const TrainedModel model = run_train(cfg, corpus);

  criterion_2(model);
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6(cfg, model);

  // Closed-loop runs: both scenarios, both controllers.
  RunConfig step_nn = cfg;
  step_nn.controller = ControllerKind::NnMpc;
  RunConfig step_pl = cfg;
  step_pl.controller = ControllerKind::PlantMpc;
  RunConfig ramp_nn = cfg;
  ramp_nn.scenario = Scenario::ramp_step_default();
  ramp_nn.scenario.noise = cfg.noise;
  ramp_nn.scenario.seed = cfg.scenario.seed;
  ramp_nn.controller = ControllerKind::NnMpc;
  RunConfig ramp_pl = ramp_nn;
  ramp_pl.controller = ControllerKind::PlantMpc;

  const LoopAudit a_step_nn = run_audited(step_nn, &model, derive_seed(cfg.seed, 1));
  const LoopAudit a_step_pl = run_audited(step_pl, nullptr, derive_seed(cfg.seed, 2));
  const LoopAudit a_ramp_nn = run_audited(ramp_nn, &model, derive_seed(cfg.seed, 3));
  const LoopAudit a_ramp_pl = run_audited(ramp_pl, nullptr, derive_seed(cfg.seed, 4));

  // 7: hard constraints, zero violations across all four runs.
  {
    const bool ok = a_step_nn.bounds_ok && a_step_pl.bounds_ok && a_ramp_nn.bounds_ok &&
                    a_ramp_pl.bounds_ok;
    report(7, "increments in [-40,20] lpm and flows inside their boxes, all runs", ok,
           ok ? "zero violations over 2 scenarios x 2 controllers" : "bound violated");
  }

  // 8: nn-mpc tracking: settle within 60 s of start-up and every event,
  // holding the +/-0.2 V band until the next event.
  {
    bool ok = true;
    std::string detail;
    for (const auto* audit : {&a_step_nn, &a_ramp_nn}) {
      const Scenario& sc =
          audit == &a_step_nn ? step_nn.scenario : ramp_nn.scenario;
      const double s0 = startup_settle(audit->trace, sc);
      ok = ok && s0 >= 0.0 && s0 <= 60.0;
      for (double s : audit->metrics.settle_times) ok = ok && s >= 0.0 && s <= 60.0;
      detail += sc.name + " settle " + fmt("%.1f s", s0);
      for (double s : audit->metrics.settle_times) detail += fmt(", %.1f s", s);
      detail += "; ";
    }
    report(8, "nn-mpc holds |V-48| < 0.2 V and re-settles within 60 s", ok, detail);
  }

  // 9: controller orderings on the step scenario.
  {
    const bool order_ok = a_step_pl.metrics.overshoot < a_step_nn.metrics.overshoot;
    const bool plant_ok = a_step_pl.metrics.max_p_h2 <= cfg.mpc.p_h2_max;
    const bool nn_ok = a_step_nn.metrics.exceed_peak <= 0.05 &&
                       a_step_nn.metrics.exceed_longest <= 2.0;
    const bool ok = order_ok && plant_ok && nn_ok;
    report(9, "overshoot(plant) < overshoot(nn); pressure limits respected", ok,
           fmt("overshoot nn %.4f V vs plant %.4f V; ", a_step_nn.metrics.overshoot,
               a_step_pl.metrics.overshoot) +
               fmt("plant max P %.4f atm; nn exceed %.4f atm / %.1f s",
                   a_step_pl.metrics.max_p_h2, a_step_nn.metrics.exceed_peak,
                   a_step_nn.metrics.exceed_longest));
  }

  // 10: slack discipline at sampled steps where hard bounds are feasible.
  {
    const double worst = std::max({a_step_nn.worst_slack_feasible,
                                   a_step_pl.worst_slack_feasible,
                                   a_ramp_nn.worst_slack_feasible,
                                   a_ramp_pl.worst_slack_feasible});
    const int sampled = a_step_nn.sampled + a_step_pl.sampled + a_ramp_nn.sampled +
                        a_ramp_pl.sampled;
    const bool ok = worst <= 1e-4 && sampled > 0;
    report(10, "slack <= 1e-4 atm wherever the hard-bounded re-solve is feasible", ok,
           fmt("max slack %.2e atm over %.0f sampled steps", worst, double(sampled)));
  }

  // 11: full-pipeline determinism, byte-identical artifacts.
  {
    auto slurp = [](const std::string& path) {
      std::ifstream f(path, std::ios::binary);
      std::stringstream ss;
      ss << f.rdbuf();
      return ss.str();
    };
    RunConfig a = cfg;
    a.out_dir = "acceptance_out/det_a";
    a.controller = ControllerKind::NnMpc;
    RunConfig b = cfg;
    b.out_dir = "acceptance_out/det_b";
    b.controller = ControllerKind::NnMpc;
    for (const RunConfig* c : {&a, &b}) {
      const Dataset ds = run_datagen(*c);
      const TrainedModel m = run_train(*c, ds);
      run_scenario(*c, &m);
    }
    const bool ds_ok = slurp("acceptance_out/det_a/dataset.csv") ==
                           slurp("acceptance_out/det_b/dataset.csv") &&
                       !slurp("acceptance_out/det_a/dataset.csv").empty();
    const bool w_ok = slurp("acceptance_out/det_a/weights.json") ==
                      slurp("acceptance_out/det_b/weights.json");
    const bool t_ok = slurp("acceptance_out/det_a/step_nn-mpc.csv") ==
                      slurp("acceptance_out/det_b/step_nn-mpc.csv");
    const bool ok = ds_ok && w_ok && t_ok;
    report(11, "identical seeds give byte-identical dataset, weights and trace", ok,
           std::string("dataset ") + (ds_ok ? "==" : "!=") + ", weights " +
               (w_ok ? "==" : "!=") + ", trace " + (t_ok ? "==" : "!="));
  }

  std::printf("%d of 11 criteria passed\n", 11 - g_failures);
  return g_failures;
}
