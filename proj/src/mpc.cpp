#include "mpc.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace fcmpc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void MpcConfig::validate() const {
  if (horizon_pred < 1) throw ConfigError("mpc: horizon_pred must be >= 1");
  if (horizon_ctrl < 1 || horizon_ctrl > horizon_pred) {
    throw ConfigError("mpc: need 1 <= horizon_ctrl <= horizon_pred");
  }
  if (!(q_weight > 0.0) || !(r_weight.array() > 0.0).all()) {
    throw ConfigError("mpc: q_weight and r_weight must be positive");
  }
  if (!(rho > 0.0) || rho < 1e3 * std::max(q_weight, r_weight.maxCoeff())) {
    throw ConfigError("mpc: rho must exceed 1e3 * max(q_weight, r_weight)");
  }
  if (!(du_min < du_max)) throw ConfigError("mpc: du_min must be below du_max");
  if (!(q_h2_bounds(0) < q_h2_bounds(1)) || !(q_air_bounds(0) < q_air_bounds(1))) {
    throw ConfigError("mpc: flow bounds must have low < high");
  }
  if (!(p_h2_max > 0.0)) throw ConfigError("mpc: p_h2_max must be positive");
  if (!(dt > 0.0)) throw ConfigError("mpc: dt must be positive");
  if (second_diff_enabled && !(d2u_min < d2u_max)) {
    throw ConfigError("mpc: second-difference bounds must have low < high");
  }
}

Condensed condense(const StateSpaceModel& model, const MpcConfig& config,
                   const Eigen::Matrix<double, 5, 1>& x_init) {
  const int hp = config.horizon_pred;
  const int hu = config.horizon_ctrl;

  Condensed c;
  c.s_v = Eigen::MatrixXd::Zero(hp, 2 * hu);
  c.s_p = Eigen::MatrixXd::Zero(hp, 2 * hu);
  c.v_free.resize(hp);
  c.p_free.resize(hp);
  c.q_h2_0 = x_init(3);
  c.q_air_0 = x_init(4);

  // Input-effect blocks A^j B for j = 0..Hp-1.
  std::vector<Eigen::Matrix<double, 5, 2>> ab(hp);
  ab[0] = model.B;
  for (int j = 1; j < hp; ++j) ab[j] = model.A * ab[j - 1];

  Eigen::Matrix<double, 5, 1> x_free = x_init;
  for (int k = 1; k <= hp; ++k) {
    x_free = model.A * x_free;
    c.v_free(k - 1) = x_free(0);
    c.p_free(k - 1) = x_free(1);
    for (int i = 0; i < std::min(k, hu); ++i) {
      c.s_v.block(k - 1, 2 * i, 1, 2) = ab[k - 1 - i].row(0);
      c.s_p.block(k - 1, 2 * i, 1, 2) = ab[k - 1 - i].row(1);
    }
  }
  return c;
}

QpProblem build_qp(const StateSpaceModel& model, const MpcConfig& config,
                   const Eigen::Matrix<double, 5, 1>& x_init, const Eigen::Vector2d& u_prev) {
  config.validate();
  const int hp = config.horizon_pred;
  const int hu = config.horizon_ctrl;
  const int nu = 2 * hu;
  const int n = nu + hp;  // increments then slacks

  const Condensed c = condense(model, config, x_init);

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(n, n);
  qp.g = Eigen::VectorXd::Zero(n);

  // Tracking + input effort (factor 2: QP standard form is 0.5 z'Hz).
  qp.H.topLeftCorner(nu, nu) = 2.0 * config.q_weight * c.s_v.transpose() * c.s_v;
  for (int i = 0; i < hu; ++i) {
    qp.H(2 * i, 2 * i) += 2.0 * config.r_weight(0);
    qp.H(2 * i + 1, 2 * i + 1) += 2.0 * config.r_weight(1);
  }
  qp.H.bottomRightCorner(hp, hp) = 2.0 * config.rho * Eigen::MatrixXd::Identity(hp, hp);
  qp.g.head(nu) = 2.0 * config.q_weight * c.s_v.transpose() *
                  (c.v_free.array() - config.reference).matrix();

  const int m_d2 = config.second_diff_enabled ? 2 * hu : 0;
  // Flow-state rows only up to H_u: increments stop there, so later rows
  // would duplicate row H_u exactly.
  const int m = nu + m_d2 + 2 * hu + hp + hp;
  qp.G = Eigen::MatrixXd::Zero(m, n);
  qp.lower = Eigen::VectorXd::Constant(m, -kInf);
  qp.upper = Eigen::VectorXd::Constant(m, kInf);
  int row = 0;

  // Per-step increment bounds.
  for (int k = 0; k < nu; ++k, ++row) {
    qp.G(row, k) = 1.0;
    qp.lower(row) = config.du_min;
    qp.upper(row) = config.du_max;
  }

  // Optional second-difference bounds: u^k - u^{k-1}, u^{-1} = u_prev.
  if (config.second_diff_enabled) {
    for (int k = 0; k < hu; ++k) {
      for (int j = 0; j < 2; ++j, ++row) {
        qp.G(row, 2 * k + j) = 1.0;
        double offset = 0.0;
        if (k == 0) {
          offset = u_prev(j);
        } else {
          qp.G(row, 2 * (k - 1) + j) = -1.0;
        }
        qp.lower(row) = config.d2u_min + offset;
        qp.upper(row) = config.d2u_max + offset;
      }
    }
  }

  // Flow bounds on the propagated Q states: Q^k = Q^0 + sum_{i<k} u^i.
  for (int k = 1; k <= hu; ++k) {
    for (int j = 0; j < 2; ++j, ++row) {
      for (int i = 0; i < k; ++i) qp.G(row, 2 * i + j) = 1.0;
      const Eigen::Vector2d b = (j == 0) ? config.q_h2_bounds : config.q_air_bounds;
      const double q0 = (j == 0) ? c.q_h2_0 : c.q_air_0;
      qp.lower(row) = b(0) - q0;
      qp.upper(row) = b(1) - q0;
    }
  }

  // Soft pressure bound: P^k - eps^k <= p_max  (upper-bound slack only).
  for (int k = 1; k <= hp; ++k, ++row) {
    qp.G.block(row, 0, 1, nu) = c.s_p.row(k - 1);
    qp.G(row, nu + k - 1) = -1.0;
    qp.upper(row) = config.p_h2_max - c.p_free(k - 1);
  }

  // Slack nonnegativity.
  for (int k = 0; k < hp; ++k, ++row) {
    qp.G(row, nu + k) = 1.0;
    qp.lower(row) = 0.0;
  }

  return qp;
}

MpcController::MpcController(const MpcConfig& config, const Eigen::Vector2d& initial_flows,
                             double initial_current)
    : config_(config), solver_(QpOptions{config.qp_tol, config.qp_max_iter}) {
  config_.validate();
  state_.flows = initial_flows;
  state_.u_prev.setZero();
  state_.prev_current = initial_current;
}

Eigen::VectorXd MpcController::operating_point(const Measurement& meas, double current) const {
  Eigen::VectorXd point(5);
  point << state_.flows(0), state_.flows(1), current, meas.v_fc, meas.p_h2;
  return point;
}

StepDecision MpcController::step(const Jacobian& jac, const Measurement& meas, double current) {
  if (!std::isfinite(meas.v_fc) || !std::isfinite(meas.p_h2)) {
    throw SimulationError("control step: non-finite measurement");
  }

  const StateSpaceModel model = assemble(
      jac, config_.exact_state_jacobian ? StateCoupling::FromJacobian : StateCoupling::Identity);

  Eigen::Matrix<double, 5, 1> x_init;
  x_init << meas.v_fc, meas.p_h2, current - state_.prev_current, state_.flows(0),
      state_.flows(1);

  const QpProblem qp = build_qp(model, config_, x_init, state_.u_prev);
  if (!config_.qp_dump_dir.empty()) {
    dump_problem(qp, config_.qp_dump_dir + "/qp_step_" + std::to_string(state_.steps) + ".txt");
  }
  const QpSolution sol = solver_.solve(qp, state_.warm_hint);

  const int hu = config_.horizon_ctrl;
  const int hp = config_.horizon_pred;

  StepDecision d;
  d.qp_status = sol.status;
  d.qp_iterations = sol.iterations;
  d.qp_objective = sol.objective;
  if (sol.status == QpStatus::Solved) {
    d.increments = sol.z.head<2>();
    d.slacks = sol.z.tail(hp);
    d.slack_max = d.slacks.size() > 0 ? d.slacks.maxCoeff() : 0.0;
  } else {
    // Safe fallback: hold the last applied flows.
    d.increments.setZero();
    d.slacks = Eigen::VectorXd::Zero(hp);
    d.degraded = true;
  }

  // The QP constraints make these clamps no-ops up to solver rounding;
  // any correction beyond that is an anomaly worth flagging.
  const Eigen::Vector2d inc_clamped =
      d.increments.cwiseMax(config_.du_min).cwiseMin(config_.du_max);
  if ((inc_clamped - d.increments).cwiseAbs().maxCoeff() > 1e-9) d.clamped = true;
  d.increments = inc_clamped;
  d.flows = state_.flows + d.increments;

  const Eigen::Vector2d lo{config_.q_h2_bounds(0), config_.q_air_bounds(0)};
  const Eigen::Vector2d hi{config_.q_h2_bounds(1), config_.q_air_bounds(1)};
  const Eigen::Vector2d flow_clamped = d.flows.cwiseMax(lo).cwiseMin(hi);
  if ((flow_clamped - d.flows).cwiseAbs().maxCoeff() > 1e-9) d.clamped = true;
  d.flows = flow_clamped;
  d.increments = d.flows - state_.flows;

  // Predicted trajectory from the solved increments (zeros when degraded).
  std::vector<Eigen::Vector2d> inc(hp, Eigen::Vector2d::Zero());
  if (sol.status == QpStatus::Solved) {
    for (int k = 0; k < hu; ++k) inc[k] = sol.z.segment<2>(2 * k);
  }
  const auto traj = predict(model, x_init, inc);
  d.predicted_v.resize(hp);
  d.predicted_p.resize(hp);
  for (int k = 1; k <= hp; ++k) {
    d.predicted_v(k - 1) = traj[k](0);
    d.predicted_p(k - 1) = traj[k](1);
  }

  state_.u_prev = d.flows - state_.flows;
  state_.flows = d.flows;
  state_.prev_current = current;
  state_.warm_hint = sol.active_rows;
  ++state_.steps;
  return d;
}

Jacobian plant_fd_jacobian(const PlantState& true_state, const Eigen::Vector2d& flows,
                           double current, const PlantParams& params, double dt) {
  const double h_q = 1.0;  // lpm
  const double h_i = 1.0;  // A

  auto one_step = [&](const PlantInputs& u) {
    const PlantState next = plant_step(true_state, u, params, dt);
    return plant_output(next, u, params);
  };

  Jacobian jac = Jacobian::Zero();
  const PlantInputs base{flows(0), flows(1), current};
  for (int col = 0; col < 3; ++col) {
    PlantInputs up = base, dn = base;
    double h = h_q;
    if (col == 0) { up.q_h2 += h_q; dn.q_h2 -= h_q; }
    if (col == 1) { up.q_air += h_q; dn.q_air -= h_q; }
    if (col == 2) { up.current += h_i; dn.current -= h_i; h = h_i; }
    const PlantOutput yp = one_step(up);
    const PlantOutput ym = one_step(dn);
    jac(0, col) = (yp.v_fc - ym.v_fc) / (2.0 * h);
    jac(1, col) = (yp.p_h2 - ym.p_h2) / (2.0 * h);
  }
  jac(0, 3) = 1.0;
  jac(1, 4) = 1.0;
  return jac;
}

}  // namespace fcmpc
