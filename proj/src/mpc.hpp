#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "plant.hpp"
#include "qp.hpp"
#include "ssm.hpp"

namespace fcmpc {

struct MpcConfig {
  int horizon_pred = 20;  // H_p, steps
  int horizon_ctrl = 5;   // H_u <= H_p
  double q_weight = 30.0;
  // Hydrogen swings are priced 10x air: the anode valve couples flow into
  // the constrained pressure, so the controller leans on air first and
  // approaches the 2.5 atm limit with margin (see tools/tune_mpc).
  Eigen::Vector2d r_weight{1e-2, 1e-3};
  // Large enough that feasible steps report slack below 1e-4 atm even at
  // the pressure shadow prices this tuning reaches.
  double rho = 1e6;
  double reference = 48.0;
  double du_min = -40.0;  // per-step flow increment bounds, lpm
  double du_max = 20.0;
  Eigen::Vector2d q_h2_bounds{100.0, 400.0};
  Eigen::Vector2d q_air_bounds{300.0, 700.0};
  double p_h2_max = 2.5;  // atm, soft upper bound
  double dt = 0.5;
  bool exact_state_jacobian = false;  // use NN state partials in A
  // Optional second-difference (change-of-increment) bounds; off by default.
  bool second_diff_enabled = false;
  double d2u_min = 0.0;
  double d2u_max = 0.0;
  double qp_tol = 1e-6;
  int qp_max_iter = 4000;
  // Debug aid: when set, every per-step QP is dumped under this directory
  // for offline reproduction.
  std::string qp_dump_dir;

  void validate() const;
};

// Condensed prediction matrices over the horizon: trajectories of V, P_H2
// and the flow states as affine functions of the stacked increments
// U = [u^0 .. u^{Hu-1}]. Increments beyond H_u are zero (move blocking).
struct Condensed {
  Eigen::MatrixXd s_v, s_p;        // Hp x 2Hu
  Eigen::VectorXd v_free, p_free;  // Hp (free response, steps 1..Hp)
  double q_h2_0, q_air_0;          // flow states at step 0
};

Condensed condense(const StateSpaceModel& model, const MpcConfig& config,
                   const Eigen::Matrix<double, 5, 1>& x_init);

// Receding-horizon QP per the soft-constrained tracking cost:
// decision z = [u^0..u^{Hu-1}, eps^1..eps^Hp]; increment bounds, flow
// bounds on the propagated Q states, and P_H2 <= p_max + eps with eps >= 0.
QpProblem build_qp(const StateSpaceModel& model, const MpcConfig& config,
                   const Eigen::Matrix<double, 5, 1>& x_init, const Eigen::Vector2d& u_prev);

struct StepDecision {
  Eigen::Vector2d flows;       // commanded (q_h2, q_air), lpm
  Eigen::Vector2d increments;  // first optimized increments
  Eigen::VectorXd predicted_v;  // steps 1..Hp
  Eigen::VectorXd predicted_p;
  Eigen::VectorXd slacks;  // eps^1..eps^Hp
  double slack_max = 0.0;
  QpStatus qp_status = QpStatus::Solved;
  int qp_iterations = 0;
  double qp_objective = 0.0;
  bool degraded = false;  // QP failed; flows held
  bool clamped = false;   // output clamp engaged (anomaly)
};

struct ControllerState {
  Eigen::Vector2d flows;   // last applied (q_h2, q_air)
  Eigen::Vector2d u_prev;  // last applied increments
  double prev_current = 0.0;
  int steps = 0;
  std::vector<int> warm_hint;  // previous QP active set
};

// Receding-horizon controller. The caller supplies the operating-point
// Jacobian each step (from the network or from plant finite differences),
// so both controller flavours share one pipeline.
class MpcController {
 public:
  MpcController(const MpcConfig& config, const Eigen::Vector2d& initial_flows,
                double initial_current);

  StepDecision step(const Jacobian& jac, const Measurement& meas, double current);

  const ControllerState& state() const { return state_; }
  const MpcConfig& config() const { return config_; }

  // NN operating point for the Jacobian: (Q_H2, Q_air, I, V_meas, P_meas).
  Eigen::VectorXd operating_point(const Measurement& meas, double current) const;

 private:
  MpcConfig config_;
  ControllerState state_;
  QpSolver solver_;
};

// Baseline Jacobian from the surrogate plant: central finite differences of
// the one-step map over the true state (the extra system knowledge the
// physical-model controller has). State partials are identity.
Jacobian plant_fd_jacobian(const PlantState& true_state, const Eigen::Vector2d& flows,
                           double current, const PlantParams& params, double dt);

}  // namespace fcmpc
