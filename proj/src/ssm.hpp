#pragma once

#include <Eigen/Dense>
#include <vector>

#include "autodiff.hpp"

namespace fcmpc {

// Discrete state-space model at the 0.5 s control period.
// State [V_FC, P_H2, dI, Q_H2, Q_air], input [dQ_H2, dQ_air], output V_FC.
struct StateSpaceModel {
  Eigen::Matrix<double, 5, 5> A;
  Eigen::Matrix<double, 5, 2> B;
  Eigen::Matrix<double, 1, 5> C;
};

enum class StateCoupling {
  Identity,      // V and P_H2 diagonal entries fixed at 1
  FromJacobian,  // V/P_H2 block taken from the network state partials
};

// Fill (A, B, C) from the 2x5 Jacobian:
//   A = [1 0 dV/dI 0 0; 0 1 dP/dI 0 0; 0...; 0 0 0 1 0; 0 0 0 0 1]
//   B = [dV/dQh2 dV/dQair; dP/dQh2 dP/dQair; 0 0; 1 0; 0 1]
//   C = [1 0 0 0 0]
// With StateCoupling::FromJacobian the top-left 2x2 of A uses the state
// partials instead of the identity.
StateSpaceModel assemble(const Jacobian& jac, StateCoupling coupling = StateCoupling::Identity);

// Iterate x' = A x + B u. The dI state component is overwritten after each
// step with the anticipated current increment for that step (zero when
// `anticipated_di` is empty: load changes are not foreseen).
// Returns the trajectory x^0..x^H (H = inputs.size()).
std::vector<Eigen::Matrix<double, 5, 1>> predict(
    const StateSpaceModel& model, const Eigen::Matrix<double, 5, 1>& x0,
    const std::vector<Eigen::Vector2d>& inputs,
    const std::vector<double>& anticipated_di = {});

}  // namespace fcmpc
