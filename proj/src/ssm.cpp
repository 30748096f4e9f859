#include "ssm.hpp"

#include "errors.hpp"

namespace fcmpc {

StateSpaceModel assemble(const Jacobian& jac, StateCoupling coupling) {
  if (!jac.allFinite()) throw ConfigError("assemble: non-finite Jacobian");

  StateSpaceModel m;
  m.A.setZero();
  m.B.setZero();
  m.C.setZero();

  if (coupling == StateCoupling::Identity) {
    m.A(0, 0) = 1.0;
    m.A(1, 1) = 1.0;
  } else {
    m.A(0, 0) = jac(0, 3);
    m.A(0, 1) = jac(0, 4);
    m.A(1, 0) = jac(1, 3);
    m.A(1, 1) = jac(1, 4);
  }
  m.A(0, 2) = jac(0, 2);
  m.A(1, 2) = jac(1, 2);
  m.A(3, 3) = 1.0;
  m.A(4, 4) = 1.0;

  m.B(0, 0) = jac(0, 0);
  m.B(0, 1) = jac(0, 1);
  m.B(1, 0) = jac(1, 0);
  m.B(1, 1) = jac(1, 1);
  m.B(3, 0) = 1.0;
  m.B(4, 1) = 1.0;

  m.C(0, 0) = 1.0;
  return m;
}

std::vector<Eigen::Matrix<double, 5, 1>> predict(const StateSpaceModel& model,
                                                 const Eigen::Matrix<double, 5, 1>& x0,
                                                 const std::vector<Eigen::Vector2d>& inputs,
                                                 const std::vector<double>& anticipated_di) {
  if (!anticipated_di.empty() && anticipated_di.size() != inputs.size()) {
    throw ConfigError("predict: anticipated_di length must match inputs");
  }
  std::vector<Eigen::Matrix<double, 5, 1>> traj;
  traj.reserve(inputs.size() + 1);
  traj.push_back(x0);
  Eigen::Matrix<double, 5, 1> x = x0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    x = model.A * x + model.B * inputs[k];
    x(2) = anticipated_di.empty() ? 0.0 : anticipated_di[k];
    traj.push_back(x);
  }
  return traj;
}

}  // namespace fcmpc
