#pragma once

#include <Eigen/Dense>

#include "nn.hpp"

namespace fcmpc {

// Forward-mode scalar: value plus a single tangent component.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}

  Dual operator+(const Dual& o) const { return {v + o.v, d + o.d}; }
  Dual operator-(const Dual& o) const { return {v - o.v, d - o.d}; }
  Dual operator*(const Dual& o) const { return {v * o.v, d * o.v + v * o.d}; }
  Dual operator/(const Dual& o) const { return {v / o.v, (d * o.v - v * o.d) / (o.v * o.v)}; }
  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
};

inline Dual operator*(double a, const Dual& x) { return {a * x.v, a * x.d}; }
inline Dual operator+(double a, const Dual& x) { return {a + x.v, x.d}; }

// ReLU with derivative 0 at and below the kink (matches the training
// backward pass).
inline Dual relu(const Dual& x) { return x.v > 0.0 ? x : Dual{0.0, 0.0}; }

// 2x5 Jacobian of the network map in physical units. Rows (V_FC, P_H2),
// columns (Q_H2, Q_air, I, V_FC, P_H2); the scaler chain rule is included.
using Jacobian = Eigen::Matrix<double, 2, 5>;

// One forward-mode pass per input direction (5 passes).
Jacobian jacobian(const Network& net, const Scaler& scaler, const Eigen::VectorXd& point);

// Jacobian of the raw scaled-space network at a scaled input point.
Eigen::MatrixXd jacobian_scaled(const Network& net, const Eigen::VectorXd& x_scaled);

// Directional derivative: one dual pass with tangent `direction`
// (physical units). Equals jacobian(point) * direction by linearity.
Eigen::Vector2d jvp(const Network& net, const Scaler& scaler, const Eigen::VectorXd& point,
                    const Eigen::VectorXd& direction);

}  // namespace fcmpc
