#include "autodiff.hpp"

#include <vector>

#include "errors.hpp"

namespace fcmpc {

namespace {

// Dual forward pass through the raw network (scaled space).
std::vector<Dual> forward_dual(const Network& net, std::vector<Dual> a) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const Eigen::MatrixXd& w = net.weights[l];
    const Eigen::VectorXd& b = net.biases[l];
    std::vector<Dual> out(w.rows());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      Dual acc{b(i), 0.0};
      for (Eigen::Index j = 0; j < w.cols(); ++j) acc += w(i, j) * a[j];
      out[i] = (l + 1 < net.weights.size()) ? relu(acc) : acc;
    }
    a = std::move(out);
  }
  return a;
}

}  // namespace

Eigen::MatrixXd jacobian_scaled(const Network& net, const Eigen::VectorXd& x_scaled) {
  const int n_in = net.input_dim();
  const int n_out = net.output_dim();
  if (x_scaled.size() != n_in) throw ConfigError("jacobian_scaled: input size mismatch");

  Eigen::MatrixXd jac(n_out, n_in);
  for (int j = 0; j < n_in; ++j) {
    std::vector<Dual> x(n_in);
    for (int k = 0; k < n_in; ++k) x[k] = Dual{x_scaled(k), k == j ? 1.0 : 0.0};
    const std::vector<Dual> y = forward_dual(net, std::move(x));
    for (int i = 0; i < n_out; ++i) jac(i, j) = y[i].d;
  }
  return jac;
}

Jacobian jacobian(const Network& net, const Scaler& scaler, const Eigen::VectorXd& point) {
  if (net.input_dim() != 5 || net.output_dim() != 2) {
    throw ConfigError("jacobian: network must map 5 inputs to 2 outputs");
  }
  if (point.size() != 5 || !point.allFinite()) {
    throw ConfigError("jacobian: point must be a finite 5-vector");
  }

  const Eigen::VectorXd xs = scaler.scale_input(point);
  Jacobian jac;
  for (int j = 0; j < 5; ++j) {
    // Tangent e_j in physical units maps to 1/in_scale_j in scaled space.
    std::vector<Dual> x(5);
    for (int k = 0; k < 5; ++k) x[k] = Dual{xs(k), k == j ? 1.0 / scaler.in_scale(j) : 0.0};
    const std::vector<Dual> y = forward_dual(net, std::move(x));
    for (int i = 0; i < 2; ++i) jac(i, j) = y[i].d * scaler.out_scale(i);
  }
  if (!jac.allFinite()) throw ConfigError("jacobian: non-finite derivative");
  return jac;
}

Eigen::Vector2d jvp(const Network& net, const Scaler& scaler, const Eigen::VectorXd& point,
                    const Eigen::VectorXd& direction) {
  if (point.size() != 5 || direction.size() != 5) {
    throw ConfigError("jvp: point and direction must be 5-vectors");
  }
  const Eigen::VectorXd xs = scaler.scale_input(point);
  std::vector<Dual> x(5);
  for (int k = 0; k < 5; ++k) x[k] = Dual{xs(k), direction(k) / scaler.in_scale(k)};
  const std::vector<Dual> y = forward_dual(net, std::move(x));
  return {y[0].d * scaler.out_scale(0), y[1].d * scaler.out_scale(1)};
}

}  // namespace fcmpc
