#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "rng.hpp"

namespace fcmpc {

// Per-feature affine normalization. Applied as (x - shift) / scale on the
// way in and y * scale + shift on the way out, so callers always see
// physical units (lpm, A, V, atm).
struct Scaler {
  Eigen::VectorXd in_shift, in_scale;    // input_dim
  Eigen::VectorXd out_shift, out_scale;  // output_dim

  static Scaler identity(int n_in, int n_out);

  Eigen::VectorXd scale_input(const Eigen::VectorXd& x) const;
  Eigen::VectorXd unscale_output(const Eigen::VectorXd& y) const;
  Eigen::VectorXd scale_output(const Eigen::VectorXd& y) const;

  void validate() const;  // every scale strictly positive
};

// Fully connected ReLU network (identity output activation). Layer l maps
// shape[l] -> shape[l+1] via weights[l] (out x in) and biases[l].
struct Network {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Network zeros(const std::vector<int>& shape);
  static Network he_uniform(const std::vector<int>& shape, Rng& rng);

  std::vector<int> shape() const;
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  void validate() const;
};

// Gradient container, same shapes as the network parameters.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

struct TrainConfig {
  int epochs = 2000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;
  int patience = 50;          // early stop after this many epochs without val improvement
  double val_fraction = 0.1;  // seeded 90/10 split
  std::vector<int> hidden = {16, 32, 8};

  void validate() const;
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch, scaled MSE
  std::vector<double> val_loss;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  int epochs_run = 0;
};

struct TrainedModel {
  Network net;
  Scaler scaler;
  TrainReport report;
};

// Physical-units forward pass: scale, affine+ReLU chain, unscale.
Eigen::VectorXd forward(const Network& net, const Scaler& scaler, const Eigen::VectorXd& input);

// Scaled-space batch forward; columns are samples.
Eigen::MatrixXd forward_scaled(const Network& net, const Eigen::MatrixXd& x);

// Mean squared error over scaled outputs, averaged over records and output
// dimensions.
double loss(const Network& net, const Scaler& scaler, const Dataset& dataset);
double loss_scaled(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// Reverse-mode gradient of loss_scaled. ReLU subgradient at exactly 0 is 0.
Gradients backward(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// Adam over seeded minibatches; scaler fit on the training split only;
// early stopping restores the best validation weights.
TrainedModel train(const Dataset& dataset, const TrainConfig& config);

// Versioned JSON weights file; save/load round-trips bit-exactly.
void save_weights(const Network& net, const Scaler& scaler, const std::string& path,
                  const std::string& meta_hash = "", double val_mse = 0.0);
TrainedModel load_weights(const std::string& path);

}  // namespace fcmpc
