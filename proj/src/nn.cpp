#include "nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "errors.hpp"
#include "json.hpp"

namespace fcmpc {

Scaler Scaler::identity(int n_in, int n_out) {
  Scaler s;
  s.in_shift = Eigen::VectorXd::Zero(n_in);
  s.in_scale = Eigen::VectorXd::Ones(n_in);
  s.out_shift = Eigen::VectorXd::Zero(n_out);
  s.out_scale = Eigen::VectorXd::Ones(n_out);
  return s;
}

Eigen::VectorXd Scaler::scale_input(const Eigen::VectorXd& x) const {
  return (x - in_shift).cwiseQuotient(in_scale);
}

Eigen::VectorXd Scaler::unscale_output(const Eigen::VectorXd& y) const {
  return y.cwiseProduct(out_scale) + out_shift;
}

Eigen::VectorXd Scaler::scale_output(const Eigen::VectorXd& y) const {
  return (y - out_shift).cwiseQuotient(out_scale);
}

void Scaler::validate() const {
  if ((in_scale.array() <= 0.0).any() || (out_scale.array() <= 0.0).any()) {
    throw ConfigError("scaler: every scale must be strictly positive");
  }
  if (!in_shift.allFinite() || !in_scale.allFinite() || !out_shift.allFinite() ||
      !out_scale.allFinite()) {
    throw ConfigError("scaler: non-finite entry");
  }
}

Network Network::zeros(const std::vector<int>& shape) {
  if (shape.size() < 2) throw ConfigError("network shape needs at least input and output dims");
  Network net;
  for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
    net.weights.push_back(Eigen::MatrixXd::Zero(shape[l + 1], shape[l]));
    net.biases.push_back(Eigen::VectorXd::Zero(shape[l + 1]));
  }
  return net;
}

Network Network::he_uniform(const std::vector<int>& shape, Rng& rng) {
  Network net = zeros(shape);
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(shape[l]));
    for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j) {
        net.weights[l](i, j) = rng.uniform(-limit, limit);
      }
    }
  }
  return net;
}

std::vector<int> Network::shape() const {
  std::vector<int> s;
  s.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& w : weights) s.push_back(static_cast<int>(w.rows()));
  return s;
}

void Network::validate() const {
  if (weights.empty() || weights.size() != biases.size()) {
    throw ConfigError("network: empty or inconsistent layer lists");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (biases[l].size() != weights[l].rows()) {
      throw ConfigError("network: bias size mismatch at layer " + std::to_string(l));
    }
    if (l > 0 && weights[l].cols() != weights[l - 1].rows()) {
      throw ConfigError("network: shape chain broken at layer " + std::to_string(l));
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw ConfigError("network: non-finite parameter at layer " + std::to_string(l));
    }
  }
}

Eigen::MatrixXd forward_scaled(const Network& net, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    a = (net.weights[l] * a).colwise() + net.biases[l];
    if (l + 1 < net.weights.size()) a = a.cwiseMax(0.0);
  }
  return a;
}

Eigen::VectorXd forward(const Network& net, const Scaler& scaler, const Eigen::VectorXd& input) {
  if (input.size() != net.input_dim()) {
    throw ConfigError("forward: input size " + std::to_string(input.size()) +
                      " does not match network input dim " + std::to_string(net.input_dim()));
  }
  if (!input.allFinite()) throw ConfigError("forward: non-finite input");
  const Eigen::VectorXd xs = scaler.scale_input(input);
  return scaler.unscale_output(forward_scaled(net, xs));
}

double loss_scaled(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() == 0) throw ConfigError("loss: empty batch");
  const Eigen::MatrixXd e = forward_scaled(net, x) - y;
  return e.squaredNorm() / static_cast<double>(e.size());
}

double loss(const Network& net, const Scaler& scaler, const Dataset& dataset) {
  if (dataset.records.empty()) throw ConfigError("loss: empty dataset");
  const auto n = static_cast<Eigen::Index>(dataset.records.size());
  Eigen::MatrixXd x(5, n), y(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DataRecord& r = dataset.records[i];
    x.col(i) << r.q_h2, r.q_air, r.current, r.v0, r.p0;
    y.col(i) << r.v1, r.p1;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    x.col(i) = scaler.scale_input(x.col(i));
    y.col(i) = scaler.scale_output(y.col(i));
  }
  return loss_scaled(net, x, y);
}

Gradients backward(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() == 0) throw ConfigError("backward: empty batch");
  const std::size_t n_layers = net.weights.size();

  // Forward, keeping pre-activations.
  std::vector<Eigen::MatrixXd> activations(n_layers + 1);
  std::vector<Eigen::MatrixXd> pre(n_layers);
  activations[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    pre[l] = (net.weights[l] * activations[l]).colwise() + net.biases[l];
    activations[l + 1] = (l + 1 < n_layers) ? pre[l].cwiseMax(0.0) : pre[l];
  }

  // d loss / d output, with loss = sum(e^2) / (batch * out_dim).
  const double inv = 2.0 / static_cast<double>(x.cols() * net.output_dim());
  Eigen::MatrixXd delta = inv * (activations[n_layers] - y);

  Gradients g;
  g.weights.resize(n_layers);
  g.biases.resize(n_layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    g.weights[l] = delta * activations[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      // ReLU subgradient: 1 for z > 0, 0 at and below 0.
      delta = (net.weights[l].transpose() * delta).array() *
              (pre[l - 1].array() > 0.0).cast<double>();
    }
  }
  return g;
}

namespace {

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;

  explicit AdamState(const Network& net) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
      vw.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
      mb.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
      vb.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
  }

  void update(Network& net, const Gradients& g, const TrainConfig& c) {
    ++t;
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      mw[l] = c.beta1 * mw[l] + (1.0 - c.beta1) * g.weights[l];
      vw[l] = c.beta2 * vw[l] + (1.0 - c.beta2) * g.weights[l].cwiseProduct(g.weights[l]);
      net.weights[l].array() -= c.learning_rate * (mw[l].array() / bc1) /
                                ((vw[l].array() / bc2).sqrt() + c.epsilon);
      mb[l] = c.beta1 * mb[l] + (1.0 - c.beta1) * g.biases[l];
      vb[l] = c.beta2 * vb[l] + (1.0 - c.beta2) * g.biases[l].cwiseProduct(g.biases[l]);
      net.biases[l].array() -= c.learning_rate * (mb[l].array() / bc1) /
                               ((vb[l].array() / bc2).sqrt() + c.epsilon);
    }
  }
};

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (!(val_fraction > 0.0) || !(val_fraction < 1.0)) {
    throw ConfigError("train: val_fraction must lie in (0,1)");
  }
}

TrainedModel train(const Dataset& dataset, const TrainConfig& config) {
  config.validate();
  const std::size_t n = dataset.records.size();
  if (n < 10) throw ConfigError("train: need at least 10 records, got " + std::to_string(n));

  Rng rng(config.seed);

  // Seeded shuffle, then 90/10 (val_fraction) split.
  std::vector<std::size_t> order = rng.permutation(n);
  const std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                         std::llround(config.val_fraction * n)));
  const std::size_t n_train = n - n_val;
  if (n_train < 1) throw ConfigError("train: empty training split");

  auto fill = [&](std::size_t begin, std::size_t count, Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
    x.resize(5, count);
    y.resize(2, count);
    for (std::size_t i = 0; i < count; ++i) {
      const DataRecord& r = dataset.records[order[begin + i]];
      x.col(i) << r.q_h2, r.q_air, r.current, r.v0, r.p0;
      y.col(i) << r.v1, r.p1;
    }
  };
  Eigen::MatrixXd x_train, y_train, x_val, y_val;
  fill(0, n_train, x_train, y_train);
  fill(n_train, n_val, x_val, y_val);

  // Standardize using training-split statistics only.
  Scaler scaler;
  auto fit = [](const Eigen::MatrixXd& m, Eigen::VectorXd& shift, Eigen::VectorXd& scale) {
    shift = m.rowwise().mean();
    Eigen::VectorXd var = (m.colwise() - shift).array().square().rowwise().mean();
    scale = var.array().sqrt().max(1e-12);
  };
  fit(x_train, scaler.in_shift, scaler.in_scale);
  fit(y_train, scaler.out_shift, scaler.out_scale);
  scaler.validate();

  auto apply = [](Eigen::MatrixXd& m, const Eigen::VectorXd& shift, const Eigen::VectorXd& scale) {
    m = (m.colwise() - shift).array().colwise() / scale.array();
  };
  apply(x_train, scaler.in_shift, scaler.in_scale);
  apply(y_train, scaler.out_shift, scaler.out_scale);
  apply(x_val, scaler.in_shift, scaler.in_scale);
  apply(y_val, scaler.out_shift, scaler.out_scale);

  std::vector<int> shape;
  shape.push_back(5);
  for (int h : config.hidden) shape.push_back(h);
  shape.push_back(2);

  Network net = Network::he_uniform(shape, rng);
  AdamState adam(net);

  TrainedModel out;
  out.scaler = scaler;
  Network best = net;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0, since_best = 0;

  std::vector<std::size_t> idx(n_train);
  for (std::size_t i = 0; i < n_train; ++i) idx[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(idx);
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t count = std::min<std::size_t>(config.batch_size, n_train - start);
      Eigen::MatrixXd xb(5, count), yb(2, count);
      for (std::size_t i = 0; i < count; ++i) {
        xb.col(i) = x_train.col(idx[start + i]);
        yb.col(i) = y_train.col(idx[start + i]);
      }
      adam.update(net, backward(net, xb, yb), config);
    }

    const double tl = loss_scaled(net, x_train, y_train);
    const double vl = loss_scaled(net, x_val, y_val);
    if (!std::isfinite(tl) || !std::isfinite(vl)) {
      throw TrainingDivergedError("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    out.report.train_loss.push_back(tl);
    out.report.val_loss.push_back(vl);
    out.report.epochs_run = epoch + 1;

    if (vl < best_val) {
      best_val = vl;
      best = net;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  out.net = best;
  out.report.best_epoch = best_epoch;
  out.report.best_val_loss = best_val;
  return out;
}

void save_weights(const Network& net, const Scaler& scaler, const std::string& path,
                  const std::string& meta_hash, double val_mse) {
  net.validate();
  scaler.validate();
  nlohmann::json j;
  j["format"] = "fcmpc-weights";
  j["version"] = 1;
  j["shape"] = net.shape();
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < net.weights[l].cols(); ++k) row.push_back(net.weights[l](i, k));
      w.push_back(row);
    }
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) b.push_back(net.biases[l](i));
    layers.push_back({{"w", w}, {"b", b}});
  }
  j["layers"] = layers;
  auto vec = [](const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  j["scaler"] = {{"in_shift", vec(scaler.in_shift)},
                 {"in_scale", vec(scaler.in_scale)},
                 {"out_shift", vec(scaler.out_shift)},
                 {"out_scale", vec(scaler.out_scale)}};
  j["meta"] = {{"hash", meta_hash}, {"val_mse", val_mse}};

  std::ofstream f(path);
  if (!f) throw IoError("save_weights: cannot open " + path);
  f << j.dump(1) << "\n";
  f.close();
  if (!f) throw IoError("save_weights: write failed for " + path);
}

TrainedModel load_weights(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("load_weights: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_weights: corrupt file " + path + ": " + e.what());
  }

  if (j.value("format", "") != "fcmpc-weights") {
    throw IoError("load_weights: " + path + " is not a weights file");
  }
  if (j.value("version", -1) != 1) {
    throw IoError("load_weights: unsupported version in " + path);
  }

  const std::vector<int> shape = j.at("shape").get<std::vector<int>>();
  if (shape.size() < 2 || shape.front() != 5) {
    throw IoError("load_weights: input layer must have 5 nodes, got " +
                  (shape.empty() ? std::string("none") : std::to_string(shape.front())));
  }
  if (shape.back() != 2) {
    throw IoError("load_weights: output layer " + std::to_string(shape.size() - 1) +
                  " must have 2 nodes, got " + std::to_string(shape.back()));
  }

  TrainedModel m;
  const auto& layers = j.at("layers");
  if (layers.size() != shape.size() - 1) {
    throw IoError("load_weights: layer count does not match declared shape");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].at("w");
    const auto& b = layers[l].at("b");
    if (static_cast<int>(w.size()) != shape[l + 1] || static_cast<int>(b.size()) != shape[l + 1]) {
      throw IoError("load_weights: layer " + std::to_string(l) + " has " +
                    std::to_string(w.size()) + " rows, shape declares " +
                    std::to_string(shape[l + 1]));
    }
    Eigen::MatrixXd wm(shape[l + 1], shape[l]);
    for (int i = 0; i < shape[l + 1]; ++i) {
      if (static_cast<int>(w[i].size()) != shape[l]) {
        throw IoError("load_weights: layer " + std::to_string(l) + " row " + std::to_string(i) +
                      " has wrong width");
      }
      for (int k = 0; k < shape[l]; ++k) wm(i, k) = w[i][k].get<double>();
    }
    Eigen::VectorXd bv(shape[l + 1]);
    for (int i = 0; i < shape[l + 1]; ++i) bv(i) = b[i].get<double>();
    m.net.weights.push_back(std::move(wm));
    m.net.biases.push_back(std::move(bv));
  }

  auto getvec = [&](const char* name, Eigen::Index expect) {
    const auto& a = j.at("scaler").at(name);
    if (static_cast<Eigen::Index>(a.size()) != expect) {
      throw IoError(std::string("load_weights: scaler ") + name + " has wrong length");
    }
    Eigen::VectorXd v(expect);
    for (Eigen::Index i = 0; i < expect; ++i) v(i) = a[i].get<double>();
    return v;
  };
  m.scaler.in_shift = getvec("in_shift", 5);
  m.scaler.in_scale = getvec("in_scale", 5);
  m.scaler.out_shift = getvec("out_shift", 2);
  m.scaler.out_scale = getvec("out_scale", 2);

  m.net.validate();
  m.scaler.validate();
  if (j.contains("meta")) m.report.best_val_loss = j["meta"].value("val_mse", 0.0);
  return m;
}

}  // namespace fcmpc
