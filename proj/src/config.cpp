#include "config.hpp"

#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace fcmpc {

const char* to_string(ControllerKind kind) {
  return kind == ControllerKind::NnMpc ? "nn-mpc" : "plant-mpc";
}

ControllerKind controller_kind_from_string(const std::string& s) {
  if (s == "nn-mpc") return ControllerKind::NnMpc;
  if (s == "plant-mpc") return ControllerKind::PlantMpc;
  throw ConfigError("controller must be 'nn-mpc' or 'plant-mpc', got '" + s + "'");
}

std::string RunConfig::resolved_dataset_path() const {
  return dataset_path.empty() ? out_dir + "/dataset.csv" : dataset_path;
}

std::string RunConfig::resolved_weights_path() const {
  return weights_path.empty() ? out_dir + "/weights.json" : weights_path;
}

void RunConfig::validate() const {
  if (schema_version != 1) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(schema_version));
  }
  plant.validate();
  if (noise.v_fc < 0.0 || noise.p_h2 < 0.0) throw ConfigError("config: noise stds must be >= 0");
  if (datagen.n_samples < 1) throw ConfigError("config: datagen.n_samples must be >= 1");
  if (!(datagen.dt > 0.0)) throw ConfigError("config: datagen.dt must be positive");
  datagen.bounds.validate();
  if (datagen.warmup_min < 0 || datagen.warmup_max < datagen.warmup_min) {
    throw ConfigError("config: datagen warm-up range invalid");
  }
  train.validate();
  mpc.validate();
  scenario.validate();
  // The controller only knows the plant inside the trained envelope.
  for (const auto& [t, i] : scenario.current_knots) {
    if (i < datagen.bounds.low[2] || i > datagen.bounds.high[2]) {
      throw ConfigError("config: scenario current " + std::to_string(i) +
                        " A leaves the calibrated envelope [" +
                        std::to_string(datagen.bounds.low[2]) + ", " +
                        std::to_string(datagen.bounds.high[2]) + "]");
    }
  }
  if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
}

namespace {

using nlohmann::json;

double num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("config: ") + key + " must be a number");
  return j[key].get<double>();
}

void parse_plant(const json& j, PlantParams& p) {
  p.n_cells = num(j, "n_cells", p.n_cells);
  p.faraday = num(j, "faraday", p.faraday);
  p.gas_constant = num(j, "gas_constant", p.gas_constant);
  p.temperature = num(j, "temperature", p.temperature);
  p.anode_volume = num(j, "anode_volume", p.anode_volume);
  p.cathode_volume = num(j, "cathode_volume", p.cathode_volume);
  p.ambient_pressure = num(j, "ambient_pressure", p.ambient_pressure);
  p.nernst_e0 = num(j, "nernst_e0", p.nernst_e0);
  p.r_ohmic = num(j, "r_ohmic", p.r_ohmic);
  p.act_coeff = num(j, "act_coeff", p.act_coeff);
  p.conc_coeff = num(j, "conc_coeff", p.conc_coeff);
  p.i_limit = num(j, "i_limit", p.i_limit);
  p.i_exchange = num(j, "i_exchange", p.i_exchange);
  p.act_h2_exp = num(j, "act_h2_exp", p.act_h2_exp);
  p.act_o2_exp = num(j, "act_o2_exp", p.act_o2_exp);
  p.h2_consumption_gain = num(j, "h2_consumption_gain", p.h2_consumption_gain);
  p.o2_consumption_gain = num(j, "o2_consumption_gain", p.o2_consumption_gain);
  p.outflow_coeff_anode = num(j, "outflow_coeff_anode", p.outflow_coeff_anode);
  p.outflow_coeff_cathode = num(j, "outflow_coeff_cathode", p.outflow_coeff_cathode);
  p.o2_fraction_air = num(j, "o2_fraction_air", p.o2_fraction_air);
}

void parse_bounds(const json& j, SampleBounds& b) {
  auto dim = [&](const char* key, int d) {
    if (!j.contains(key)) return;
    const auto& a = j[key];
    if (!a.is_array() || a.size() != 2) {
      throw ConfigError(std::string("config: bounds.") + key + " must be [low, high]");
    }
    b.low[d] = a[0].get<double>();
    b.high[d] = a[1].get<double>();
  };
  dim("q_h2", 0);
  dim("q_air", 1);
  dim("current", 2);
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);  // allow comments
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  RunConfig cfg;
  cfg.schema_version = static_cast<int>(num(j, "schema_version", 1));
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.timing = j.value("timing", cfg.timing);
  cfg.dataset_path = j.value("dataset", cfg.dataset_path);
  cfg.weights_path = j.value("weights", cfg.weights_path);
  if (j.contains("controller")) {
    cfg.controller = controller_kind_from_string(j["controller"].get<std::string>());
  }

  if (j.contains("plant")) parse_plant(j["plant"], cfg.plant);

  if (j.contains("noise")) {
    cfg.noise.v_fc = num(j["noise"], "v_std", cfg.noise.v_fc);
    cfg.noise.p_h2 = num(j["noise"], "p_std", cfg.noise.p_h2);
  }

  if (j.contains("datagen")) {
    const auto& d = j["datagen"];
    cfg.datagen.n_samples = static_cast<int>(num(d, "n_samples", cfg.datagen.n_samples));
    cfg.datagen.dt = num(d, "dt", cfg.datagen.dt);
    cfg.datagen.warmup_min = static_cast<int>(num(d, "warmup_min", cfg.datagen.warmup_min));
    cfg.datagen.warmup_max = static_cast<int>(num(d, "warmup_max", cfg.datagen.warmup_max));
    if (d.contains("bounds")) parse_bounds(d["bounds"], cfg.datagen.bounds);
  }

  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train.epochs = static_cast<int>(num(t, "epochs", cfg.train.epochs));
    cfg.train.batch_size = static_cast<int>(num(t, "batch_size", cfg.train.batch_size));
    cfg.train.learning_rate = num(t, "learning_rate", cfg.train.learning_rate);
    cfg.train.beta1 = num(t, "beta1", cfg.train.beta1);
    cfg.train.beta2 = num(t, "beta2", cfg.train.beta2);
    cfg.train.epsilon = num(t, "epsilon", cfg.train.epsilon);
    cfg.train.patience = static_cast<int>(num(t, "patience", cfg.train.patience));
    cfg.train.val_fraction = num(t, "val_fraction", cfg.train.val_fraction);
    if (t.contains("seed")) cfg.train.seed = t["seed"].get<std::uint64_t>();
    if (t.contains("hidden")) {
      cfg.train.hidden.clear();
      for (const auto& h : t["hidden"]) cfg.train.hidden.push_back(h.get<int>());
    }
  }

  if (j.contains("mpc")) {
    const auto& m = j["mpc"];
    cfg.mpc.horizon_pred = static_cast<int>(num(m, "horizon_pred", cfg.mpc.horizon_pred));
    cfg.mpc.horizon_ctrl = static_cast<int>(num(m, "horizon_ctrl", cfg.mpc.horizon_ctrl));
    cfg.mpc.q_weight = num(m, "q_weight", cfg.mpc.q_weight);
    if (m.contains("r_weight")) {
      const auto& r = m["r_weight"];
      if (!r.is_array() || r.size() != 2) throw ConfigError("config: mpc.r_weight must be [r1,r2]");
      cfg.mpc.r_weight << r[0].get<double>(), r[1].get<double>();
    }
    cfg.mpc.rho = num(m, "rho", cfg.mpc.rho);
    cfg.mpc.reference = num(m, "reference", cfg.mpc.reference);
    cfg.mpc.du_min = num(m, "du_min", cfg.mpc.du_min);
    cfg.mpc.du_max = num(m, "du_max", cfg.mpc.du_max);
    auto bounds2 = [&](const char* key, Eigen::Vector2d& out) {
      if (!m.contains(key)) return;
      const auto& a = m[key];
      if (!a.is_array() || a.size() != 2) {
        throw ConfigError(std::string("config: mpc.") + key + " must be [low, high]");
      }
      out << a[0].get<double>(), a[1].get<double>();
    };
    bounds2("q_h2_bounds", cfg.mpc.q_h2_bounds);
    bounds2("q_air_bounds", cfg.mpc.q_air_bounds);
    cfg.mpc.p_h2_max = num(m, "p_h2_max", cfg.mpc.p_h2_max);
    cfg.mpc.dt = num(m, "dt", cfg.mpc.dt);
    cfg.mpc.exact_state_jacobian = m.value("exact_state_jacobian", cfg.mpc.exact_state_jacobian);
    cfg.mpc.second_diff_enabled = m.value("second_diff_enabled", cfg.mpc.second_diff_enabled);
    cfg.mpc.d2u_min = num(m, "d2u_min", cfg.mpc.d2u_min);
    cfg.mpc.d2u_max = num(m, "d2u_max", cfg.mpc.d2u_max);
    cfg.mpc.qp_tol = num(m, "qp_tol", cfg.mpc.qp_tol);
    cfg.mpc.qp_max_iter = static_cast<int>(num(m, "qp_max_iter", cfg.mpc.qp_max_iter));
    cfg.mpc.qp_dump_dir = m.value("qp_dump_dir", cfg.mpc.qp_dump_dir);
  }

  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    if (s.contains("name")) cfg.scenario = Scenario::by_name(s["name"].get<std::string>());
    cfg.scenario.duration = num(s, "duration", cfg.scenario.duration);
    cfg.scenario.dt = num(s, "dt", cfg.scenario.dt);
    cfg.scenario.reference = num(s, "reference", cfg.scenario.reference);
    if (s.contains("initial_flows")) {
      const auto& a = s["initial_flows"];
      if (!a.is_array() || a.size() != 2) {
        throw ConfigError("config: scenario.initial_flows must be [q_h2, q_air]");
      }
      cfg.scenario.initial_flows << a[0].get<double>(), a[1].get<double>();
    }
    if (s.contains("current_knots")) {
      cfg.scenario.current_knots.clear();
      for (const auto& k : s["current_knots"]) {
        if (!k.is_array() || k.size() != 2) {
          throw ConfigError("config: scenario.current_knots entries must be [t, current]");
        }
        cfg.scenario.current_knots.emplace_back(k[0].get<double>(), k[1].get<double>());
      }
    }
  }

  // One seed drives all stages; the scenario and training streams are
  // derived so stages stay independent.
  cfg.scenario.noise = cfg.noise;
  cfg.scenario.seed = derive_seed(cfg.seed, 0x51e0);
  if (!j.contains("train") || !j["train"].contains("seed")) {
    cfg.train.seed = derive_seed(cfg.seed, 0x7a11);
  }
  // The controller tracks the scenario's reference.
  cfg.mpc.reference = cfg.scenario.reference;
  cfg.mpc.dt = cfg.scenario.dt;

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_hash(const RunConfig& config) {
  // Canonical serialization of the fields that affect results.
  std::ostringstream ss;
  ss.precision(17);
  const PlantParams& p = config.plant;
  ss << config.schema_version << '|' << config.seed << '|' << p.n_cells << '|' << p.faraday << '|'
     << p.gas_constant << '|' << p.temperature << '|' << p.anode_volume << '|' << p.cathode_volume
     << '|' << p.ambient_pressure << '|' << p.nernst_e0 << '|' << p.r_ohmic << '|' << p.act_coeff
     << '|' << p.conc_coeff << '|' << p.i_limit << '|' << p.i_exchange << '|' << p.act_h2_exp
     << '|' << p.act_o2_exp << '|' << p.h2_consumption_gain << '|' << p.o2_consumption_gain << '|'
     << p.outflow_coeff_anode << '|' << p.outflow_coeff_cathode << '|' << p.o2_fraction_air;
  ss << '|' << config.noise.v_fc << '|' << config.noise.p_h2;
  ss << '|' << config.datagen.n_samples << '|' << config.datagen.dt;
  for (int d = 0; d < 3; ++d) {
    ss << '|' << config.datagen.bounds.low[d] << '|' << config.datagen.bounds.high[d];
  }
  ss << '|' << config.datagen.warmup_min << '|' << config.datagen.warmup_max;
  const TrainConfig& t = config.train;
  ss << '|' << t.epochs << '|' << t.batch_size << '|' << t.learning_rate << '|' << t.beta1 << '|'
     << t.beta2 << '|' << t.epsilon << '|' << t.seed << '|' << t.patience << '|' << t.val_fraction;
  for (int h : t.hidden) ss << '|' << h;
  const MpcConfig& m = config.mpc;
  ss << '|' << m.horizon_pred << '|' << m.horizon_ctrl << '|' << m.q_weight << '|'
     << m.r_weight(0) << '|' << m.r_weight(1) << '|' << m.rho << '|' << m.reference << '|'
     << m.du_min << '|' << m.du_max << '|' << m.q_h2_bounds(0) << '|' << m.q_h2_bounds(1) << '|'
     << m.q_air_bounds(0) << '|' << m.q_air_bounds(1) << '|' << m.p_h2_max << '|' << m.dt << '|'
     << m.exact_state_jacobian << '|' << m.second_diff_enabled << '|' << m.d2u_min << '|'
     << m.d2u_max << '|' << m.qp_tol << '|' << m.qp_max_iter;
  const Scenario& s = config.scenario;
  ss << '|' << s.name << '|' << s.duration << '|' << s.dt << '|' << s.reference << '|'
     << s.initial_flows(0) << '|' << s.initial_flows(1);
  for (const auto& [kt, ki] : s.current_knots) ss << '|' << kt << '|' << ki;
  ss << '|' << to_string(config.controller);

  const std::string text = ss.str();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fcmpc
