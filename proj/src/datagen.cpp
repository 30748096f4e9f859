#include "datagen.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"
#include "version.hpp"

namespace fcmpc {

void SampleBounds::validate() const {
  for (int d = 0; d < 3; ++d) {
    if (!(low[d] < high[d]) || !std::isfinite(low[d]) || !std::isfinite(high[d])) {
      throw ConfigError("sample bounds: low must be strictly below high in every dimension");
    }
  }
}

std::vector<std::array<double, 3>> lhs_sample(int n, const SampleBounds& bounds, Rng& rng) {
  if (n < 1) throw ConfigError("lhs_sample: n must be >= 1");
  bounds.validate();

  std::vector<std::array<double, 3>> points(n);
  for (int d = 0; d < 3; ++d) {
    const std::vector<std::size_t> strata = rng.permutation(static_cast<std::size_t>(n));
    const double width = (bounds.high[d] - bounds.low[d]) / n;
    for (int j = 0; j < n; ++j) {
      points[j][d] = bounds.low[d] + (static_cast<double>(strata[j]) + rng.uniform()) * width;
    }
    // Marginal stratification must hold exactly on every run.
    std::vector<char> seen(n, 0);
    for (int j = 0; j < n; ++j) {
      const int s = std::min(n - 1, static_cast<int>((points[j][d] - bounds.low[d]) / width));
      assert(!seen[s]);
      seen[s] = 1;
    }
  }
  return points;
}

namespace {

PlantInputs random_inputs(const SampleBounds& b, Rng& rng) {
  return PlantInputs{rng.uniform(b.low[0], b.high[0]), rng.uniform(b.low[1], b.high[1]),
                     rng.uniform(b.low[2], b.high[2])};
}

}  // namespace

Dataset collect(const PlantParams& params, const std::vector<std::array<double, 3>>& samples,
                const SampleBounds& bounds, const CollectConfig& config) {
  params.validate();
  if (config.warmup_min < 0 || config.warmup_max < config.warmup_min) {
    throw ConfigError("collect: warm-up step range invalid");
  }

  Dataset ds;
  ds.dt = config.dt;
  ds.seed = config.seed;
  ds.bounds = bounds;
  ds.records.reserve(samples.size());

  for (std::size_t i = 0; i < samples.size(); ++i) {
    Rng rng(derive_seed(config.seed, i));
    const PlantInputs u{samples[i][0], samples[i][1], samples[i][2]};
    try {
      // Warm-up walk: start at the equilibrium of a random input triple,
      // then take a random number of randomized steps so x_k covers the
      // reachable region rather than a single operating point.
      PlantState state = plant_equilibrium(random_inputs(bounds, rng), params);
      const int n_warm =
          config.warmup_min +
          static_cast<int>(rng.uniform_int(config.warmup_max - config.warmup_min + 1));
      for (int w = 0; w < n_warm; ++w) {
        state = plant_step(state, random_inputs(bounds, rng), params, config.dt);
      }

      // Measure, step once under the sampled inputs, measure again. The
      // sampled current applies from the measurement instant onward.
      const Measurement x0 =
          measure(plant_output(state, u, params), config.noise, rng);
      const PlantState next = plant_step(state, u, params, config.dt);
      const Measurement x1 = measure(plant_output(next, u, params), config.noise, rng);

      ds.records.push_back({u.q_h2, u.q_air, u.current, x0.v_fc, x0.p_h2, x1.v_fc, x1.p_h2});
    } catch (const std::runtime_error&) {
      ++ds.skipped;
    }
  }

  if (ds.skipped * 100 > static_cast<int>(samples.size())) {
    throw SimulationError("collect: more than 1% of samples failed plant integration (" +
                          std::to_string(ds.skipped) + " of " +
                          std::to_string(samples.size()) + ")");
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("save_dataset: cannot open " + path);
  f << "qh2,qair,i,v0,p0,v1,p1\n";
  char buf[256];
  for (const DataRecord& r : dataset.records) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.q_h2,
                  r.q_air, r.current, r.v0, r.p0, r.v1, r.p1);
    f << buf;
  }
  f.close();
  if (!f) throw IoError("save_dataset: write failed for " + path);

  nlohmann::json meta;
  meta["format"] = "fcmpc-dataset";
  meta["version"] = 1;
  meta["dt"] = dataset.dt;
  meta["seed"] = dataset.seed;
  meta["records"] = dataset.records.size();
  meta["skipped"] = dataset.skipped;
  meta["bounds"] = {{"q_h2", {dataset.bounds.low[0], dataset.bounds.high[0]}},
                    {"q_air", {dataset.bounds.low[1], dataset.bounds.high[1]}},
                    {"current", {dataset.bounds.low[2], dataset.bounds.high[2]}}};
  meta["generator"] = std::string("fcmpc ") + FCMPC_VERSION_STRING;
  std::ofstream mf(path + ".meta.json");
  if (!mf) throw IoError("save_dataset: cannot open " + path + ".meta.json");
  mf << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("load_dataset: cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "qh2,qair,i,v0,p0,v1,p1") {
    throw IoError("load_dataset: bad or missing header in " + path);
  }
  Dataset ds;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    DataRecord r;
    std::istringstream ss(line);
    char comma;
    ss >> r.q_h2 >> comma >> r.q_air >> comma >> r.current >> comma >> r.v0 >> comma >> r.p0 >>
        comma >> r.v1 >> comma >> r.p1;
    if (!ss) throw IoError("load_dataset: malformed row in " + path + ": " + line);
    ds.records.push_back(r);
  }

  std::ifstream mf(path + ".meta.json");
  if (mf) {
    nlohmann::json meta = nlohmann::json::parse(mf, nullptr, true, true);
    ds.dt = meta.value("dt", 0.5);
    ds.seed = meta.value("seed", std::uint64_t{0});
    if (meta.contains("bounds")) {
      const auto& b = meta["bounds"];
      ds.bounds.low = {b["q_h2"][0], b["q_air"][0], b["current"][0]};
      ds.bounds.high = {b["q_h2"][1], b["q_air"][1], b["current"][1]};
    }
    ds.skipped = meta.value("skipped", 0);
  }
  return ds;
}

}  // namespace fcmpc
