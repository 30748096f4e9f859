#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plant.hpp"
#include "rng.hpp"

namespace fcmpc {

// Per-dimension sampling box for (q_h2 lpm, q_air lpm, current A).
struct SampleBounds {
  std::array<double, 3> low{100.0, 300.0, 60.0};
  std::array<double, 3> high{400.0, 700.0, 180.0};

  void validate() const;  // low < high per dimension
};

// One recorded transition: inputs u_k, measured state x_k, measured x_{k+1}.
struct DataRecord {
  double q_h2, q_air, current;  // u_k
  double v0, p0;                // x_k
  double v1, p1;                // x_{k+1}
};

struct Dataset {
  std::vector<DataRecord> records;
  double dt = 0.5;
  std::uint64_t seed = 0;
  SampleBounds bounds;
  int skipped = 0;  // plant failures during collection

  std::size_t size() const { return records.size(); }
};

// Latin hypercube sample of n points in the bounds box: per dimension,
// exactly one point per stratum, uniform within the stratum, independent
// permutation per dimension.
std::vector<std::array<double, 3>> lhs_sample(int n, const SampleBounds& bounds, Rng& rng);

struct CollectConfig {
  double dt = 0.5;
  int warmup_min = 5;
  int warmup_max = 50;
  NoiseStd noise{0.05, 0.005};
  std::uint64_t seed = 0;
};

// Drive the plant to a randomized admissible state (seeded warm-up walk),
// then record one dt transition under each sampled input triple. Each
// sample uses an independently derived RNG stream, so results do not
// depend on how the work is sharded.
Dataset collect(const PlantParams& params, const std::vector<std::array<double, 3>>& samples,
                const SampleBounds& bounds, const CollectConfig& config);

// Columnar CSV with header qh2,qair,i,v0,p0,v1,p1 plus a JSON sidecar
// (<path>.meta.json) holding dt, seed, bounds and generator version.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace fcmpc
