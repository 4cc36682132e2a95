// Deterministic random source. The raw stream is std::mt19937_64, but the
// mappings to uniforms and gaussians are implemented here because the standard
// distributions are implementation-defined and would break byte-identical
// reproducibility across toolchains.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace otd {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0,1): top 53 bits of the raw draw.
  double uniform01();

  // Standard normal via Box-Muller; draws are consumed in pairs.
  double gaussian();

  std::vector<double> gaussian_vector(std::int64_t n);

  // Uniformly distributed point on the unit sphere in R^n.
  std::vector<double> unit_vector(std::int64_t n);

  // Index in [0, weights.size()) with the given probabilities (summing to ~1).
  std::int64_t pick_category(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace otd
