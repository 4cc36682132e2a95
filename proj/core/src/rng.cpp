#include "otd/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otd {

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 == 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<double> Rng::gaussian_vector(std::int64_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = gaussian();
  return v;
}

std::vector<double> Rng::unit_vector(std::int64_t n) {
  while (true) {
    std::vector<double> v = gaussian_vector(n);
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    if (norm_sq == 0.0) continue;  // astronomically unlikely; redraw
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
    return v;
  }
}

std::int64_t Rng::pick_category(std::span<const double> weights) {
  if (weights.empty()) {
    throw std::invalid_argument("Rng::pick_category: no categories");
  }
  const double u = uniform01();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cumulative += weights[i];
    if (u < cumulative) return static_cast<std::int64_t>(i);
  }
  return static_cast<std::int64_t>(weights.size()) - 1;
}

}  // namespace otd
