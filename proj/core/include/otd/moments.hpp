// Rank-1 mixture models, their exact and empirical moment tensors, and the
// seeded synthetic sample generator.
#pragma once

#include <cstdint>
#include <vector>

#include "otd/tensor.hpp"

namespace otd {

// Mixture of r rank-1 components in R^n: component i contributes mean
// direction mu_i (unit norm) with weight w_i. A proper model has weights
// summing to 1 and linearly independent means; the estimator can emit
// slightly-off weights from noisy input, so validation is a separate call.
struct MixtureModel {
  std::int64_t dim = 0;
  std::vector<double> weights;
  std::vector<std::vector<double>> means;

  std::int64_t component_count() const {
    return static_cast<std::int64_t>(weights.size());
  }
};

// Throws std::invalid_argument unless |sum w - 1| <= tol, every ||mu_i|| is 1
// to tol, and the means are linearly independent at numerical rank.
void validate_mixture_model(const MixtureModel& model, double tol = 1e-12);

// N points of R^n, uniform dimension, all finite.
struct SampleSet {
  std::int64_t dim = 0;
  std::vector<std::vector<double>> points;

  std::int64_t count() const { return static_cast<std::int64_t>(points.size()); }
};

// M_d = sum_i w_i mu_i^{(x)d}, the exact degree-d moment of the model.
Tensor model_moment(const MixtureModel& model, std::int64_t degree);

// (1/N) sum_s s^{(x)d}; throws on an empty sample set.
Tensor empirical_moment(const SampleSet& samples, std::int64_t degree);

// Distribution of the scalar variable Z multiplying the chosen mean. Both
// built-ins satisfy E[Z^2] = E[Z^3] = 1: the constant 1, and a two-point law
// on {a, b} with probability 1/2 each, a,b = ((sqrt(3)-1) +- sqrt(2 sqrt(3)))/2.
enum class ScalarLaw {
  kConstantOne,
  kTwoPoint,
};

// N i.i.d. draws of mu_I * Z, with I picked by the model weights. Requires
// nonnegative weights (the algebraic problem allows any reals, but sampling
// needs a probability mixture). Deterministic under a fixed seed.
SampleSet sample_mixture(const MixtureModel& model, ScalarLaw law,
                         std::int64_t count, std::uint64_t seed);

// Applies A to every sample and returns the Frobenius gap between
// empirical_moment(A S, d) and A o empirical_moment(S, d). The two agree to
// roundoff for any finite sample set.
double transform_moment_check(const Matrix& a, const SampleSet& samples,
                              std::int64_t degree);

}  // namespace otd
