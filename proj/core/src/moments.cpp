#include "otd/moments.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "otd/linalg.hpp"
#include "otd/rng.hpp"

namespace otd {

namespace {

void require_consistent(const MixtureModel& model) {
  if (model.dim < 1) {
    throw std::invalid_argument("MixtureModel: dimension must be >= 1");
  }
  if (model.weights.empty()) {
    throw std::invalid_argument("MixtureModel: at least one component required");
  }
  if (model.means.size() != model.weights.size()) {
    throw std::invalid_argument("MixtureModel: " +
                                std::to_string(model.weights.size()) +
                                " weights vs " + std::to_string(model.means.size()) +
                                " means");
  }
  for (const auto& mean : model.means) {
    if (static_cast<std::int64_t>(mean.size()) != model.dim) {
      throw std::invalid_argument("MixtureModel: mean of length " +
                                  std::to_string(mean.size()) + ", expected " +
                                  std::to_string(model.dim));
    }
  }
}

}  // namespace

void validate_mixture_model(const MixtureModel& model, double tol) {
  require_consistent(model);
  double weight_sum = 0.0;
  for (double w : model.weights) weight_sum += w;
  if (std::abs(weight_sum - 1.0) > tol) {
    throw std::invalid_argument("MixtureModel: weights sum to " +
                                std::to_string(weight_sum) + ", expected 1");
  }
  for (std::size_t i = 0; i < model.means.size(); ++i) {
    const double norm = vec_norm(model.means[i]);
    if (std::abs(norm - 1.0) > tol) {
      throw std::invalid_argument("MixtureModel: mean " + std::to_string(i + 1) +
                                  " has norm " + std::to_string(norm) +
                                  ", expected 1");
    }
  }
  const std::int64_t r = model.component_count();
  if (r > model.dim) {
    throw std::invalid_argument("MixtureModel: " + std::to_string(r) +
                                " components cannot be independent in dimension " +
                                std::to_string(model.dim));
  }
  Matrix means(model.dim, r);
  for (std::int64_t i = 0; i < r; ++i) means.set_column(i, model.means[i]);
  if (numerical_rank(means, 1e-10) != r) {
    throw std::invalid_argument("MixtureModel: means are not linearly independent");
  }
}

Tensor model_moment(const MixtureModel& model, std::int64_t degree) {
  require_consistent(model);
  if (degree < 1) {
    throw std::invalid_argument("model_moment: degree must be >= 1");
  }
  Tensor acc(Shape(std::vector<std::int64_t>(degree, model.dim)));
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    const Tensor power = outer_power(model.means[i], degree);
    const double w = model.weights[i];
    for (std::int64_t p = 0; p < acc.size(); ++p) acc[p] += w * power[p];
  }
  return acc;
}

Tensor empirical_moment(const SampleSet& samples, std::int64_t degree) {
  if (degree < 1) {
    throw std::invalid_argument("empirical_moment: degree must be >= 1");
  }
  if (samples.points.empty()) {
    throw std::invalid_argument("empirical_moment: empty sample set");
  }
  const std::int64_t n = samples.dim;
  if (n < 1) {
    throw std::invalid_argument("empirical_moment: sample dimension must be >= 1");
  }
  Tensor acc(Shape(std::vector<std::int64_t>(degree, n)));
  // Per-sample outer power built up one mode at a time into reused buffers.
  std::vector<double> cur, next;
  for (const auto& point : samples.points) {
    if (static_cast<std::int64_t>(point.size()) != n) {
      throw std::invalid_argument("empirical_moment: sample of length " +
                                  std::to_string(point.size()) + ", expected " +
                                  std::to_string(n));
    }
    for (double x : point) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument("empirical_moment: non-finite sample entry");
      }
    }
    cur.assign(point.begin(), point.end());
    for (std::int64_t d = 1; d < degree; ++d) {
      next.resize(cur.size() * point.size());
      for (std::size_t a = 0; a < cur.size(); ++a) {
        for (std::size_t b = 0; b < point.size(); ++b) {
          next[a * point.size() + b] = cur[a] * point[b];
        }
      }
      std::swap(cur, next);
    }
    for (std::int64_t p = 0; p < acc.size(); ++p) acc[p] += cur[p];
  }
  acc *= 1.0 / static_cast<double>(samples.count());
  return acc;
}

SampleSet sample_mixture(const MixtureModel& model, ScalarLaw law,
                         std::int64_t count, std::uint64_t seed) {
  require_consistent(model);
  if (count < 0) {
    throw std::invalid_argument("sample_mixture: negative sample count");
  }
  for (double w : model.weights) {
    if (w < 0.0) {
      throw std::invalid_argument(
          "sample_mixture: negative weight; sampling needs a probability mixture");
    }
  }
  // Two-point law with P(a) = P(b) = 1/2 and E[Z^2] = E[Z^3] = 1.
  const double root3 = std::sqrt(3.0);
  const double spread = std::sqrt(2.0 * root3);
  const double two_point_a = ((root3 - 1.0) + spread) / 2.0;
  const double two_point_b = ((root3 - 1.0) - spread) / 2.0;

  Rng rng(seed);
  SampleSet out;
  out.dim = model.dim;
  out.points.reserve(count);
  for (std::int64_t s = 0; s < count; ++s) {
    const std::int64_t i = rng.pick_category(model.weights);
    double z = 1.0;
    if (law == ScalarLaw::kTwoPoint) {
      z = rng.uniform01() < 0.5 ? two_point_a : two_point_b;
    }
    std::vector<double> point = model.means[i];
    for (double& x : point) x *= z;
    out.points.push_back(std::move(point));
  }
  return out;
}

double transform_moment_check(const Matrix& a, const SampleSet& samples,
                              std::int64_t degree) {
  SampleSet transformed;
  transformed.dim = a.rows();
  transformed.points.reserve(samples.points.size());
  for (const auto& point : samples.points) {
    transformed.points.push_back(apply_linear_vec(a, point));
  }
  const Tensor lhs = empirical_moment(transformed, degree);
  const Tensor rhs = apply_linear(a, empirical_moment(samples, degree));
  double diff_sq = 0.0;
  for (std::int64_t p = 0; p < lhs.size(); ++p) {
    const double diff = lhs[p] - rhs[p];
    diff_sq += diff * diff;
  }
  return std::sqrt(diff_sq);
}

}  // namespace otd
