#include "otd/estimator.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>

#include "otd/flatten.hpp"
#include "otd/linalg.hpp"

namespace otd {

namespace {

constexpr double kExactTol = 1e-10;  // SVD threshold for O(1) whitened quantities

void require_moment_shapes(const Tensor& m2, const Tensor& m3) {
  if (m2.degree() != 2 || m2.shape().dim(1) != m2.shape().dim(2)) {
    throw std::invalid_argument("identify: M2 must be a square matrix, got " +
                                m2.shape().to_string());
  }
  const std::int64_t n = m2.shape().dim(1);
  if (m3.degree() != 3 || m3.shape().dim(1) != n || m3.shape().dim(2) != n ||
      m3.shape().dim(3) != n) {
    throw std::invalid_argument("identify: M3 must have shape (" +
                                std::to_string(n) + "," + std::to_string(n) +
                                "," + std::to_string(n) + "), got " +
                                m3.shape().to_string());
  }
  // Index symmetry of M3 under the transpositions generating all six orders.
  double max_abs = 0.0;
  for (std::int64_t p = 0; p < m3.size(); ++p) {
    max_abs = std::max(max_abs, std::abs(m3[p]));
  }
  const double sym_tol = 1e-8 * std::max(max_abs, 1e-300);
  for (std::int64_t a = 1; a <= n; ++a) {
    for (std::int64_t b = 1; b <= n; ++b) {
      for (std::int64_t c = 1; c <= n; ++c) {
        const double t = m3.entry({a, b, c});
        if (std::abs(t - m3.entry({b, a, c})) > sym_tol ||
            std::abs(t - m3.entry({a, c, b})) > sym_tol) {
          throw std::invalid_argument("identify: M3 is not index-symmetric to tolerance");
        }
      }
    }
  }
}

// Atom estimates pulled out of one single-mode flattening of the whitened
// tensor: singular values w~_i, and per component the average of the three
// singular-vector estimates of the whitened atom.
struct FlatteningEstimate {
  std::vector<double> w_tilde;
  std::vector<std::vector<double>> mu_tilde;
  std::vector<double> alignment;
};

FlatteningEstimate extract_atoms(const Tensor& whitened,
                                 std::vector<std::int64_t> assignment,
                                 std::int64_t r) {
  const std::int64_t rr = whitened.shape().dim(1);
  const FlatteningMap sigma(std::move(assignment));
  const SvdResult s = svd(Matrix::from_tensor(flatten(whitened, sigma)), kExactTol);
  const std::int64_t count = std::min(r, s.rank);

  FlatteningEstimate out;
  for (std::int64_t i = 0; i < count; ++i) {
    std::vector<double> mu1 = s.u.column(i);
    // The pairing (u_i, v_i) leaves u_i's global sign free because v_i encodes
    // a sign-invariant second power of the atom. The cubic form against the
    // whitened tensor is sign-odd, so it pins the sign for positive weights.
    double cubic = 0.0;
    for (std::int64_t a = 0; a < rr; ++a) {
      for (std::int64_t b = 0; b < rr; ++b) {
        for (std::int64_t c = 0; c < rr; ++c) {
          cubic += mu1[a] * mu1[b] * mu1[c] * whitened[(a * rr + b) * rr + c];
        }
      }
    }
    if (cubic < 0.0) {
      for (double& x : mu1) x = -x;
    }
    // v_i reshaped over the two grouped modes is rank-1 up to noise; its
    // singular pair gives two more estimates of the same atom.
    const SvdResult pair = svd(Matrix(rr, rr, s.v.column(i)), kExactTol);
    std::vector<double> mu2 = pair.u.column(0);
    std::vector<double> mu3 = pair.v.column(0);
    double d2 = vec_dot(mu2, mu1);
    if (d2 < 0.0) {
      for (double& x : mu2) x = -x;
      d2 = -d2;
    }
    double d3 = vec_dot(mu3, mu1);
    if (d3 < 0.0) {
      for (double& x : mu3) x = -x;
      d3 = -d3;
    }
    std::vector<double> avg(rr);
    for (std::int64_t a = 0; a < rr; ++a) {
      avg[a] = (mu1[a] + mu2[a] + mu3[a]) / 3.0;
    }
    out.w_tilde.push_back(s.singular_values[i]);
    out.mu_tilde.push_back(std::move(avg));
    out.alignment.push_back(std::min(d2, d3));
  }
  return out;
}

// Greedy correlation matching of later flattening estimates onto the first,
// with sign flips toward positive correlation, then uniform averaging.
FlatteningEstimate merge_estimates(std::vector<FlatteningEstimate> estimates) {
  FlatteningEstimate merged = std::move(estimates[0]);
  std::size_t count = merged.mu_tilde.size();
  for (std::size_t s = 1; s < estimates.size(); ++s) {
    count = std::min(count, estimates[s].mu_tilde.size());
  }
  merged.w_tilde.resize(count);
  merged.mu_tilde.resize(count);
  merged.alignment.resize(count);
  for (std::size_t s = 1; s < estimates.size(); ++s) {
    FlatteningEstimate& est = estimates[s];
    std::vector<bool> used(est.mu_tilde.size(), false);
    for (std::size_t i = 0; i < count; ++i) {
      double best_score = -1.0;
      std::size_t best = 0;
      for (std::size_t c = 0; c < est.mu_tilde.size(); ++c) {
        if (used[c]) continue;
        const double score = std::abs(vec_dot(merged.mu_tilde[i], est.mu_tilde[c]));
        if (score > best_score) {
          best_score = score;
          best = c;
        }
      }
      used[best] = true;
      const double sign = vec_dot(merged.mu_tilde[i], est.mu_tilde[best]) < 0.0 ? -1.0 : 1.0;
      for (std::size_t a = 0; a < merged.mu_tilde[i].size(); ++a) {
        merged.mu_tilde[i][a] += sign * est.mu_tilde[best][a];
      }
      merged.w_tilde[i] += est.w_tilde[best];
      merged.alignment[i] = std::min(merged.alignment[i], est.alignment[best]);
    }
  }
  const double scale = 1.0 / static_cast<double>(estimates.size());
  for (std::size_t i = 0; i < count; ++i) {
    merged.w_tilde[i] *= scale;
    for (double& x : merged.mu_tilde[i]) x *= scale;
  }
  return merged;
}

}  // namespace

EstimationResult identify(const Tensor& m2, const Tensor& m3,
                          const IdentifyOptions& opts) {
  if (!(opts.tol_rank > 0.0) || !(opts.tol_residual > 0.0)) {
    throw std::invalid_argument("identify: tolerances must be positive");
  }
  require_moment_shapes(m2, m3);
  const std::int64_t n = m2.shape().dim(1);

  const WhitenResult wh = whiten(Matrix::from_tensor(m2), opts.tol_rank);
  const std::int64_t r = static_cast<std::int64_t>(wh.sigma.size());
  if (r == 0) {
    throw std::invalid_argument("identify: M2 is numerically zero");
  }
  const Matrix wt = wh.w.transposed();  // r x n
  const Tensor whitened = apply_linear(wt, m3);

  std::vector<FlatteningEstimate> estimates;
  estimates.push_back(extract_atoms(whitened, {1, 2, 2}, r));
  if (opts.averaging == Averaging::kThreeSignatures) {
    estimates.push_back(extract_atoms(whitened, {2, 1, 2}, r));
    estimates.push_back(extract_atoms(whitened, {2, 2, 1}, r));
  }
  FlatteningEstimate merged = merge_estimates(std::move(estimates));
  const std::int64_t used = static_cast<std::int64_t>(merged.mu_tilde.size());

  // Residual of the whitened tensor against its recovered rank-r form.
  Tensor rebuilt(whitened.shape());
  for (std::int64_t i = 0; i < used; ++i) {
    const Tensor cube = outer_power(merged.mu_tilde[i], 3);
    for (std::int64_t p = 0; p < rebuilt.size(); ++p) {
      rebuilt[p] += merged.w_tilde[i] * cube[p];
    }
  }
  double diff_sq = 0.0;
  for (std::int64_t p = 0; p < whitened.size(); ++p) {
    const double diff = whitened[p] - rebuilt[p];
    diff_sq += diff * diff;
  }
  const double residual =
      std::sqrt(diff_sq) / std::max(frobenius_norm(whitened), DBL_MIN);
  if (residual > opts.tol_residual) {
    throw DecompositionFailed(
        "identify: whitened third moment is not rank-" + std::to_string(r) +
            " orthogonal (residual " + std::to_string(residual) + ")",
        residual);
  }

  const Matrix back = pseudo_inverse(wt, kExactTol);  // n x r
  EstimationResult result;
  result.model.dim = n;
  result.diagnostics.rank = r;
  result.diagnostics.m2_singular_values = wh.sigma;
  result.diagnostics.whitened_residual = residual;
  for (std::int64_t i = 0; i < used; ++i) {
    const double w_tilde = merged.w_tilde[i];
    std::vector<double> mean = apply_linear_vec(back, merged.mu_tilde[i]);
    for (double& x : mean) x *= w_tilde;
    const double norm = vec_norm(mean);
    if (norm > 0.0) {
      for (double& x : mean) x /= norm;
    }
    result.model.weights.push_back(1.0 / (w_tilde * w_tilde));
    result.model.means.push_back(std::move(mean));
    result.diagnostics.sign_alignment_scores.push_back(merged.alignment[i]);
    result.diagnostics.mean_norm_deviations.push_back(std::abs(norm - 1.0));
  }

  // Report components by descending weight.
  std::vector<std::int64_t> order(used);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return result.model.weights[a] > result.model.weights[b];
  });
  EstimationResult sorted;
  sorted.model.dim = n;
  sorted.diagnostics = result.diagnostics;
  sorted.diagnostics.sign_alignment_scores.clear();
  sorted.diagnostics.mean_norm_deviations.clear();
  double weight_sum = 0.0;
  for (std::int64_t i : order) {
    sorted.model.weights.push_back(result.model.weights[i]);
    sorted.model.means.push_back(std::move(result.model.means[i]));
    sorted.diagnostics.sign_alignment_scores.push_back(
        result.diagnostics.sign_alignment_scores[i]);
    sorted.diagnostics.mean_norm_deviations.push_back(
        result.diagnostics.mean_norm_deviations[i]);
    weight_sum += sorted.model.weights.back();
  }
  sorted.diagnostics.weight_sum_deviation = std::abs(weight_sum - 1.0);
  return sorted;
}

EstimationResult identify_from_samples(const SampleSet& samples,
                                       const IdentifyOptions& opts) {
  return identify(empirical_moment(samples, 2), empirical_moment(samples, 3), opts);
}

ScoreReport score_against_truth(const MixtureModel& estimate,
                                const MixtureModel& truth) {
  ScoreReport report;
  const std::int64_t r = truth.component_count();
  if (estimate.component_count() != r || estimate.dim != truth.dim || r == 0) {
    report.max_mean_error = std::numeric_limits<double>::infinity();
    report.max_weight_error = std::numeric_limits<double>::infinity();
    return report;
  }

  const auto aligned_error = [&](std::int64_t ti, std::int64_t ei) {
    const auto& mu = truth.means[ti];
    const auto& est = estimate.means[ei];
    const double sign = vec_dot(mu, est) < 0.0 ? -1.0 : 1.0;
    double acc = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) {
      const double diff = mu[a] - sign * est[a];
      acc += diff * diff;
    }
    return std::sqrt(acc);
  };

  std::vector<std::int64_t> best_perm;
  double best_err = std::numeric_limits<double>::infinity();
  if (r <= 8) {
    std::vector<std::int64_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double err = 0.0;
      for (std::int64_t i = 0; i < r; ++i) {
        err = std::max(err, aligned_error(i, perm[i]));
        if (err >= best_err) break;
      }
      if (err < best_err) {
        best_err = err;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // Greedy fallback for large component counts.
    std::vector<bool> used(r, false);
    best_perm.resize(r);
    best_err = 0.0;
    for (std::int64_t i = 0; i < r; ++i) {
      double local_best = std::numeric_limits<double>::infinity();
      std::int64_t pick = 0;
      for (std::int64_t c = 0; c < r; ++c) {
        if (used[c]) continue;
        const double err = aligned_error(i, c);
        if (err < local_best) {
          local_best = err;
          pick = c;
        }
      }
      used[pick] = true;
      best_perm[i] = pick;
      best_err = std::max(best_err, local_best);
    }
  }

  report.permutation = best_perm;
  report.max_mean_error = best_err;
  for (std::int64_t i = 0; i < r; ++i) {
    report.max_weight_error =
        std::max(report.max_weight_error,
                 std::abs(truth.weights[i] - estimate.weights[best_perm[i]]));
  }
  return report;
}

}  // namespace otd
