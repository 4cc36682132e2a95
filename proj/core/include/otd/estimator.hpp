// Model identification from second and third moments: whiten by M2, decompose
// the whitened third moment, and map the recovered atoms back to mixture
// weights and unit-norm means.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "otd/moments.hpp"
#include "otd/tensor.hpp"

namespace otd {

enum class Averaging {
  kNone,             // one flattening of the whitened tensor
  kThreeSignatures,  // all three single-mode flattenings, aligned and averaged
};

struct IdentifyOptions {
  // Rank threshold on M2, relative to its top singular value. Deliberately
  // loose by exact-arithmetic standards: empirical moments carry noise.
  double tol_rank = 1e-2;
  Averaging averaging = Averaging::kNone;
  // Gate on the whitened-tensor reconstruction residual; above it the moments
  // are declared inconsistent with the model class.
  double tol_residual = 0.5;
};

struct EstimationDiagnostics {
  std::int64_t rank = 0;
  std::vector<double> m2_singular_values;
  double whitened_residual = 0.0;
  // Per component: worst alignment (dot after sign fix) between the averaged
  // singular-vector estimates of the same whitened atom; near 1 when the
  // input is consistent.
  std::vector<double> sign_alignment_scores;
  // Per component: |norm - 1| of the recovered mean before renormalization.
  std::vector<double> mean_norm_deviations;
  double weight_sum_deviation = 0.0;
};

struct EstimationResult {
  MixtureModel model;
  EstimationDiagnostics diagnostics;
};

// The whitened third moment did not decompose as a rank-r orthogonal tensor
// to the requested residual tolerance.
class DecompositionFailed : public std::runtime_error {
 public:
  DecompositionFailed(const std::string& message, double residual)
      : std::runtime_error(message), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Recovers (w_i, mu_i) from M2 (n x n) and M3 (n x n x n). Throws
// std::invalid_argument on malformed/asymmetric input, NotPsdError when M2
// has a significant negative eigenvalue, and DecompositionFailed when the
// whitened tensor fails to decompose. Positive-weight models only.
EstimationResult identify(const Tensor& m2, const Tensor& m3,
                          const IdentifyOptions& opts = {});

// Convenience: empirical M2/M3 from the samples, then identify.
EstimationResult identify_from_samples(const SampleSet& samples,
                                       const IdentifyOptions& opts = {});

struct ScoreReport {
  double max_mean_error = 0.0;    // max_i ||mu_i - (+-) mu_hat_{pi(i)}||
  double max_weight_error = 0.0;  // max_i |w_i - w_hat_{pi(i)}| at the same pi
  std::vector<std::int64_t> permutation;  // estimate component matched to truth i
};

// Best permutation/sign alignment of the estimate against a ground-truth
// model (exhaustive for r <= 8, greedy beyond). Mismatched dimension or
// component count scores as infinity.
ScoreReport score_against_truth(const MixtureModel& estimate,
                                const MixtureModel& truth);

}  // namespace otd
