// Shared test machinery: independent reference implementations (oracles),
// seeded generators for planted instances, decomposition comparison modulo
// the allowed symmetries, and a driver for the command-line binary.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otd/decompose.hpp"
#include "otd/estimator.hpp"
#include "otd/flatten.hpp"
#include "otd/linalg.hpp"
#include "otd/moments.hpp"
#include "otd/rng.hpp"
#include "otd/tensor.hpp"

namespace support {

// ---- oracles: independent re-implementations used as ground truth ----

// The literal d-fold sum (A o T)_{i...} = sum_{j...} prod_k A_{i_k j_k} T_{j...}.
otd::Tensor naive_apply_linear(const otd::Matrix& a, const otd::Tensor& t);

// Leading `count` singular triples by subspace iteration on A^T A with full
// re-orthogonalization each step. Independent of the production kernel.
struct ReferenceSvd {
  otd::Matrix u;
  std::vector<double> singular_values;
  otd::Matrix v;
};
ReferenceSvd power_iteration_svd(const otd::Matrix& a, std::int64_t count,
                                 std::uint64_t seed, int iterations = 2000);

// Moment tensors by direct entrywise summation (no shared code with the
// library accumulation paths).
otd::Tensor oracle_model_moment(const otd::MixtureModel& model, std::int64_t degree);
otd::Tensor oracle_empirical_moment(const otd::SampleSet& samples, std::int64_t degree);

// ---- seeded generators ----

std::int64_t rand_int(otd::Rng& rng, std::int64_t lo, std::int64_t hi);
otd::Tensor random_tensor(otd::Rng& rng, const otd::Shape& shape);
otd::Matrix random_matrix(otd::Rng& rng, std::int64_t rows, std::int64_t cols);
otd::Shape random_shape(otd::Rng& rng, std::int64_t max_degree, std::int64_t max_dim);

// Random surjection of [source_degree] onto [target_degree].
otd::FlatteningMap random_flattening(otd::Rng& rng, std::int64_t source_degree,
                                     std::int64_t target_degree);

// Random ordered partition of [degree] into block_count blocks.
otd::Signature random_signature(otd::Rng& rng, std::int64_t degree,
                                std::int64_t block_count);

// `count` orthonormal tensors of the given shape (count <= element count),
// from twice-iterated Gram-Schmidt on gaussian draws.
std::vector<otd::Tensor> random_orthonormal_family(otd::Rng& rng,
                                                   const otd::Shape& shape,
                                                   std::int64_t count);

// Column-orthogonal matrix (n x n) for equivariance tests.
otd::Matrix random_orthogonal(otd::Rng& rng, std::int64_t n);

// Planted decomposition with the given weights and orthonormal factor sets.
otd::Decomposition plant_decomposition(otd::Rng& rng, const otd::Shape& shape,
                                       const otd::Signature& sig,
                                       std::vector<double> weights);

// Mixture model with unit means at pairwise angle >= min_angle_deg and
// distinct positive weights summing to 1.
otd::MixtureModel random_mixture_model(otd::Rng& rng, std::int64_t dim,
                                       std::int64_t components,
                                       double min_angle_deg = 10.0);

// ---- comparison modulo decomposition symmetries ----

// Max over summands/blocks of the factor error after permutation alignment
// (by descending |weight|) and per-factor sign alignment, plus the matching
// weight error. Requires equal rank; rank mismatch reports infinity.
struct DecompositionGap {
  double max_factor_error = 0.0;
  double max_weight_error = 0.0;
};
DecompositionGap compare_decompositions(const otd::Decomposition& expected,
                                        const otd::Decomposition& actual);

double max_abs_diff(const otd::Tensor& a, const otd::Tensor& b);
double relative_gap(double actual, double reference, double scale);

// ---- command-line driver ----

extern const char* const kCliPath;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the otd binary with the given argument string inside `workdir`.
CliResult run_cli(const std::string& args, const std::filesystem::path& workdir);

// Fresh scratch directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& hint);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace support
