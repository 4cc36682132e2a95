// Orthogonal atomic decomposition: T = sum_i w_i A_i^(1) x ... x A_i^(k)
// where for each block j the factors A_i^(j) across summands are orthonormal.
// Covers the single-factor and two-factor base cases, the recursive general
// case, reconstruction, and verification.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "otd/flatten.hpp"
#include "otd/linalg.hpp"
#include "otd/tensor.hpp"

namespace otd {

// factors[i][j] is the block-j factor of summand i, shaped over the modes of
// signature block j in ascending order. For each fixed j the factors across
// summands are orthonormal under the tensor scalar product.
struct Decomposition {
  Signature signature;
  std::int64_t rank = 0;
  std::vector<double> weights;  // descending
  std::vector<std::vector<Tensor>> factors;
};

enum class SplitPolicy {
  kFirstBlock,  // recursive split: first block vs. the rest
  kAllSplits,   // run every proper split, align, average, re-orthonormalize
};

struct DecomposeOptions {
  double tol = 1e-10;
  SplitPolicy split_policy = SplitPolicy::kFirstBlock;
  // Acceptable drift of the sub-decomposition weights from 1 before the input
  // is declared structurally invalid; <= 0 selects 100 * tol.
  double structure_tol = 0.0;
};

// Raised when a tensor admits no orthogonal atomic decomposition at the
// requested signature. Carries the best-effort decomposition assembled by
// truncating every offending sub-decomposition to its leading summand.
class StructureViolation : public std::runtime_error {
 public:
  StructureViolation(const std::string& message, Decomposition best_effort,
                     double deviation)
      : std::runtime_error(message),
        best_effort_(std::move(best_effort)),
        deviation_(deviation) {}

  const Decomposition& best_effort() const { return best_effort_; }
  double deviation() const { return deviation_; }

 private:
  Decomposition best_effort_;
  double deviation_;
};

// Single-factor decomposition: rank 1 with w_1 = ||T|| and A_1 = T/||T||,
// signature ({1,...,d}). The zero tensor yields rank 0.
Decomposition otd1(const Tensor& t);

// Two-factor decomposition via one flattening and one SVD. Weights are the
// singular values (descending, positive); factors are the unflattened
// singular vectors.
Decomposition otd2(const Tensor& t, const Signature& sig, double tol = 1e-10);

// General decomposition for any signature. Throws StructureViolation when T
// has no orthogonal atomic decomposition at this signature.
Decomposition otd(const Tensor& t, const Signature& sig,
                  const DecomposeOptions& opts = {});

// Evaluates sum_i w_i (x)_j factors[i][j], re-permuting modes back to their
// original positions when signature blocks are non-contiguous.
Tensor reconstruct(const Decomposition& d, const Shape& shape);

struct VerifyReport {
  double residual = 0.0;            // ||T - reconstruct(D)|| / ||T||
  double max_gram_deviation = 0.0;  // max_j ||Gram_j - I||_max
  bool ok = false;
};

// Checks both the reconstruction residual and, per block, the orthonormality
// of the factor family. Existence of a decomposition is never assumed; this
// is the check.
VerifyReport verify(const Tensor& t, const Decomposition& d, double tol = 1e-8);

}  // namespace otd
