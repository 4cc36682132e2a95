// Matrix factorization backend: thin SVD with deterministic truncation and
// sign conventions, numerical rank, Moore-Penrose pseudo-inverse, and the
// whitening transform of a symmetric positive semidefinite matrix.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "otd/tensor.hpp"

namespace otd {

// Thrown by whiten when the input has a significant negative eigenvalue.
class NotPsdError : public std::runtime_error {
 public:
  explicit NotPsdError(const std::string& message)
      : std::runtime_error(message) {}
};

// Thin SVD truncated at numerical rank: A ~ U diag(s) V^T with U (m x r) and
// V (n x r) column-orthonormal and s positive descending.
struct SvdResult {
  Matrix u;
  std::vector<double> singular_values;
  Matrix v;
  std::int64_t rank = 0;
  double tol = 0.0;
};

// One-sided Jacobi SVD. Rank r = #{s_i > tol * s_max} (0 for the zero
// matrix). Deterministic sign convention: in each column of U the entry of
// largest absolute value (ties: lowest row index) is made nonnegative, with
// V's column flipped to match. Identical input bits give identical output
// bits. Throws std::invalid_argument on non-finite entries.
SvdResult svd(const Matrix& a, double tol = 1e-10);

std::int64_t numerical_rank(const Matrix& a, double tol = 1e-10);

// Moore-Penrose inverse via the truncated SVD: V diag(1/s) U^T.
Matrix pseudo_inverse(const Matrix& a, double tol = 1e-10);

// Whitening of a symmetric PSD matrix M = U diag(sigma) U^T: W = U
// diag(sigma^{-1/2}), so that W^T M W = I_r. sigma holds the r significant
// eigenvalues, descending.
struct WhitenResult {
  Matrix w;
  Matrix u;
  std::vector<double> sigma;
};

// Throws std::invalid_argument when M is not symmetric to 1e-8 relative, and
// NotPsdError when a significant eigenvalue is negative.
WhitenResult whiten(const Matrix& m, double tol = 1e-10);

}  // namespace otd
