#include "otd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace otd {

namespace {

void require_finite(const Matrix& a, const char* who) {
  for (double v : a.values()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(who) + ": non-finite entry");
    }
  }
}

// Orthogonalizes the columns of b in place by Hestenes rotations, accumulating
// the rotations into v. Fixed pair order and sweep bound keep the result a
// pure function of the input bits.
void jacobi_orthogonalize(Matrix& b, Matrix& v) {
  const std::int64_t m = b.rows();
  const std::int64_t n = b.cols();
  const double pair_tol = 1e-14;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::int64_t p = 0; p + 1 < n; ++p) {
      for (std::int64_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::int64_t i = 0; i < m; ++i) {
          alpha += b(i, p) * b(i, p);
          beta += b(i, q) * b(i, q);
          gamma += b(i, p) * b(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= pair_tol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t =
            std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::int64_t i = 0; i < m; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
        for (std::int64_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
}

}  // namespace

SvdResult svd(const Matrix& a, double tol) {
  require_finite(a, "svd");
  if (!(tol >= 0.0)) {
    throw std::invalid_argument("svd: tolerance must be nonnegative");
  }
  const bool transposed = a.rows() < a.cols();
  Matrix b = transposed ? a.transposed() : a;
  const std::int64_t m = b.rows();
  const std::int64_t n = b.cols();
  Matrix rot = Matrix::identity(n);
  jacobi_orthogonalize(b, rot);

  std::vector<double> norms(n, 0.0);
  for (std::int64_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < m; ++i) acc += b(i, j) * b(i, j);
    norms[j] = std::sqrt(acc);
  }
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::int64_t x, std::int64_t y) { return norms[x] > norms[y]; });

  const double smax = norms[order[0]];
  std::int64_t rank = 0;
  while (rank < n && norms[order[rank]] > tol * smax && norms[order[rank]] > 0.0) {
    ++rank;
  }
  if (smax == 0.0) rank = 0;

  SvdResult result;
  result.rank = rank;
  result.tol = tol;
  if (rank == 0) return result;

  Matrix left(m, rank);   // normalized columns of b
  Matrix right(n, rank);  // accumulated rotations
  result.singular_values.resize(rank);
  for (std::int64_t k = 0; k < rank; ++k) {
    const std::int64_t j = order[k];
    result.singular_values[k] = norms[j];
    for (std::int64_t i = 0; i < m; ++i) left(i, k) = b(i, j) / norms[j];
    for (std::int64_t i = 0; i < n; ++i) right(i, k) = rot(i, j);
  }
  result.u = transposed ? std::move(right) : std::move(left);
  result.v = transposed ? std::move(left) : std::move(right);

  // Sign convention on U: dominant entry (ties: lowest row) made nonnegative.
  for (std::int64_t k = 0; k < rank; ++k) {
    std::int64_t imax = 0;
    double best = std::abs(result.u(0, k));
    for (std::int64_t i = 1; i < result.u.rows(); ++i) {
      const double mag = std::abs(result.u(i, k));
      if (mag > best) {
        best = mag;
        imax = i;
      }
    }
    if (result.u(imax, k) < 0.0) {
      for (std::int64_t i = 0; i < result.u.rows(); ++i) result.u(i, k) = -result.u(i, k);
      for (std::int64_t i = 0; i < result.v.rows(); ++i) result.v(i, k) = -result.v(i, k);
    }
  }
  return result;
}

std::int64_t numerical_rank(const Matrix& a, double tol) {
  return svd(a, tol).rank;
}

Matrix pseudo_inverse(const Matrix& a, double tol) {
  const SvdResult s = svd(a, tol);
  Matrix p(a.cols(), a.rows());
  for (std::int64_t k = 0; k < s.rank; ++k) {
    const double inv = 1.0 / s.singular_values[k];
    for (std::int64_t i = 0; i < p.rows(); ++i) {
      const double vik = s.v(i, k) * inv;
      if (vik == 0.0) continue;
      for (std::int64_t j = 0; j < p.cols(); ++j) {
        p(i, j) += vik * s.u(j, k);
      }
    }
  }
  return p;
}

WhitenResult whiten(const Matrix& m, double tol) {
  require_finite(m, "whiten");
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("whiten: matrix is " + std::to_string(m.rows()) +
                                "x" + std::to_string(m.cols()) + ", expected square");
  }
  const std::int64_t n = m.rows();
  double max_abs = 0.0;
  double max_asym = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      max_abs = std::max(max_abs, std::abs(m(i, j)));
      max_asym = std::max(max_asym, std::abs(m(i, j) - m(j, i)));
    }
  }
  if (max_asym > 1e-8 * std::max(max_abs, 1e-300)) {
    throw std::invalid_argument("whiten: matrix is not symmetric to tolerance");
  }

  Matrix sym(n, n);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (m(i, j) + m(j, i));
  }
  const SvdResult s = svd(sym, tol);

  WhitenResult result;
  if (s.rank == 0) return result;
  // For a symmetric matrix the singular pairs satisfy u_k = sign(lambda_k) v_k;
  // the dot product recovers the eigenvalue sign. A dot far from +-1 means a
  // +-lambda pair of equal magnitude, which is indefinite as well.
  for (std::int64_t k = 0; k < s.rank; ++k) {
    double dot = 0.0;
    for (std::int64_t i = 0; i < n; ++i) dot += s.u(i, k) * s.v(i, k);
    if (dot < 0.99) {
      throw NotPsdError(
          "whiten: significant negative eigenvalue (magnitude " +
          std::to_string(s.singular_values[k]) + ")");
    }
  }
  result.u = s.u;
  result.sigma = s.singular_values;
  result.w = Matrix(n, s.rank);
  for (std::int64_t k = 0; k < s.rank; ++k) {
    const double scale = 1.0 / std::sqrt(s.singular_values[k]);
    for (std::int64_t i = 0; i < n; ++i) result.w(i, k) = s.u(i, k) * scale;
  }
  return result;
}

}  // namespace otd
