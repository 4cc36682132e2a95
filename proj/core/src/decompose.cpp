#include "otd/decompose.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <utility>

namespace otd {

namespace {

Shape block_shape(const Shape& shape, const std::vector<std::int64_t>& block) {
  std::vector<std::int64_t> dims;
  dims.reserve(block.size());
  for (std::int64_t mode : block) dims.push_back(shape.dim(mode));
  return Shape(std::move(dims));
}

struct RecursionStats {
  bool violated = false;
  double max_deviation = 0.0;

  void record(double deviation, bool is_violation) {
    max_deviation = std::max(max_deviation, deviation);
    violated = violated || is_violation;
  }
};

// Renumbers blocks of original mode numbers to local modes 1..|group|, where
// group lists the original modes ascending (the order unflattening uses).
Signature local_signature(const std::vector<std::vector<std::int64_t>>& blocks,
                          const std::vector<std::int64_t>& group) {
  std::vector<std::int64_t> local_of(group.empty() ? 1 : group.back() + 1, 0);
  for (std::size_t p = 0; p < group.size(); ++p) {
    local_of[group[p]] = static_cast<std::int64_t>(p) + 1;
  }
  std::vector<std::vector<std::int64_t>> local_blocks;
  local_blocks.reserve(blocks.size());
  for (const auto& block : blocks) {
    std::vector<std::int64_t> local;
    local.reserve(block.size());
    for (std::int64_t mode : block) local.push_back(local_of[mode]);
    local_blocks.push_back(std::move(local));
  }
  return Signature(std::move(local_blocks));
}

// Leading summand of a sub-decomposition, which has rank 1 and weight 1
// whenever the parent tensor truly decomposes. Anything else is recorded as a
// structure violation; truncation keeps the overall result a best effort.
struct LeadingSummand {
  double weight = 0.0;
  std::vector<Tensor> factors;
};

LeadingSummand take_leading(Decomposition d, const Signature& sub_sig,
                            const Shape& sub_shape, double structure_tol,
                            RecursionStats& stats) {
  if (d.rank == 0) {
    stats.record(1.0, true);
    LeadingSummand out;
    for (std::int64_t j = 1; j <= sub_sig.block_count(); ++j) {
      out.factors.emplace_back(block_shape(sub_shape, sub_sig.block(j)));
    }
    return out;
  }
  double tail_sq = 0.0;
  for (std::int64_t i = 1; i < d.rank; ++i) tail_sq += d.weights[i] * d.weights[i];
  const double tail = std::sqrt(tail_sq);
  const double weight_drift = std::abs(d.weights[0] - 1.0);
  stats.record(std::max(weight_drift, tail),
               weight_drift > structure_tol || tail > structure_tol);
  return {d.weights[0], std::move(d.factors[0])};
}

void sort_by_weight_desc(Decomposition& d) {
  std::vector<std::int64_t> order(d.rank);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    return std::abs(d.weights[a]) > std::abs(d.weights[b]);
  });
  std::vector<double> weights(d.rank);
  std::vector<std::vector<Tensor>> factors(d.rank);
  for (std::int64_t i = 0; i < d.rank; ++i) {
    weights[i] = d.weights[order[i]];
    factors[i] = std::move(d.factors[order[i]]);
  }
  d.weights = std::move(weights);
  d.factors = std::move(factors);
}

Decomposition otd_recursive(const Tensor& t, const Signature& sig,
                            const std::vector<std::int64_t>& split,
                            const DecomposeOptions& opts, double structure_tol,
                            RecursionStats& stats) {
  const std::int64_t k = sig.block_count();
  if (k == 1) return otd1(t);
  if (k == 2) return otd2(t, sig, opts.tol);

  const FlatteningMap sigma = signature_to_two_flattening(sig, split);
  const SvdResult s = svd(Matrix::from_tensor(flatten(t, sigma)), opts.tol);

  std::vector<bool> in_split(k + 1, false);
  for (std::int64_t j : split) in_split[j] = true;
  const std::vector<std::int64_t> group1 = sigma.preimage(1);
  const std::vector<std::int64_t> group2 = sigma.preimage(2);
  std::vector<std::vector<std::int64_t>> blocks1, blocks2;
  for (std::int64_t j = 1; j <= k; ++j) {
    (in_split[j] ? blocks1 : blocks2).push_back(sig.block(j));
  }
  const Signature sub_sig1 = local_signature(blocks1, group1);
  const Signature sub_sig2 = local_signature(blocks2, group2);
  const Shape shape1 = block_shape(t.shape(), group1);
  const Shape shape2 = block_shape(t.shape(), group2);

  Decomposition result;
  result.signature = sig;
  result.rank = s.rank;
  const std::vector<std::int64_t> first_block = {1};
  for (std::int64_t i = 0; i < s.rank; ++i) {
    const Tensor a(shape1, s.u.column(i));
    const Tensor b(shape2, s.v.column(i));
    LeadingSummand la =
        take_leading(otd_recursive(a, sub_sig1, first_block, opts, structure_tol, stats),
                     sub_sig1, shape1, structure_tol, stats);
    LeadingSummand lb =
        take_leading(otd_recursive(b, sub_sig2, first_block, opts, structure_tol, stats),
                     sub_sig2, shape2, structure_tol, stats);
    result.weights.push_back(s.singular_values[i] * la.weight * lb.weight);
    std::vector<Tensor> row;
    row.reserve(k);
    std::size_t p1 = 0, p2 = 0;
    for (std::int64_t j = 1; j <= k; ++j) {
      row.push_back(in_split[j] ? std::move(la.factors[p1++])
                                : std::move(lb.factors[p2++]));
    }
    result.factors.push_back(std::move(row));
  }
  sort_by_weight_desc(result);
  return result;
}

// Greedy correlation matching of `other` onto `base`, with per-block sign
// flips toward positive correlation. Then accumulated for averaging.
void align_to(const Decomposition& base, Decomposition& other) {
  const std::int64_t r = base.rank;
  const std::int64_t k = base.signature.block_count();
  std::vector<bool> used(r, false);
  std::vector<std::int64_t> match(r, 0);
  for (std::int64_t i = 0; i < r; ++i) {
    double best_score = -1.0;
    std::int64_t best = -1;
    for (std::int64_t c = 0; c < r; ++c) {
      if (used[c]) continue;
      double score = 0.0;
      for (std::int64_t j = 0; j < k; ++j) {
        score += std::abs(scalar_product(base.factors[i][j], other.factors[c][j]));
      }
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    used[best] = true;
    match[i] = best;
  }
  std::vector<double> weights(r);
  std::vector<std::vector<Tensor>> factors(r);
  for (std::int64_t i = 0; i < r; ++i) {
    weights[i] = other.weights[match[i]];
    factors[i] = std::move(other.factors[match[i]]);
    for (std::int64_t j = 0; j < k; ++j) {
      if (scalar_product(base.factors[i][j], factors[i][j]) < 0.0) {
        factors[i][j] *= -1.0;
      }
    }
  }
  other.weights = std::move(weights);
  other.factors = std::move(factors);
}

// Averages aligned per-split results, then restores exact orthonormality of
// each block's factor family by polar correction (nearest orthonormal set).
Decomposition average_splits(std::vector<Decomposition> results, double tol) {
  Decomposition avg = std::move(results[0]);
  const std::int64_t r = avg.rank;
  const std::int64_t k = avg.signature.block_count();
  for (std::size_t s = 1; s < results.size(); ++s) {
    align_to(avg, results[s]);
  }
  const double scale = 1.0 / static_cast<double>(results.size());
  for (std::int64_t i = 0; i < r; ++i) {
    for (std::size_t s = 1; s < results.size(); ++s) {
      avg.weights[i] += results[s].weights[i];
      for (std::int64_t j = 0; j < k; ++j) {
        avg.factors[i][j] += results[s].factors[i][j];
      }
    }
    avg.weights[i] *= scale;
    for (std::int64_t j = 0; j < k; ++j) avg.factors[i][j] *= scale;
  }
  if (r == 0) return avg;
  for (std::int64_t j = 0; j < k; ++j) {
    const Shape fshape = avg.factors[0][j].shape();
    const std::int64_t nj = fshape.element_count();
    Matrix f(nj, r);
    for (std::int64_t i = 0; i < r; ++i) {
      f.set_column(i, avg.factors[i][j].values());
    }
    const SvdResult sv = svd(f, tol);
    if (sv.rank < r) {
      // Degenerate averaging; keep the factors, only normalize them.
      for (std::int64_t i = 0; i < r; ++i) {
        const double norm = frobenius_norm(avg.factors[i][j]);
        if (norm > 0.0) avg.factors[i][j] *= 1.0 / norm;
      }
      continue;
    }
    for (std::int64_t i = 0; i < r; ++i) {
      std::vector<double> col(nj, 0.0);
      for (std::int64_t a = 0; a < nj; ++a) {
        double acc = 0.0;
        for (std::int64_t c = 0; c < r; ++c) acc += sv.u(a, c) * sv.v(i, c);
        col[a] = acc;
      }
      avg.factors[i][j] = Tensor(fshape, std::move(col));
    }
  }
  sort_by_weight_desc(avg);
  return avg;
}

}  // namespace

Decomposition otd1(const Tensor& t) {
  Decomposition d;
  d.signature = Signature::single_block(t.degree());
  const double norm = frobenius_norm(t);
  if (norm == 0.0) return d;
  d.rank = 1;
  d.weights = {norm};
  Tensor unit = t;
  unit *= 1.0 / norm;
  d.factors.push_back({std::move(unit)});
  return d;
}

Decomposition otd2(const Tensor& t, const Signature& sig, double tol) {
  if (sig.block_count() != 2) {
    throw std::invalid_argument("otd2: signature has " +
                                std::to_string(sig.block_count()) +
                                " blocks, expected 2");
  }
  if (sig.degree() != t.degree()) {
    throw std::invalid_argument("otd2: signature degree " +
                                std::to_string(sig.degree()) +
                                " vs tensor degree " + std::to_string(t.degree()));
  }
  const std::vector<std::int64_t> first_block = {1};
  const FlatteningMap sigma = signature_to_two_flattening(sig, first_block);
  const SvdResult s = svd(Matrix::from_tensor(flatten(t, sigma)), tol);

  Decomposition d;
  d.signature = sig;
  d.rank = s.rank;
  d.weights = s.singular_values;
  const Shape shape1 = block_shape(t.shape(), sig.block(1));
  const Shape shape2 = block_shape(t.shape(), sig.block(2));
  for (std::int64_t i = 0; i < s.rank; ++i) {
    std::vector<Tensor> row;
    row.emplace_back(shape1, s.u.column(i));
    row.emplace_back(shape2, s.v.column(i));
    d.factors.push_back(std::move(row));
  }
  return d;
}

Decomposition otd(const Tensor& t, const Signature& sig,
                  const DecomposeOptions& opts) {
  if (sig.degree() != t.degree()) {
    throw std::invalid_argument("otd: signature degree " +
                                std::to_string(sig.degree()) +
                                " vs tensor degree " + std::to_string(t.degree()));
  }
  if (!(opts.tol >= 0.0)) {
    throw std::invalid_argument("otd: tolerance must be nonnegative");
  }
  const double structure_tol =
      opts.structure_tol > 0.0 ? opts.structure_tol : 100.0 * opts.tol;
  const std::int64_t k = sig.block_count();
  if (k == 1) return otd1(t);

  std::vector<std::vector<std::int64_t>> splits;
  if (k == 2 || opts.split_policy == SplitPolicy::kFirstBlock) {
    splits.push_back({1});
  } else {
    // Every proper split containing block 1; the complement split is the same
    // two-group flattening with the groups swapped, so it is not repeated.
    const std::uint64_t combos = std::uint64_t{1} << (k - 1);
    for (std::uint64_t mask = 0; mask + 1 < combos; ++mask) {
      std::vector<std::int64_t> split = {1};
      for (std::int64_t j = 2; j <= k; ++j) {
        if ((mask >> (j - 2)) & 1u) split.push_back(j);
      }
      splits.push_back(std::move(split));
    }
  }

  RecursionStats stats;
  std::vector<Decomposition> results;
  results.reserve(splits.size());
  for (const auto& split : splits) {
    results.push_back(otd_recursive(t, sig, split, opts, structure_tol, stats));
  }
  if (stats.violated) {
    throw StructureViolation(
        "otd: no orthogonal atomic decomposition at signature " +
            sig.to_string() + " (structure deviation " +
            std::to_string(stats.max_deviation) + ")",
        std::move(results[0]), stats.max_deviation);
  }
  for (std::size_t s = 1; s < results.size(); ++s) {
    if (results[s].rank != results[0].rank) {
      throw StructureViolation(
          "otd: split choices disagree on rank (" +
              std::to_string(results[0].rank) + " vs " +
              std::to_string(results[s].rank) + ")",
          std::move(results[0]), 1.0);
    }
  }
  if (results.size() == 1) return std::move(results[0]);
  return average_splits(std::move(results), opts.tol);
}

Tensor reconstruct(const Decomposition& d, const Shape& shape) {
  if (d.signature.degree() != shape.degree()) {
    throw std::invalid_argument("reconstruct: signature degree " +
                                std::to_string(d.signature.degree()) +
                                " vs shape degree " +
                                std::to_string(shape.degree()));
  }
  const std::int64_t k = d.signature.block_count();
  if (static_cast<std::int64_t>(d.weights.size()) != d.rank ||
      static_cast<std::int64_t>(d.factors.size()) != d.rank) {
    throw std::invalid_argument("reconstruct: rank does not match weight/factor count");
  }
  std::vector<std::int64_t> dest_of_src;
  for (std::int64_t j = 1; j <= k; ++j) {
    for (std::int64_t mode : d.signature.block(j)) dest_of_src.push_back(mode);
  }
  bool is_identity = true;
  for (std::size_t p = 0; p < dest_of_src.size(); ++p) {
    if (dest_of_src[p] != static_cast<std::int64_t>(p) + 1) is_identity = false;
  }

  Tensor out(shape);
  for (std::int64_t i = 0; i < d.rank; ++i) {
    if (static_cast<std::int64_t>(d.factors[i].size()) != k) {
      throw std::invalid_argument("reconstruct: summand " + std::to_string(i + 1) +
                                  " has wrong block count");
    }
    for (std::int64_t j = 1; j <= k; ++j) {
      const Shape expected = block_shape(shape, d.signature.block(j));
      if (d.factors[i][j - 1].shape() != expected) {
        throw std::invalid_argument(
            "reconstruct: factor shape " + d.factors[i][j - 1].shape().to_string() +
            " at summand " + std::to_string(i + 1) + ", block " + std::to_string(j) +
            ", expected " + expected.to_string());
      }
    }
    Tensor product = outer_product(d.factors[i]);
    if (!is_identity) product = permute_modes(product, dest_of_src);
    const double w = d.weights[i];
    for (std::int64_t p = 0; p < out.size(); ++p) out[p] += w * product[p];
  }
  return out;
}

VerifyReport verify(const Tensor& t, const Decomposition& d, double tol) {
  VerifyReport report;
  const Tensor rec = reconstruct(d, t.shape());
  double diff_sq = 0.0;
  for (std::int64_t i = 0; i < t.size(); ++i) {
    const double diff = t[i] - rec[i];
    diff_sq += diff * diff;
  }
  report.residual = std::sqrt(diff_sq) / std::max(frobenius_norm(t), DBL_MIN);
  for (std::int64_t j = 0; j < d.signature.block_count(); ++j) {
    for (std::int64_t i = 0; i < d.rank; ++i) {
      for (std::int64_t c = i; c < d.rank; ++c) {
        const double g = scalar_product(d.factors[i][j], d.factors[c][j]);
        const double dev = std::abs(g - (i == c ? 1.0 : 0.0));
        report.max_gram_deviation = std::max(report.max_gram_deviation, dev);
      }
    }
  }
  report.ok = report.residual <= tol && report.max_gram_deviation <= tol;
  return report;
}

}  // namespace otd
