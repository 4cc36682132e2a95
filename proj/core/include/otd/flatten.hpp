// Flattening maps (mode regroupings), signatures (ordered mode partitions),
// matricization and its exact inverse, and compatibility predicates.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "otd/tensor.hpp"

namespace otd {

// Surjective assignment of d source modes onto d~ target modes (both 1-based).
class FlatteningMap {
 public:
  // assignment[p] is the target mode of source mode p+1; values must cover
  // 1..max(assignment) with no gaps.
  explicit FlatteningMap(std::vector<std::int64_t> assignment);

  static FlatteningMap identity(std::int64_t degree);

  std::int64_t source_degree() const { return static_cast<std::int64_t>(assignment_.size()); }
  std::int64_t target_degree() const { return target_degree_; }
  const std::vector<std::int64_t>& assignment() const { return assignment_; }
  std::int64_t operator()(std::int64_t source_mode) const;  // 1-based both ways

  // Source modes mapped to the given target mode, in ascending order.
  std::vector<std::int64_t> preimage(std::int64_t target_mode) const;

 private:
  std::vector<std::int64_t> assignment_;
  std::int64_t target_degree_ = 0;
};

// Ordered partition (S_1,...,S_k) of the mode set {1,...,d}. Block order is
// meaningful; modes within a block are kept sorted ascending.
class Signature {
 public:
  Signature() = default;  // empty placeholder; real signatures have >= 1 block
  explicit Signature(std::vector<std::vector<std::int64_t>> blocks);

  static Signature singletons(std::int64_t degree);   // ({1},{2},...,{d})
  static Signature single_block(std::int64_t degree);  // ({1,...,d})

  // Parses the CLI syntax: blocks separated by '|', modes by ','  (e.g. "1|2,3").
  static Signature parse(const std::string& text);
  std::string to_string() const;

  std::int64_t degree() const { return degree_; }
  std::int64_t block_count() const { return static_cast<std::int64_t>(blocks_.size()); }
  const std::vector<std::vector<std::int64_t>>& blocks() const { return blocks_; }
  const std::vector<std::int64_t>& block(std::int64_t j) const;  // 1-based

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.blocks_ == b.blocks_;
  }

 private:
  std::vector<std::vector<std::int64_t>> blocks_;
  std::int64_t degree_ = 0;
};

// The sigma-flattening of T: target mode k collects the source modes of
// sigma^{-1}(k) in ascending order, linearized with the last one fastest.
// A pure relabeling of entries; inverted exactly by unflatten.
Tensor flatten(const Tensor& t, const FlatteningMap& sigma);

// Exact inverse of flatten given the original shape.
Tensor unflatten(const Tensor& flat, const FlatteningMap& sigma,
                 const Shape& original_shape);

// True iff modes in a common signature block always share a target mode.
bool is_compatible(const FlatteningMap& sigma, const Signature& sig);

// True iff (same block <=> same target mode).
bool is_strictly_compatible(const FlatteningMap& sigma, const Signature& sig);

// d-to-2 map sending modes of the blocks listed in `split` (1-based block
// indices, nonempty proper subset) to target 1 and all others to target 2.
FlatteningMap signature_to_two_flattening(const Signature& sig,
                                          std::span<const std::int64_t> split);

}  // namespace otd
