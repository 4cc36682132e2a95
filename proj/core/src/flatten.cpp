#include "otd/flatten.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace otd {

FlatteningMap::FlatteningMap(std::vector<std::int64_t> assignment)
    : assignment_(std::move(assignment)) {
  if (assignment_.empty()) {
    throw std::invalid_argument("FlatteningMap: source degree must be >= 1");
  }
  for (std::int64_t k : assignment_) {
    if (k < 1) {
      throw std::invalid_argument("FlatteningMap: target modes are 1-based, got " +
                                  std::to_string(k));
    }
    target_degree_ = std::max(target_degree_, k);
  }
  std::vector<bool> hit(target_degree_, false);
  for (std::int64_t k : assignment_) hit[k - 1] = true;
  for (std::int64_t k = 0; k < target_degree_; ++k) {
    if (!hit[k]) {
      throw std::invalid_argument("FlatteningMap: not surjective, target mode " +
                                  std::to_string(k + 1) + " is never attained");
    }
  }
}

FlatteningMap FlatteningMap::identity(std::int64_t degree) {
  std::vector<std::int64_t> assignment(degree);
  for (std::int64_t p = 0; p < degree; ++p) assignment[p] = p + 1;
  return FlatteningMap(std::move(assignment));
}

std::int64_t FlatteningMap::operator()(std::int64_t source_mode) const {
  if (source_mode < 1 || source_mode > source_degree()) {
    throw std::out_of_range("FlatteningMap: source mode " +
                            std::to_string(source_mode) + " outside [1," +
                            std::to_string(source_degree()) + "]");
  }
  return assignment_[source_mode - 1];
}

std::vector<std::int64_t> FlatteningMap::preimage(std::int64_t target_mode) const {
  if (target_mode < 1 || target_mode > target_degree()) {
    throw std::out_of_range("FlatteningMap: target mode " + std::to_string(target_mode) +
                            " outside [1, " + std::to_string(target_degree()) + "]");
  }
  std::vector<std::int64_t> modes;
  for (std::int64_t p = 0; p < source_degree(); ++p) {
    if (assignment_[p] == target_mode) modes.push_back(p + 1);
  }
  return modes;
}

Signature::Signature(std::vector<std::vector<std::int64_t>> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) {
    throw std::invalid_argument("Signature: at least one block required");
  }
  for (auto& block : blocks_) {
    if (block.empty()) {
      throw std::invalid_argument("Signature: blocks must be nonempty");
    }
    std::sort(block.begin(), block.end());
    degree_ += static_cast<std::int64_t>(block.size());
  }
  std::vector<std::int64_t> count(degree_, 0);
  for (const auto& block : blocks_) {
    for (std::int64_t mode : block) {
      if (mode < 1 || mode > degree_) {
        throw std::invalid_argument("Signature: mode " + std::to_string(mode) +
                                    " outside [1," + std::to_string(degree_) +
                                    "]");
      }
      if (++count[mode - 1] > 1) {
        throw std::invalid_argument("Signature: mode " + std::to_string(mode) +
                                    " appears in more than one block");
      }
    }
  }
  // Counts are all >= 1 now: d modes distributed injectively over d slots.
}

Signature Signature::singletons(std::int64_t degree) {
  std::vector<std::vector<std::int64_t>> blocks;
  for (std::int64_t m = 1; m <= degree; ++m) blocks.push_back({m});
  return Signature(std::move(blocks));
}

Signature Signature::single_block(std::int64_t degree) {
  std::vector<std::int64_t> all;
  for (std::int64_t m = 1; m <= degree; ++m) all.push_back(m);
  return Signature({std::move(all)});
}

Signature Signature::parse(const std::string& text) {
  if (!text.empty() && (text.back() == '|' || text.back() == ',')) {
    throw std::invalid_argument("Signature: trailing separator in '" + text + "'");
  }
  std::vector<std::vector<std::int64_t>> blocks;
  std::istringstream block_stream(text);
  std::string block_text;
  while (std::getline(block_stream, block_text, '|')) {
    std::vector<std::int64_t> block;
    if (!block_text.empty() && block_text.back() == ',') {
      throw std::invalid_argument("Signature: trailing separator in '" + text + "'");
    }
    std::istringstream mode_stream(block_text);
    std::string mode_text;
    while (std::getline(mode_stream, mode_text, ',')) {
      std::size_t pos = 0;
      long long mode = 0;
      try {
        mode = std::stoll(mode_text, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("Signature: cannot parse mode '" +
                                    mode_text + "' in '" + text + "'");
      }
      while (pos < mode_text.size() && std::isspace(static_cast<unsigned char>(mode_text[pos]))) {
        ++pos;
      }
      if (pos != mode_text.size()) {
        throw std::invalid_argument("Signature: cannot parse mode '" +
                                    mode_text + "' in '" + text + "'");
      }
      block.push_back(mode);
    }
    blocks.push_back(std::move(block));
  }
  if (blocks.empty()) {
    throw std::invalid_argument("Signature: empty signature string");
  }
  return Signature(std::move(blocks));
}

std::string Signature::to_string() const {
  std::ostringstream out;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (j > 0) out << "|";
    for (std::size_t p = 0; p < blocks_[j].size(); ++p) {
      if (p > 0) out << ",";
      out << blocks_[j][p];
    }
  }
  return out.str();
}

const std::vector<std::int64_t>& Signature::block(std::int64_t j) const {
  if (j < 1 || j > block_count()) {
    throw std::out_of_range("Signature: block " + std::to_string(j) +
                            " outside [1," + std::to_string(block_count()) + "]");
  }
  return blocks_[j - 1];
}

namespace {

// Per-source-mode offset weights realizing the flattening as a permutation of
// the flat buffer: weight[p] = (stride of mode p+1 within its target group) *
// (stride of its target mode in the flattened tensor).
struct FlattenPlan {
  Shape target_shape;
  std::vector<std::int64_t> weight;
};

FlattenPlan plan_flatten(const Shape& source, const FlatteningMap& sigma) {
  if (sigma.source_degree() != source.degree()) {
    throw std::invalid_argument("flatten: map expects degree " +
                                std::to_string(sigma.source_degree()) +
                                ", tensor has degree " +
                                std::to_string(source.degree()));
  }
  const std::int64_t dt = sigma.target_degree();
  std::vector<std::int64_t> target_dims(dt, 1);
  std::vector<std::int64_t> local_stride(source.degree(), 1);
  // Within a group, modes run ascending with the last (largest) one fastest,
  // so a mode's local stride collects the dims of the later group members.
  for (std::int64_t k = 1; k <= dt; ++k) {
    const std::vector<std::int64_t> group = sigma.preimage(k);
    std::int64_t stride = 1;
    for (auto it = group.rbegin(); it != group.rend(); ++it) {
      local_stride[*it - 1] = stride;
      stride *= source.dim(*it);
    }
    target_dims[k - 1] = stride;
  }
  Shape target_shape{target_dims};
  const std::vector<std::int64_t> target_strides = strides_of(target_shape);
  std::vector<std::int64_t> weight(source.degree());
  for (std::int64_t p = 0; p < source.degree(); ++p) {
    weight[p] = local_stride[p] * target_strides[sigma.assignment()[p] - 1];
  }
  return {std::move(target_shape), std::move(weight)};
}

}  // namespace

Tensor flatten(const Tensor& t, const FlatteningMap& sigma) {
  FlattenPlan plan = plan_flatten(t.shape(), sigma);
  Tensor out{plan.target_shape};
  const auto& sdims = t.shape().dims();
  const std::int64_t d = t.degree();
  std::vector<std::int64_t> idx(d, 0);
  std::int64_t dst = 0;
  for (std::int64_t flat = 0; flat < t.size(); ++flat) {
    out[dst] = t[flat];
    for (std::int64_t p = d - 1; p >= 0; --p) {
      if (++idx[p] < sdims[p]) {
        dst += plan.weight[p];
        break;
      }
      idx[p] = 0;
      dst -= (sdims[p] - 1) * plan.weight[p];
    }
  }
  return out;
}

Tensor unflatten(const Tensor& flat, const FlatteningMap& sigma,
                 const Shape& original_shape) {
  FlattenPlan plan = plan_flatten(original_shape, sigma);
  if (flat.shape() != plan.target_shape) {
    throw std::invalid_argument("unflatten: flattened shape " +
                                flat.shape().to_string() +
                                " inconsistent with original " +
                                original_shape.to_string() + ", expected " +
                                plan.target_shape.to_string());
  }
  Tensor out{original_shape};
  const auto& sdims = original_shape.dims();
  const std::int64_t d = original_shape.degree();
  std::vector<std::int64_t> idx(d, 0);
  std::int64_t src = 0;
  for (std::int64_t flat_pos = 0; flat_pos < out.size(); ++flat_pos) {
    out[flat_pos] = flat[src];
    for (std::int64_t p = d - 1; p >= 0; --p) {
      if (++idx[p] < sdims[p]) {
        src += plan.weight[p];
        break;
      }
      idx[p] = 0;
      src -= (sdims[p] - 1) * plan.weight[p];
    }
  }
  return out;
}

bool is_compatible(const FlatteningMap& sigma, const Signature& sig) {
  if (sigma.source_degree() != sig.degree()) {
    throw std::invalid_argument("is_compatible: map degree " +
                                std::to_string(sigma.source_degree()) +
                                " vs signature degree " +
                                std::to_string(sig.degree()));
  }
  for (const auto& block : sig.blocks()) {
    for (std::int64_t mode : block) {
      if (sigma(mode) != sigma(block.front())) return false;
    }
  }
  return true;
}

bool is_strictly_compatible(const FlatteningMap& sigma, const Signature& sig) {
  if (!is_compatible(sigma, sig)) return false;
  // Same target mode must also imply same block: each target-mode preimage has
  // to coincide with exactly one block.
  std::vector<std::int64_t> block_of(sig.degree() + 1, 0);
  for (std::int64_t j = 1; j <= sig.block_count(); ++j) {
    for (std::int64_t mode : sig.block(j)) block_of[mode] = j;
  }
  for (std::int64_t k = 1; k <= sigma.target_degree(); ++k) {
    const std::vector<std::int64_t> group = sigma.preimage(k);
    const std::int64_t j = block_of[group.front()];
    if (static_cast<std::int64_t>(group.size()) !=
        static_cast<std::int64_t>(sig.block(j).size())) {
      return false;
    }
  }
  return true;
}

FlatteningMap signature_to_two_flattening(const Signature& sig,
                                          std::span<const std::int64_t> split) {
  const std::int64_t k = sig.block_count();
  if (split.empty() || static_cast<std::int64_t>(split.size()) >= k) {
    throw std::invalid_argument(
        "signature_to_two_flattening: split must be a nonempty proper subset "
        "of the blocks");
  }
  std::vector<bool> chosen(k, false);
  for (std::int64_t j : split) {
    if (j < 1 || j > k) {
      throw std::invalid_argument("signature_to_two_flattening: block index " +
                                  std::to_string(j) + " outside [1," +
                                  std::to_string(k) + "]");
    }
    if (chosen[j - 1]) {
      throw std::invalid_argument(
          "signature_to_two_flattening: duplicate block index " +
          std::to_string(j));
    }
    chosen[j - 1] = true;
  }
  std::vector<std::int64_t> assignment(sig.degree(), 2);
  for (std::int64_t j = 1; j <= k; ++j) {
    if (!chosen[j - 1]) continue;
    for (std::int64_t mode : sig.block(j)) assignment[mode - 1] = 1;
  }
  return FlatteningMap(std::move(assignment));
}

}  // namespace otd
