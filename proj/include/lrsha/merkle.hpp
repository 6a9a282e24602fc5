#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lrsha/bytes.hpp"

namespace lrsha {

using Digest = Bytes32;

Digest merkle_node(const Digest& left, const Digest& right);

// Binary hash tree. Leaf counts that are not a power of two are padded with
// all-zero digests; a single leaf is its own root.
class MerkleTree {
 public:
  explicit MerkleTree(std::vector<Digest> leaves);

  const Digest& root() const { return levels_.back().front(); }
  std::size_t depth() const { return levels_.size() - 1; }
  std::size_t leaf_count() const { return leaf_count_; }
  const std::vector<Digest>& padded_leaves() const { return levels_.front(); }

  // Sibling digests from the leaf up to (excluding) the root.
  std::vector<Digest> path(std::size_t index) const;

  // Recomputes the root implied by `leaf` sitting at `index` with `path`.
  static Digest fold(Digest leaf, std::size_t index, std::span<const Digest> path);
  // ceil(log2(n)), with depth_for(1) == 0.
  static std::size_t depth_for(std::size_t n);

 private:
  std::size_t leaf_count_;
  std::vector<std::vector<Digest>> levels_;
};

}  // namespace lrsha
