#include "lrsha/merkle.hpp"

#include "lrsha/error.hpp"
#include "lrsha/keyderive.hpp"

namespace lrsha {

Digest merkle_node(const Digest& left, const Digest& right) {
  return tagged_hash("lrsha/merkle-node", {left, right});
}

std::size_t MerkleTree::depth_for(std::size_t n) {
  std::size_t d = 0;
  while ((std::size_t{1} << d) < n) ++d;
  return d;
}

MerkleTree::MerkleTree(std::vector<Digest> leaves) : leaf_count_(leaves.size()) {
  if (leaves.empty()) throw Error(Errc::empty_list, "Merkle tree needs at least one leaf");
  leaves.resize(std::size_t{1} << depth_for(leaves.size()), Digest{});
  levels_.push_back(std::move(leaves));
  while (levels_.back().size() > 1) {
    const auto& below = levels_.back();
    std::vector<Digest> up(below.size() / 2);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = merkle_node(below[2 * i], below[2 * i + 1]);
    levels_.push_back(std::move(up));
  }
}

std::vector<Digest> MerkleTree::path(std::size_t index) const {
  if (index >= leaf_count_) throw Error(Errc::epoch_out_of_range, "leaf index out of range");
  std::vector<Digest> out;
  out.reserve(depth());
  for (std::size_t level = 0; level + 1 < levels_.size(); ++level) {
    out.push_back(levels_[level][index ^ 1]);
    index >>= 1;
  }
  return out;
}

Digest MerkleTree::fold(Digest leaf, std::size_t index, std::span<const Digest> path) {
  for (const auto& sibling : path) {
    leaf = (index & 1) ? merkle_node(sibling, leaf) : merkle_node(leaf, sibling);
    index >>= 1;
  }
  return leaf;
}

}  // namespace lrsha
