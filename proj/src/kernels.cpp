#include "lrsha/kernels.hpp"

#include <omp.h>

namespace lrsha::kernels {

Digest fs_leaf(std::uint64_t epoch, const GroupElement& epoch_key) {
  Bytes ep = Writer().u64(epoch).take();
  return tagged_hash("lrsha/fs-leaf", {ep, epoch_key.bytes});
}

std::vector<Digest> fs_epoch_leaves(const Group& g, std::span<const Seed> epoch_seeds, Exec exec) {
  if (epoch_seeds.empty()) return {};
  return map_epochs(
      1, epoch_seeds.size(),
      [&](std::uint64_t epoch) {
        Scalar sk = seed_to_scalar(g, epoch_seeds[epoch - 1]);
        Digest leaf = fs_leaf(epoch, g.exp_base(sk));
        wipe(sk.bytes);
        return leaf;
      },
      exec);
}

std::vector<GroupElement> prf_commitments(const Group& g, ByteView prf_key, std::uint64_t lo,
                                          std::uint64_t hi, Exec exec) {
  return map_epochs(
      lo, hi,
      [&](std::uint64_t j) {
        Scalar r = prf(g, prf_key, j, PrfRole::nonce_seed);
        GroupElement R = g.exp_base(r);
        wipe(r.bytes);
        return R;
      },
      exec);
}

std::vector<GroupElement> chain_commitments(const Group& g, const ChainTable& table,
                                            std::uint64_t lo, std::uint64_t hi, Exec exec) {
  return map_epochs(
      lo, hi,
      [&](std::uint64_t j) {
        Seed s = table.lookup(j);
        Scalar x = seed_to_scalar(g, s);
        GroupElement out = g.exp_base(x);
        wipe(s.bytes);
        wipe(x.bytes);
        return out;
      },
      exec);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace lrsha::kernels
