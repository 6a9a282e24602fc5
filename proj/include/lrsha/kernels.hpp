#pragma once

#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

#include "lrsha/bytes.hpp"
#include "lrsha/group.hpp"
#include "lrsha/keyderive.hpp"
#include "lrsha/merkle.hpp"

// Data-parallel range kernels. Each has a straightforward serial reference,
// kept for equivalence tests and the kernel benchmark.
namespace lrsha::kernels {

enum class Exec { serial, parallel };

// out[i] = fn(lo + i) for every epoch in [lo, hi]. Exceptions thrown by fn
// are rethrown on the calling thread (the first one wins).
template <class Fn>
auto map_epochs(std::uint64_t lo, std::uint64_t hi, Fn&& fn, Exec exec = Exec::parallel)
    -> std::vector<decltype(fn(lo))> {
  using T = decltype(fn(lo));
  if (hi < lo) return {};
  const auto n = static_cast<std::int64_t>(hi - lo + 1);
  std::vector<T> out(static_cast<std::size_t>(n));
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) out[i] = fn(lo + static_cast<std::uint64_t>(i));
    return out;
  }
  std::exception_ptr failure;
  std::mutex failure_mu;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = fn(lo + static_cast<std::uint64_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// Leaf digests of the forward-secure certification tree, one per epoch key
// seed: H(tag, epoch, encode(g^scalar(seed_j))).
std::vector<Digest> fs_epoch_leaves(const Group& g, std::span<const Seed> epoch_seeds,
                                    Exec exec = Exec::parallel);
Digest fs_leaf(std::uint64_t epoch, const GroupElement& epoch_key);

// g^PRF_key(j) for j in [lo, hi]: the per-server nonce commitments.
std::vector<GroupElement> prf_commitments(const Group& g, ByteView prf_key, std::uint64_t lo,
                                          std::uint64_t hi, Exec exec = Exec::parallel);

// g^scalar(chain value at j) for j in [lo, hi], read from a chain table.
std::vector<GroupElement> chain_commitments(const Group& g, const ChainTable& table,
                                            std::uint64_t lo, std::uint64_t hi,
                                            Exec exec = Exec::parallel);

int max_threads();

}  // namespace lrsha::kernels
