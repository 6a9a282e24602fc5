#pragma once

#include <cstdint>

namespace lrsha::metrics {

// Per-thread operation counters. The group and key-derivation layers bump
// these on every call so tests can assert cost shapes (for example that
// signing performs no exponentiations).
struct OpCounts {
  std::uint64_t exp = 0;          // group exponentiations, base or variable
  std::uint64_t elem_mul = 0;     // group multiplications
  std::uint64_t prf = 0;          // PRF evaluations
  std::uint64_t hash = 0;         // hash-to-scalar evaluations
  std::uint64_t chain_hash = 0;   // one step of a seed hash chain
  std::uint64_t seed_reduce = 0;  // seed -> scalar reductions
  std::uint64_t scalar_sum = 0;   // multi-term scalar summations
  std::uint64_t mulsub = 0;       // r - e*y

  OpCounts operator-(const OpCounts& o) const {
    return {exp - o.exp,
            elem_mul - o.elem_mul,
            prf - o.prf,
            hash - o.hash,
            chain_hash - o.chain_hash,
            seed_reduce - o.seed_reduce,
            scalar_sum - o.scalar_sum,
            mulsub - o.mulsub};
  }
};

OpCounts& local();

// Snapshot of the calling thread's counters; delta() reports work since construction.
class Probe {
 public:
  Probe() : start_(local()) {}
  OpCounts delta() const { return local() - start_; }

 private:
  OpCounts start_;
};

}  // namespace lrsha::metrics
