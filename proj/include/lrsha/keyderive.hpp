#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

#include "lrsha/bytes.hpp"
#include "lrsha/group.hpp"
#include "lrsha/rng.hpp"

// Deterministic key material: a keyed PRF, the hash-to-scalar oracle, the seed
// hash chain used for key evolution, and the strided chain table servers use
// to jump to an arbitrary epoch. Everything is BLAKE2b with a role tag.
namespace lrsha {

struct Seed {
  Bytes32 bytes{};

  static Seed random(Rng& rng) { return {rng.bytes32()}; }
  friend bool operator==(const Seed&, const Seed&) = default;
};

enum class PrfRole : std::uint8_t {
  nonce_seed = 1,    // r^l -> r_j^l
  key_chain = 2,     // y-chain material
  message_mask = 3,  // y -> x_j
};

// PRF_key(counter) reduced mod q. Counters are epoch indices (>= 1).
Scalar prf(const Group& g, ByteView key, std::uint64_t counter,
           PrfRole role = PrfRole::nonce_seed);
// Full-width 32-byte PRF output, used where the value is only ever hashed.
Bytes32 prf_bytes(ByteView key, std::uint64_t counter, PrfRole role);

// H(msg) mod q via a 512-bit digest.
Scalar hash_to_scalar(const Group& g, ByteView msg);
// H(message || mask) mod q without materialising the concatenation.
Scalar challenge(const Group& g, ByteView message, const Bytes32& mask);

// One step of the evolution chain: seed -> H(seed).
Seed chain_step(const Seed& s);
// k-fold iteration; hash_chain(s, 0) == s.
Seed hash_chain(Seed s, std::uint64_t k);
// Maps a chain value to the scalar it stands for at the point of use.
Scalar seed_to_scalar(const Group& g, const Seed& s);

// 32-byte BLAKE2b over (tag length, tag, parts...). Used for Merkle nodes,
// certificate challenges and other fixed-role digests.
Bytes32 tagged_hash(std::string_view tag, std::initializer_list<ByteView> parts);

// Anchors every `stride` epochs of a hash chain, so that any epoch is at most
// stride-1 hash steps away from a stored value.
class ChainTable {
 public:
  struct Anchor {
    std::uint64_t epoch;
    Seed seed;
  };

  // Throws Errc::invalid_stride unless 1 <= stride <= max_epoch.
  static ChainTable build(const Seed& first, std::uint64_t max_epoch, std::uint64_t stride);

  ChainTable(const ChainTable&) = default;
  ChainTable(ChainTable&&) noexcept = default;
  ChainTable& operator=(const ChainTable&) = default;
  ChainTable& operator=(ChainTable&&) noexcept = default;
  ~ChainTable();

  // hash_chain(first, j - 1); throws Errc::epoch_out_of_range outside [1, max_epoch].
  Seed lookup(std::uint64_t j) const;
  // Number of chain_step calls lookup(j) performs.
  std::uint64_t lookup_cost(std::uint64_t j) const { return (j - 1) % stride_; }

  std::uint64_t stride() const { return stride_; }
  std::uint64_t max_epoch() const { return max_epoch_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }

 private:
  ChainTable() = default;
  std::uint64_t stride_ = 1;
  std::uint64_t max_epoch_ = 0;
  std::vector<Anchor> anchors_;
};

}  // namespace lrsha
