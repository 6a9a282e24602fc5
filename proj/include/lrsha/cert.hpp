#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lrsha/bytes.hpp"
#include "lrsha/error.hpp"
#include "lrsha/group.hpp"
#include "lrsha/kernels.hpp"
#include "lrsha/keyderive.hpp"
#include "lrsha/merkle.hpp"
#include "lrsha/rng.hpp"

// Commitment certification. Servers sign what they serve so a verifier can
// attribute a bad commitment to the server that produced it.
//
//   plain (SGN):   Schnorr signature under a long-term key.
//   forward (FSGN): Schnorr signature under a per-epoch key. Epoch secrets
//                  come from a forward hash chain; epoch public keys are
//                  committed to by a Merkle root, which is all a verifier stores.
namespace lrsha {

enum class CertTag : std::uint8_t { plain = 1, forward_secure = 2 };

struct CertKeypair {
  Scalar secret;
  GroupElement public_key;
};

// Wire layout:
//   tag(1) | epoch(8, LE; 0 for plain) | e(32) | s(32) | path_len(2, LE) | path(32 each)
//   | epoch_key(32)   <- forward_secure only
// `e` is the full 256-bit challenge digest; it is reduced mod q only when used
// as an exponent.
struct Certificate {
  CertTag tag = CertTag::plain;
  std::uint64_t epoch = 0;
  Bytes32 e{};
  Bytes32 s{};
  std::vector<Digest> path;
  GroupElement epoch_key;

  Bytes encode() const;
  // Throws Errc::decode_error on any structural problem.
  static Certificate decode(ByteView in);
  std::size_t encoded_size() const;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

std::size_t certificate_size(CertTag tag, std::uint64_t max_epoch);

CertKeypair sgn_keygen(const Group& g, Rng& rng);
CertKeypair sgn_keypair_from_secret(const Group& g, const Scalar& secret);
// Deterministic: the nonce is derived from the secret and the message.
Certificate sgn_sign(const Group& g, const CertKeypair& kp, ByteView msg);
Verdict sgn_verify(const Group& g, const GroupElement& pk, ByteView msg, const Certificate& cert);
Verdict sgn_verify(const Group& g, const GroupElement& pk, ByteView msg, ByteView cert_bytes);

// Signer side of the forward-secure certification scheme. `current_epoch()`
// is the lowest epoch that can still be certified; everything below it has
// had its secret erased.
class FsCertState {
 public:
  static FsCertState keygen(const Group& g, std::uint64_t max_epoch, Rng& rng,
                            kernels::Exec exec = kernels::Exec::parallel);

  FsCertState(const FsCertState&) = default;
  FsCertState(FsCertState&&) noexcept = default;
  FsCertState& operator=(const FsCertState&) = default;
  FsCertState& operator=(FsCertState&&) noexcept = default;
  ~FsCertState();

  const Digest& root() const { return tree_.root(); }
  std::uint64_t current_epoch() const { return epoch_; }
  std::uint64_t max_epoch() const { return max_epoch_; }
  bool exhausted() const { return !seed_.has_value(); }
  GroupId group_id() const { return group_; }

  // Certifies `msg` for `epoch`, then erases every secret up to and including
  // that epoch. Errors: epoch_out_of_range (epoch 0 or > J), epoch_expired
  // (epoch < current_epoch()).
  Certificate sign(std::uint64_t epoch, ByteView msg);
  // Erases secrets for every epoch below `epoch` without signing.
  void advance_to(std::uint64_t epoch);
  // Available for epochs that have not been erased yet.
  GroupElement epoch_public_key(std::uint64_t epoch) const;
  std::vector<Digest> path(std::uint64_t epoch) const { return tree_.path(epoch - 1); }

  // group(1) | J(8) | epoch(8) | has_seed(1) | [seed(32)] | leaves(J * 32)
  Bytes serialize() const;
  static FsCertState deserialize(ByteView in);

 private:
  FsCertState(GroupId group, std::uint64_t max_epoch, std::uint64_t epoch,
              std::optional<Seed> seed, MerkleTree tree);

  GroupId group_;
  std::uint64_t max_epoch_;
  std::uint64_t epoch_;
  std::optional<Seed> seed_;
  MerkleTree tree_;
};

Verdict fsgn_verify(const Group& g, const Digest& root, std::uint64_t max_epoch,
                    std::uint64_t epoch, ByteView msg, const Certificate& cert);
Verdict fsgn_verify(const Group& g, const Digest& root, std::uint64_t max_epoch,
                    std::uint64_t epoch, ByteView msg, ByteView cert_bytes);

}  // namespace lrsha
