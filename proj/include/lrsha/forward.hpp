#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lrsha/cert.hpp"
#include "lrsha/keyderive.hpp"
#include "lrsha/params.hpp"
#include "lrsha/rng.hpp"
#include "lrsha/signature.hpp"

// FLRSHA: the forward-secure variant. Signer and server l share two seed
// chains (y^l and r^l). Epoch j uses the (j-1)-th hash of each seed; the
// signer hashes its chains forward after every signature and forgets the old
// values. Servers publish per-epoch Y_j^l and R_j^l under a forward-secure
// certificate, so the verifier needs only the L certification roots.
namespace lrsha::forward {

struct SignerKey {
  GroupId group_id = GroupId::ristretto255;
  std::vector<Seed> y_chain;  // y_j^1..y_j^L
  std::vector<Seed> r_chain;  // r_j^1..r_j^L
  std::uint64_t epoch = 1;    // current j; max_epoch + 1 once exhausted
  std::uint64_t max_epoch = kDefaultMaxSignatures;

  SignerKey() = default;
  SignerKey(const SignerKey&) = default;
  SignerKey(SignerKey&&) noexcept = default;
  SignerKey& operator=(const SignerKey&) = default;
  SignerKey& operator=(SignerKey&&) noexcept = default;
  ~SignerKey();

  bool exhausted() const { return epoch > max_epoch; }

  // y-chain (L*32) | r-chain (L*32) | j(8) | J(8); chains are zero once exhausted.
  Bytes serialize_payload() const;
  static SignerKey from_payload(GroupId group, std::uint32_t servers, ByteView payload);
};

struct VerifierKey {
  SchemeParams params;
  std::vector<Digest> roots;  // one forward-secure certification root per server
};

struct ServerSecret {
  SchemeParams params;
  std::uint16_t index = 1;
  Seed y_first;
  Seed r_first;
  FsCertState cert_state;
  // Optional strided tables over both chains; not serialized.
  std::shared_ptr<const ChainTable> y_table;
  std::shared_ptr<const ChainTable> r_table;

  ServerSecret(SchemeParams p, std::uint16_t idx, Seed y1, Seed r1, FsCertState state);
  ServerSecret(const ServerSecret&) = default;
  ServerSecret(ServerSecret&&) noexcept = default;
  ServerSecret& operator=(const ServerSecret&) = default;
  ServerSecret& operator=(ServerSecret&&) noexcept = default;
  ~ServerSecret();

  void build_tables(std::uint64_t stride);
  Seed y_at(std::uint64_t epoch) const;
  Seed r_at(std::uint64_t epoch) const;

  // "FRSS" | version(1) | params(14) | index(2) | y1(32) | r1(32) | FS state
  Bytes encode() const;
  static ServerSecret decode(ByteView in);
};

// server(2) | epoch(8) | Y(32) | R(32) | certificate
struct CommitmentBundle {
  std::uint16_t server = 0;
  std::uint64_t epoch = 0;
  GroupElement Y;
  GroupElement R;
  Certificate cert;

  Bytes encode() const;
  static CommitmentBundle decode(ByteView in);
  friend bool operator==(const CommitmentBundle&, const CommitmentBundle&) = default;
};

struct KeySet {
  SignerKey signer;
  VerifierKey verifier_key;
  std::vector<ServerSecret> servers;
};

struct EpochMaterial {
  std::uint64_t epoch = 0;
  Scalar y_sum;
  Scalar r_sum;
  Bytes32 x{};
};

struct Aggregate {
  GroupElement Y;
  GroupElement R;
  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

KeySet keygen(const SchemeParams& params, Rng& rng,
              kernels::Exec exec = kernels::Exec::parallel);

// Advances every chain one step and erases the previous values.
// Throws Errc::state_exhausted when j >= J.
void update(SignerKey& key);

EpochMaterial epoch_material(const SignerKey& key);
// Signs at the key's current epoch and then evolves the key. Signing at
// epoch J is allowed once and leaves the key exhausted with its chains erased.
Signature sign_with(SignerKey& key, ByteView message, const EpochMaterial& material);
Signature sign(SignerKey& key, ByteView message);

// Message certified by server l for epoch j: tag | l | j | Y | R.
Bytes commitment_message(std::uint16_t server, std::uint64_t epoch, const GroupElement& Y,
                         const GroupElement& R);
// (Y_j^l, R_j^l) without certifying. Throws Errc::epoch_out_of_range.
Aggregate derive_commitments(const ServerSecret& secret, std::uint64_t epoch);
// Live path: certifies epoch j, which erases the certification secrets for
// all epochs <= j. Errors: epoch_out_of_range, epoch_expired.
CommitmentBundle server_commit(ServerSecret& secret, std::uint64_t epoch);

Verdict check_bundle(const VerifierKey& vk, std::uint16_t server, std::uint64_t epoch,
                     const CommitmentBundle& bundle);
// Errors: missing_server, epoch_mismatch, cert_failure{l}.
Aggregate aggregate(std::span<const CommitmentBundle> bundles, const VerifierKey& vk);
Verdict verify(const VerifierKey& vk, ByteView message, const Signature& sig, const Aggregate& agg);

}  // namespace lrsha::forward
