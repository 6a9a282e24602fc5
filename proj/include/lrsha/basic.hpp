#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrsha/cert.hpp"
#include "lrsha/keyderive.hpp"
#include "lrsha/params.hpp"
#include "lrsha/rng.hpp"
#include "lrsha/signature.hpp"

// LRSHA: Schnorr-style signatures whose commitments are produced by L
// commitment-construction (ComC) servers instead of the signer.
//
// The signer holds y and one PRF seed per server. For epoch j it derives
// r_j = sum_l PRF_{r^l}(j) and the mask x_j = PRF_y(j), and signs with
// s = r_j - H(M || x_j) * y. No group operation happens on the signing path.
// Server l publishes R_j^l = g^{PRF_{r^l}(j)} with a certificate; the verifier
// multiplies the L commitments and checks R_j = g^s * Y^e.
namespace lrsha::basic {

struct SignerKey {
  GroupId group_id = GroupId::ristretto255;
  Scalar y;
  std::vector<Seed> seeds;  // r^1..r^L
  std::uint64_t epoch = 1;  // next epoch to sign; max_epoch + 1 once exhausted
  std::uint64_t max_epoch = kDefaultMaxSignatures;

  SignerKey() = default;
  SignerKey(const SignerKey&) = default;
  SignerKey(SignerKey&&) noexcept = default;
  SignerKey& operator=(const SignerKey&) = default;
  SignerKey& operator=(SignerKey&&) noexcept = default;
  ~SignerKey();

  // y(32) | r^1..r^L (32 each) | j(8) | J(8)
  Bytes serialize_payload() const;
  static SignerKey from_payload(GroupId group, std::uint32_t servers, ByteView payload);
};

struct PublicKey {
  SchemeParams params;
  GroupElement Y;
  std::vector<GroupElement> cert_keys;  // PK'^1..PK'^L
};

// What server l holds inside its keystore: <sk'^l, r^l>.
struct ServerSecret {
  SchemeParams params;
  std::uint16_t index = 1;
  CertKeypair cert;
  Seed seed;

  ServerSecret() = default;
  ServerSecret(const ServerSecret&) = default;
  ServerSecret(ServerSecret&&) noexcept = default;
  ServerSecret& operator=(const ServerSecret&) = default;
  ServerSecret& operator=(ServerSecret&&) noexcept = default;
  ~ServerSecret();

  // "LRSS" | version(1) | params(14) | index(2) | sk'(32) | r(32)
  Bytes encode() const;
  static ServerSecret decode(ByteView in);
};

// server(2) | epoch(8) | R(32) | certificate
struct CommitmentBundle {
  std::uint16_t server = 0;
  std::uint64_t epoch = 0;
  GroupElement R;
  Certificate cert;

  Bytes encode() const;
  static CommitmentBundle decode(ByteView in);
  friend bool operator==(const CommitmentBundle&, const CommitmentBundle&) = default;
};

struct KeySet {
  SignerKey signer;
  PublicKey public_key;
  std::vector<ServerSecret> servers;
};

// Offline half of signing: everything that does not depend on the message.
struct EpochMaterial {
  std::uint64_t epoch = 0;
  Scalar r_sum;
  Bytes32 x{};
};

KeySet keygen(const SchemeParams& params, Rng& rng);

// Message certified by server l for epoch j: tag | l | j | R.
Bytes commitment_message(std::uint16_t server, std::uint64_t epoch, const GroupElement& R);
GroupElement derive_commitment(const ServerSecret& secret, std::uint64_t epoch);
// Throws Errc::epoch_out_of_range for epoch 0.
CommitmentBundle server_commit(const ServerSecret& secret, std::uint64_t epoch);

EpochMaterial epoch_material(const SignerKey& key, std::uint64_t epoch);
// Online half: one hash and one mulsub, then the state advances.
// Errors: state_exhausted; epoch_expired if the material is for another epoch.
Signature sign_with(SignerKey& key, ByteView message, const EpochMaterial& material);
Signature sign(SignerKey& key, ByteView message);

// Checks that `bundle` is server `server`'s certified commitment for `epoch`.
Verdict check_bundle(const PublicKey& pk, std::uint16_t server, std::uint64_t epoch,
                     const CommitmentBundle& bundle);
// Verifies all L certificates and returns the product of the commitments.
// Errors: missing_server, epoch_mismatch, cert_failure{l}.
GroupElement aggregate(std::span<const CommitmentBundle> bundles, const PublicKey& pk);
Verdict verify(const PublicKey& pk, ByteView message, const Signature& sig,
               const GroupElement& R_agg);

}  // namespace lrsha::basic
