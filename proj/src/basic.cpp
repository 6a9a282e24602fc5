#include "lrsha/basic.hpp"

#include <string>

#include "lrsha/error.hpp"

namespace lrsha::basic {
namespace {

constexpr std::string_view kSecretMagic = "LRSS";
constexpr std::uint8_t kSecretVersion = 1;
constexpr std::string_view kCommitTag = "lrsha/commit";

void check_epoch(std::uint64_t epoch, std::uint64_t max_epoch) {
  if (epoch < 1 || epoch > max_epoch) {
    throw Error(Errc::epoch_out_of_range,
                "epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(max_epoch) + "]",
                std::nullopt, epoch);
  }
}

}  // namespace

SignerKey::~SignerKey() {
  wipe(y.bytes);
  for (auto& s : seeds) wipe(s.bytes);
}

Bytes SignerKey::serialize_payload() const {
  Writer w(32 * (seeds.size() + 1) + 16);
  w.raw(y.bytes);
  for (const auto& s : seeds) w.raw(s.bytes);
  w.u64(epoch).u64(max_epoch);
  return w.take();
}

SignerKey SignerKey::from_payload(GroupId group, std::uint32_t servers, ByteView payload) {
  if (payload.size() != 32 * (std::size_t{servers} + 1) + 16) {
    throw Error(Errc::corrupt_key_file, "LRSHA key payload has the wrong length");
  }
  Reader r(payload);
  SignerKey k;
  k.group_id = group;
  auto y = group_by_id(group).decode_scalar(r.raw(32));
  if (!y) throw Error(Errc::corrupt_key_file, "LRSHA key holds a non-canonical y");
  k.y = *y;
  for (std::uint32_t i = 0; i < servers; ++i) k.seeds.push_back({r.raw32()});
  k.epoch = r.u64();
  k.max_epoch = r.u64();
  if (k.max_epoch < 1 || k.epoch < 1 || k.epoch > k.max_epoch + 1) {
    throw Error(Errc::corrupt_key_file, "LRSHA key state out of range");
  }
  return k;
}

ServerSecret::~ServerSecret() {
  wipe(cert.secret.bytes);
  wipe(seed.bytes);
}

Bytes ServerSecret::encode() const {
  Writer w(4 + 1 + 14 + 2 + 64);
  w.raw(as_bytes(kSecretMagic)).u8(kSecretVersion);
  write_params(w, params);
  w.u16(index).raw(cert.secret.bytes).raw(seed.bytes);
  return w.take();
}

ServerSecret ServerSecret::decode(ByteView in) {
  try {
    Reader r(in);
    auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kSecretMagic.begin()) || r.u8() != kSecretVersion) {
      throw Error(Errc::malformed_secret, "not an LRSHA server secret");
    }
    ServerSecret s;
    s.params = read_params(r);
    if (s.params.scheme != Scheme::lrsha) {
      throw Error(Errc::malformed_secret, "secret is not for the LRSHA scheme");
    }
    s.index = r.u16();
    if (s.index < 1 || s.index > s.params.servers) {
      throw Error(Errc::malformed_secret, "server index outside [1, L]");
    }
    const Group& g = s.params.group();
    auto sk = g.decode_scalar(r.raw(32));
    if (!sk) throw Error(Errc::malformed_secret, "non-canonical certification key");
    s.cert = sgn_keypair_from_secret(g, *sk);
    s.seed = {r.raw32()};
    r.expect_done();
    return s;
  } catch (const Error& e) {
    if (e.code() == Errc::malformed_secret) throw;
    throw Error(Errc::malformed_secret, std::string("LRSHA server secret: ") + e.what());
  }
}

Bytes CommitmentBundle::encode() const {
  Writer w(42 + cert.encoded_size());
  w.u16(server).u64(epoch).raw(R.bytes).raw(cert.encode());
  return w.take();
}

CommitmentBundle CommitmentBundle::decode(ByteView in) {
  Reader r(in);
  CommitmentBundle b;
  b.server = r.u16();
  b.epoch = r.u64();
  b.R.bytes = r.raw32();
  b.cert = Certificate::decode(r.raw(r.remaining()));
  return b;
}

KeySet keygen(const SchemeParams& params, Rng& rng) {
  params.validate();
  if (params.scheme != Scheme::lrsha) throw Error(Errc::invalid_params, "params are not LRSHA");
  const Group& g = params.group();
  KeySet ks;
  ks.signer.group_id = params.group_id;
  ks.signer.y = g.random_scalar(rng);
  ks.signer.max_epoch = params.max_signatures;
  ks.public_key.params = params;
  ks.public_key.Y = g.exp_base(ks.signer.y);
  for (std::uint32_t l = 1; l <= params.servers; ++l) {
    ServerSecret s;
    s.params = params;
    s.index = static_cast<std::uint16_t>(l);
    s.cert = sgn_keygen(g, rng);
    s.seed = Seed::random(rng);
    ks.signer.seeds.push_back(s.seed);
    ks.public_key.cert_keys.push_back(s.cert.public_key);
    ks.servers.push_back(std::move(s));
  }
  return ks;
}

Bytes commitment_message(std::uint16_t server, std::uint64_t epoch, const GroupElement& R) {
  return Writer(kCommitTag.size() + 42).raw(as_bytes(kCommitTag)).u16(server).u64(epoch).raw(R.bytes).take();
}

GroupElement derive_commitment(const ServerSecret& secret, std::uint64_t epoch) {
  const Group& g = secret.params.group();
  Scalar r = prf(g, secret.seed.bytes, epoch, PrfRole::nonce_seed);
  GroupElement R = g.exp_base(r);
  wipe(r.bytes);
  return R;
}

CommitmentBundle server_commit(const ServerSecret& secret, std::uint64_t epoch) {
  check_epoch(epoch, secret.params.max_signatures);
  const Group& g = secret.params.group();
  CommitmentBundle b;
  b.server = secret.index;
  b.epoch = epoch;
  b.R = derive_commitment(secret, epoch);
  b.cert = sgn_sign(g, secret.cert, commitment_message(b.server, epoch, b.R));
  return b;
}

EpochMaterial epoch_material(const SignerKey& key, std::uint64_t epoch) {
  const Group& g = group_by_id(key.group_id);
  std::vector<Scalar> parts;
  parts.reserve(key.seeds.size());
  for (const auto& seed : key.seeds) parts.push_back(prf(g, seed.bytes, epoch, PrfRole::nonce_seed));
  EpochMaterial m;
  m.epoch = epoch;
  m.r_sum = g.sum(parts);
  m.x = prf_bytes(key.y.bytes, epoch, PrfRole::message_mask);
  for (auto& p : parts) wipe(p.bytes);
  return m;
}

Signature sign_with(SignerKey& key, ByteView message, const EpochMaterial& material) {
  if (key.epoch > key.max_epoch) {
    throw Error(Errc::state_exhausted, "all " + std::to_string(key.max_epoch) + " epochs used");
  }
  if (material.epoch != key.epoch) {
    throw Error(Errc::epoch_expired, "precomputed material is for a different epoch",
                std::nullopt, material.epoch);
  }
  const Group& g = group_by_id(key.group_id);
  Signature sig;
  sig.epoch = key.epoch;
  sig.x = material.x;
  sig.s = g.mulsub(material.r_sum, challenge(g, message, material.x), key.y);
  ++key.epoch;
  return sig;
}

Signature sign(SignerKey& key, ByteView message) {
  if (key.epoch > key.max_epoch) {
    throw Error(Errc::state_exhausted, "all " + std::to_string(key.max_epoch) + " epochs used");
  }
  EpochMaterial m = epoch_material(key, key.epoch);
  Signature sig = sign_with(key, message, m);
  wipe(m.r_sum.bytes);
  return sig;
}

Verdict check_bundle(const PublicKey& pk, std::uint16_t server, std::uint64_t epoch,
                     const CommitmentBundle& bundle) {
  if (server < 1 || server > pk.cert_keys.size()) return Verdict::reject("UnknownServer");
  if (bundle.server != server) return Verdict::reject("WrongServer");
  if (bundle.epoch != epoch) return Verdict::reject("WrongEpoch");
  const Group& g = pk.params.group();
  if (!g.decode_element(bundle.R.bytes)) return Verdict::reject("InvalidElement");
  return sgn_verify(g, pk.cert_keys[server - 1], commitment_message(server, epoch, bundle.R),
                    bundle.cert);
}

GroupElement aggregate(std::span<const CommitmentBundle> bundles, const PublicKey& pk) {
  const std::uint32_t L = pk.params.servers;
  if (bundles.empty()) throw Error(Errc::missing_server, "no bundles", 1);
  const std::uint64_t epoch = bundles.front().epoch;
  std::vector<const CommitmentBundle*> by_server(L, nullptr);
  for (const auto& b : bundles) {
    if (b.epoch != epoch) {
      throw Error(Errc::epoch_mismatch, "bundles span several epochs", b.server, b.epoch);
    }
    if (b.server >= 1 && b.server <= L && by_server[b.server - 1] == nullptr) {
      by_server[b.server - 1] = &b;
    }
  }
  for (std::uint32_t l = 1; l <= L; ++l) {
    if (!by_server[l - 1]) {
      throw Error(Errc::missing_server, "no bundle from server " + std::to_string(l), l, epoch);
    }
  }
  std::vector<GroupElement> parts;
  parts.reserve(L);
  for (std::uint32_t l = 1; l <= L; ++l) {
    const auto& b = *by_server[l - 1];
    if (auto v = check_bundle(pk, static_cast<std::uint16_t>(l), epoch, b); !v) {
      throw Error(Errc::cert_failure, "server " + std::to_string(l) + ": " + v.reason, l, epoch);
    }
    parts.push_back(b.R);
  }
  return pk.params.group().product(parts);
}

Verdict verify(const PublicKey& pk, ByteView message, const Signature& sig,
               const GroupElement& R_agg) {
  if (sig.epoch < 1 || sig.epoch > pk.params.max_signatures) return Verdict::reject("EpochOutOfRange");
  const Group& g = pk.params.group();
  auto s = g.decode_scalar(sig.s.bytes);
  if (!s) return Verdict::reject("NonCanonicalScalar");
  Scalar e = challenge(g, message, sig.x);
  if (!g.verify_eq(R_agg, *s, pk.Y, e)) return Verdict::reject("BadSignatureEq");
  return Verdict::accept();
}

}  // namespace lrsha::basic
