#include "lrsha/forward.hpp"

#include <algorithm>
#include <string>

#include "lrsha/error.hpp"

namespace lrsha::forward {
namespace {

constexpr std::string_view kSecretMagic = "FRSS";
constexpr std::uint8_t kSecretVersion = 1;
constexpr std::string_view kCommitTag = "flrsha/commit";

void check_epoch(std::uint64_t epoch, std::uint64_t max_epoch) {
  if (epoch < 1 || epoch > max_epoch) {
    throw Error(Errc::epoch_out_of_range,
                "epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(max_epoch) + "]",
                std::nullopt, epoch);
  }
}

void erase_chains(SignerKey& key) {
  for (auto& s : key.y_chain) wipe(s.bytes);
  for (auto& s : key.r_chain) wipe(s.bytes);
}

}  // namespace

SignerKey::~SignerKey() { erase_chains(*this); }

Bytes SignerKey::serialize_payload() const {
  Writer w(64 * y_chain.size() + 16);
  for (const auto& s : y_chain) w.raw(s.bytes);
  for (const auto& s : r_chain) w.raw(s.bytes);
  w.u64(epoch).u64(max_epoch);
  return w.take();
}

SignerKey SignerKey::from_payload(GroupId group, std::uint32_t servers, ByteView payload) {
  if (payload.size() != 64 * std::size_t{servers} + 16) {
    throw Error(Errc::corrupt_key_file, "FLRSHA key payload has the wrong length");
  }
  Reader r(payload);
  SignerKey k;
  k.group_id = group;
  for (std::uint32_t i = 0; i < servers; ++i) k.y_chain.push_back({r.raw32()});
  for (std::uint32_t i = 0; i < servers; ++i) k.r_chain.push_back({r.raw32()});
  k.epoch = r.u64();
  k.max_epoch = r.u64();
  if (k.max_epoch < 1 || k.epoch < 1 || k.epoch > k.max_epoch + 1) {
    throw Error(Errc::corrupt_key_file, "FLRSHA key state out of range");
  }
  return k;
}

ServerSecret::ServerSecret(SchemeParams p, std::uint16_t idx, Seed y1, Seed r1, FsCertState state)
    : params(p), index(idx), y_first(y1), r_first(r1), cert_state(std::move(state)) {}

ServerSecret::~ServerSecret() {
  wipe(y_first.bytes);
  wipe(r_first.bytes);
}

void ServerSecret::build_tables(std::uint64_t stride) {
  stride = std::clamp<std::uint64_t>(stride, 1, params.max_signatures);
  y_table = std::make_shared<const ChainTable>(ChainTable::build(y_first, params.max_signatures, stride));
  r_table = std::make_shared<const ChainTable>(ChainTable::build(r_first, params.max_signatures, stride));
}

Seed ServerSecret::y_at(std::uint64_t epoch) const {
  check_epoch(epoch, params.max_signatures);
  return y_table ? y_table->lookup(epoch) : hash_chain(y_first, epoch - 1);
}

Seed ServerSecret::r_at(std::uint64_t epoch) const {
  check_epoch(epoch, params.max_signatures);
  return r_table ? r_table->lookup(epoch) : hash_chain(r_first, epoch - 1);
}

Bytes ServerSecret::encode() const {
  Bytes fs = cert_state.serialize();
  Writer w(4 + 1 + 14 + 2 + 64 + fs.size());
  w.raw(as_bytes(kSecretMagic)).u8(kSecretVersion);
  write_params(w, params);
  w.u16(index).raw(y_first.bytes).raw(r_first.bytes).raw(fs);
  wipe(fs);
  return w.take();
}

ServerSecret ServerSecret::decode(ByteView in) {
  try {
    Reader r(in);
    auto magic = r.raw(4);
    if (!std::equal(magic.begin(), magic.end(), kSecretMagic.begin()) || r.u8() != kSecretVersion) {
      throw Error(Errc::malformed_secret, "not an FLRSHA server secret");
    }
    SchemeParams params = read_params(r);
    if (params.scheme != Scheme::flrsha) {
      throw Error(Errc::malformed_secret, "secret is not for the FLRSHA scheme");
    }
    auto index = r.u16();
    if (index < 1 || index > params.servers) {
      throw Error(Errc::malformed_secret, "server index outside [1, L]");
    }
    Seed y1{r.raw32()};
    Seed r1{r.raw32()};
    FsCertState state = FsCertState::deserialize(r.raw(r.remaining()));
    if (state.max_epoch() != params.max_signatures || state.group_id() != params.group_id) {
      throw Error(Errc::malformed_secret, "certification state does not match parameters");
    }
    return ServerSecret(params, index, y1, r1, std::move(state));
  } catch (const Error& e) {
    if (e.code() == Errc::malformed_secret) throw;
    throw Error(Errc::malformed_secret, std::string("FLRSHA server secret: ") + e.what());
  }
}

Bytes CommitmentBundle::encode() const {
  Writer w(74 + cert.encoded_size());
  w.u16(server).u64(epoch).raw(Y.bytes).raw(R.bytes).raw(cert.encode());
  return w.take();
}

CommitmentBundle CommitmentBundle::decode(ByteView in) {
  Reader r(in);
  CommitmentBundle b;
  b.server = r.u16();
  b.epoch = r.u64();
  b.Y.bytes = r.raw32();
  b.R.bytes = r.raw32();
  b.cert = Certificate::decode(r.raw(r.remaining()));
  return b;
}

KeySet keygen(const SchemeParams& params, Rng& rng, kernels::Exec exec) {
  params.validate();
  if (params.scheme != Scheme::flrsha) throw Error(Errc::invalid_params, "params are not FLRSHA");
  const Group& g = params.group();
  KeySet ks;
  ks.signer.group_id = params.group_id;
  ks.signer.max_epoch = params.max_signatures;
  ks.verifier_key.params = params;
  for (std::uint32_t l = 1; l <= params.servers; ++l) {
    auto state = FsCertState::keygen(g, params.max_signatures, rng, exec);
    Seed y1 = Seed::random(rng);
    Seed r1 = Seed::random(rng);
    ks.signer.y_chain.push_back(y1);
    ks.signer.r_chain.push_back(r1);
    ks.verifier_key.roots.push_back(state.root());
    ks.servers.emplace_back(params, static_cast<std::uint16_t>(l), y1, r1, std::move(state));
  }
  return ks;
}

void update(SignerKey& key) {
  if (key.epoch >= key.max_epoch) {
    throw Error(Errc::state_exhausted, "cannot evolve past epoch " + std::to_string(key.max_epoch));
  }
  for (auto& s : key.y_chain) s = hash_chain(s, 1);
  for (auto& s : key.r_chain) s = hash_chain(s, 1);
  ++key.epoch;
}

EpochMaterial epoch_material(const SignerKey& key) {
  if (key.exhausted()) {
    throw Error(Errc::state_exhausted, "all " + std::to_string(key.max_epoch) + " epochs used");
  }
  const Group& g = group_by_id(key.group_id);
  std::vector<Scalar> ys;
  std::vector<Scalar> rs;
  ys.reserve(key.y_chain.size());
  rs.reserve(key.r_chain.size());
  for (const auto& s : key.y_chain) ys.push_back(seed_to_scalar(g, s));
  for (const auto& s : key.r_chain) rs.push_back(seed_to_scalar(g, s));
  EpochMaterial m;
  m.epoch = key.epoch;
  m.y_sum = g.sum(ys);
  m.r_sum = g.sum(rs);
  m.x = prf_bytes(m.y_sum.bytes, key.epoch, PrfRole::message_mask);
  for (auto& v : ys) wipe(v.bytes);
  for (auto& v : rs) wipe(v.bytes);
  return m;
}

Signature sign_with(SignerKey& key, ByteView message, const EpochMaterial& material) {
  if (key.exhausted()) {
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
  sig.s = g.mulsub(material.r_sum, challenge(g, message, material.x), material.y_sum);
  if (key.epoch < key.max_epoch) {
    update(key);
  } else {
    erase_chains(key);
    key.epoch = key.max_epoch + 1;
  }
  return sig;
}

Signature sign(SignerKey& key, ByteView message) {
  EpochMaterial m = epoch_material(key);
  Signature sig = sign_with(key, message, m);
  wipe(m.y_sum.bytes);
  wipe(m.r_sum.bytes);
  return sig;
}

Bytes commitment_message(std::uint16_t server, std::uint64_t epoch, const GroupElement& Y,
                         const GroupElement& R) {
  return Writer(kCommitTag.size() + 74)
      .raw(as_bytes(kCommitTag))
      .u16(server)
      .u64(epoch)
      .raw(Y.bytes)
      .raw(R.bytes)
      .take();
}

Aggregate derive_commitments(const ServerSecret& secret, std::uint64_t epoch) {
  const Group& g = secret.params.group();
  Seed ys = secret.y_at(epoch);
  Seed rs = secret.r_at(epoch);
  Scalar y = seed_to_scalar(g, ys);
  Scalar r = seed_to_scalar(g, rs);
  Aggregate out{g.exp_base(y), g.exp_base(r)};
  wipe(ys.bytes);
  wipe(rs.bytes);
  wipe(y.bytes);
  wipe(r.bytes);
  return out;
}

CommitmentBundle server_commit(ServerSecret& secret, std::uint64_t epoch) {
  check_epoch(epoch, secret.params.max_signatures);
  if (epoch < secret.cert_state.current_epoch()) {
    throw Error(Errc::epoch_expired,
                "certification key for epoch " + std::to_string(epoch) + " already erased",
                secret.index, epoch);
  }
  auto [Y, R] = derive_commitments(secret, epoch);
  CommitmentBundle b;
  b.server = secret.index;
  b.epoch = epoch;
  b.Y = Y;
  b.R = R;
  b.cert = secret.cert_state.sign(epoch, commitment_message(b.server, epoch, Y, R));
  return b;
}

Verdict check_bundle(const VerifierKey& vk, std::uint16_t server, std::uint64_t epoch,
                     const CommitmentBundle& bundle) {
  if (server < 1 || server > vk.roots.size()) return Verdict::reject("UnknownServer");
  if (bundle.server != server) return Verdict::reject("WrongServer");
  if (bundle.epoch != epoch) return Verdict::reject("WrongEpoch");
  const Group& g = vk.params.group();
  if (!g.decode_element(bundle.Y.bytes) || !g.decode_element(bundle.R.bytes)) {
    return Verdict::reject("InvalidElement");
  }
  return fsgn_verify(g, vk.roots[server - 1], vk.params.max_signatures, epoch,
                     commitment_message(server, epoch, bundle.Y, bundle.R), bundle.cert);
}

Aggregate aggregate(std::span<const CommitmentBundle> bundles, const VerifierKey& vk) {
  const std::uint32_t L = vk.params.servers;
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
  std::vector<GroupElement> ys;
  std::vector<GroupElement> rs;
  for (std::uint32_t l = 1; l <= L; ++l) {
    const auto& b = *by_server[l - 1];
    if (auto v = check_bundle(vk, static_cast<std::uint16_t>(l), epoch, b); !v) {
      throw Error(Errc::cert_failure, "server " + std::to_string(l) + ": " + v.reason, l, epoch);
    }
    ys.push_back(b.Y);
    rs.push_back(b.R);
  }
  const Group& g = vk.params.group();
  return {g.product(ys), g.product(rs)};
}

Verdict verify(const VerifierKey& vk, ByteView message, const Signature& sig,
               const Aggregate& agg) {
  if (sig.epoch < 1 || sig.epoch > vk.params.max_signatures) return Verdict::reject("EpochOutOfRange");
  const Group& g = vk.params.group();
  auto s = g.decode_scalar(sig.s.bytes);
  if (!s) return Verdict::reject("NonCanonicalScalar");
  Scalar e = challenge(g, message, sig.x);
  if (!g.verify_eq(agg.R, *s, agg.Y, e)) return Verdict::reject("BadSignatureEq");
  return Verdict::accept();
}

}  // namespace lrsha::forward
