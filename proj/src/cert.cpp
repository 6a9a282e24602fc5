#include "lrsha/cert.hpp"

#include <array>
#include <string>

#include <sodium.h>

namespace lrsha {
namespace {

constexpr std::string_view kChallengeTag = "lrsha/cert-challenge";
constexpr std::string_view kNonceTag = "lrsha/cert-nonce";

Scalar reduce_digest(const Group& g, const Bytes32& d) {
  std::array<std::uint8_t, 64> wide{};
  std::copy(d.begin(), d.end(), wide.begin());
  return g.reduce_wide(wide);
}

Scalar derive_nonce(const Group& g, const Scalar& secret, const Bytes& context, ByteView msg) {
  init_crypto();
  crypto_generichash_state st;
  crypto_generichash_init(&st, secret.bytes.data(), secret.bytes.size(), 64);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kNonceTag.data()),
                            kNonceTag.size());
  crypto_generichash_update(&st, context.data(), context.size());
  crypto_generichash_update(&st, msg.data(), msg.size());
  std::array<std::uint8_t, 64> wide;
  crypto_generichash_final(&st, wide.data(), wide.size());
  Scalar k = g.reduce_wide(wide);
  wipe(wide);
  return k;
}

// Binds the commitment, the signing key, the tag and epoch, and the message.
Bytes32 challenge_digest(const GroupElement& R, const GroupElement& pk, const Bytes& context,
                         ByteView msg) {
  return tagged_hash(kChallengeTag, {R.bytes, pk.bytes, context, msg});
}

Bytes context_bytes(CertTag tag, std::uint64_t epoch) {
  return Writer(9).u8(static_cast<std::uint8_t>(tag)).u64(epoch).take();
}

Certificate schnorr_sign(const Group& g, const Scalar& secret, const GroupElement& pk,
                         CertTag tag, std::uint64_t epoch, ByteView msg) {
  Bytes ctx = context_bytes(tag, epoch);
  Scalar k = derive_nonce(g, secret, ctx, msg);
  GroupElement R = g.exp_base(k);
  Certificate c;
  c.tag = tag;
  c.epoch = epoch;
  c.e = challenge_digest(R, pk, ctx, msg);
  c.s = g.mulsub(k, reduce_digest(g, c.e), secret).bytes;
  wipe(k.bytes);
  return c;
}

Verdict schnorr_check(const Group& g, const GroupElement& pk, ByteView msg, const Certificate& c) {
  auto s = g.decode_scalar(c.s);
  if (!s) return Verdict::reject("NonCanonicalScalar");
  GroupElement R = g.mul(g.exp_base(*s), g.exp(pk, reduce_digest(g, c.e)));
  if (challenge_digest(R, pk, context_bytes(c.tag, c.epoch), msg) != c.e) {
    return Verdict::reject("BadCertSignature");
  }
  return Verdict::accept();
}

}  // namespace

Bytes Certificate::encode() const {
  Writer w(encoded_size());
  w.u8(static_cast<std::uint8_t>(tag)).u64(epoch).raw(e).raw(s);
  w.u16(static_cast<std::uint16_t>(path.size()));
  for (const auto& node : path) w.raw(node);
  if (tag == CertTag::forward_secure) w.raw(epoch_key.bytes);
  return w.take();
}

Certificate Certificate::decode(ByteView in) {
  Reader r(in);
  Certificate c;
  auto tag = r.u8();
  if (tag != static_cast<std::uint8_t>(CertTag::plain) &&
      tag != static_cast<std::uint8_t>(CertTag::forward_secure)) {
    throw Error(Errc::decode_error, "unknown certificate tag");
  }
  c.tag = static_cast<CertTag>(tag);
  c.epoch = r.u64();
  c.e = r.raw32();
  c.s = r.raw32();
  auto n = r.u16();
  if (c.tag == CertTag::plain && (n != 0 || c.epoch != 0)) {
    throw Error(Errc::decode_error, "plain certificate carries epoch data");
  }
  c.path.reserve(n);
  for (std::uint16_t i = 0; i < n; ++i) c.path.push_back(r.raw32());
  if (c.tag == CertTag::forward_secure) c.epoch_key.bytes = r.raw32();
  r.expect_done();
  return c;
}

std::size_t Certificate::encoded_size() const {
  return 1 + 8 + 32 + 32 + 2 + 32 * path.size() + (tag == CertTag::forward_secure ? 32 : 0);
}

std::size_t certificate_size(CertTag tag, std::uint64_t max_epoch) {
  if (tag == CertTag::plain) return 75;
  return 75 + 32 * MerkleTree::depth_for(max_epoch) + 32;
}

CertKeypair sgn_keygen(const Group& g, Rng& rng) {
  return sgn_keypair_from_secret(g, g.random_scalar(rng));
}

CertKeypair sgn_keypair_from_secret(const Group& g, const Scalar& secret) {
  return {secret, g.exp_base(secret)};
}

Certificate sgn_sign(const Group& g, const CertKeypair& kp, ByteView msg) {
  return schnorr_sign(g, kp.secret, kp.public_key, CertTag::plain, 0, msg);
}

Verdict sgn_verify(const Group& g, const GroupElement& pk, ByteView msg, const Certificate& cert) {
  if (cert.tag != CertTag::plain) return Verdict::reject("WrongSchemeTag");
  if (!g.decode_element(pk.bytes)) return Verdict::reject("InvalidPublicKey");
  return schnorr_check(g, pk, msg, cert);
}

Verdict sgn_verify(const Group& g, const GroupElement& pk, ByteView msg, ByteView cert_bytes) {
  try {
    return sgn_verify(g, pk, msg, Certificate::decode(cert_bytes));
  } catch (const Error&) {
    return Verdict::reject("DecodeError");
  }
}

FsCertState::FsCertState(GroupId group, std::uint64_t max_epoch, std::uint64_t epoch,
                         std::optional<Seed> seed, MerkleTree tree)
    : group_(group),
      max_epoch_(max_epoch),
      epoch_(epoch),
      seed_(std::move(seed)),
      tree_(std::move(tree)) {}

FsCertState::~FsCertState() {
  if (seed_) wipe(seed_->bytes);
}

FsCertState FsCertState::keygen(const Group& g, std::uint64_t max_epoch, Rng& rng,
                                kernels::Exec exec) {
  if (max_epoch < 1) throw Error(Errc::invalid_params, "J must be at least 1");
  Seed first = Seed::random(rng);
  std::vector<Seed> seeds;
  seeds.reserve(max_epoch);
  seeds.push_back(first);
  for (std::uint64_t j = 2; j <= max_epoch; ++j) seeds.push_back(chain_step(seeds.back()));
  auto leaves = kernels::fs_epoch_leaves(g, seeds, exec);
  for (auto& s : seeds) wipe(s.bytes);
  return FsCertState(g.id(), max_epoch, 1, first, MerkleTree(std::move(leaves)));
}

void FsCertState::advance_to(std::uint64_t epoch) {
  if (epoch <= epoch_) return;
  if (epoch > max_epoch_) {
    if (seed_) wipe(seed_->bytes);
    seed_.reset();
    epoch_ = max_epoch_ + 1;
    return;
  }
  Seed next = hash_chain(*seed_, epoch - epoch_);
  wipe(seed_->bytes);
  seed_ = next;
  epoch_ = epoch;
}

GroupElement FsCertState::epoch_public_key(std::uint64_t epoch) const {
  if (epoch < 1 || epoch > max_epoch_) {
    throw Error(Errc::epoch_out_of_range, "epoch outside [1, J]", std::nullopt, epoch);
  }
  if (epoch < epoch_ || !seed_) {
    throw Error(Errc::epoch_expired, "epoch key already erased", std::nullopt, epoch);
  }
  const Group& g = group_by_id(group_);
  Seed s = hash_chain(*seed_, epoch - epoch_);
  Scalar sk = seed_to_scalar(g, s);
  GroupElement pk = g.exp_base(sk);
  wipe(s.bytes);
  wipe(sk.bytes);
  return pk;
}

Certificate FsCertState::sign(std::uint64_t epoch, ByteView msg) {
  if (epoch < 1 || epoch > max_epoch_) {
    throw Error(Errc::epoch_out_of_range,
                "epoch " + std::to_string(epoch) + " outside [1, " + std::to_string(max_epoch_) + "]",
                std::nullopt, epoch);
  }
  if (epoch < epoch_ || !seed_) {
    throw Error(Errc::epoch_expired,
                "epoch " + std::to_string(epoch) + " precedes current epoch " +
                    std::to_string(epoch_),
                std::nullopt, epoch);
  }
  advance_to(epoch);
  const Group& g = group_by_id(group_);
  Scalar sk = seed_to_scalar(g, *seed_);
  GroupElement pk = g.exp_base(sk);
  Certificate c = schnorr_sign(g, sk, pk, CertTag::forward_secure, epoch, msg);
  c.path = tree_.path(epoch - 1);
  c.epoch_key = pk;
  wipe(sk.bytes);
  advance_to(epoch + 1);
  return c;
}

Bytes FsCertState::serialize() const {
  Writer w(18 + 32 + 32 * max_epoch_);
  w.u8(static_cast<std::uint8_t>(group_)).u64(max_epoch_).u64(epoch_);
  w.u8(seed_ ? 1 : 0);
  if (seed_) w.raw(seed_->bytes);
  const auto& leaves = tree_.padded_leaves();
  for (std::uint64_t i = 0; i < max_epoch_; ++i) w.raw(leaves[i]);
  return w.take();
}

FsCertState FsCertState::deserialize(ByteView in) {
  Reader r(in);
  auto group = static_cast<GroupId>(r.u8());
  (void)group_by_id(group);
  auto max_epoch = r.u64();
  auto epoch = r.u64();
  auto has_seed = r.u8();
  if (max_epoch < 1 || epoch < 1 || epoch > max_epoch + 1 || has_seed > 1 ||
      (has_seed == 0) != (epoch == max_epoch + 1)) {
    throw Error(Errc::decode_error, "inconsistent forward-secure certificate state");
  }
  if (r.remaining() != (has_seed ? 32 : 0) + 32 * max_epoch) {
    throw Error(Errc::decode_error, "forward-secure state has the wrong length");
  }
  std::optional<Seed> seed;
  if (has_seed) seed = Seed{r.raw32()};
  std::vector<Digest> leaves;
  leaves.reserve(max_epoch);
  for (std::uint64_t i = 0; i < max_epoch; ++i) leaves.push_back(r.raw32());
  return FsCertState(group, max_epoch, epoch, seed, MerkleTree(std::move(leaves)));
}

Verdict fsgn_verify(const Group& g, const Digest& root, std::uint64_t max_epoch,
                    std::uint64_t epoch, ByteView msg, const Certificate& cert) {
  if (cert.tag != CertTag::forward_secure) return Verdict::reject("WrongSchemeTag");
  if (epoch < 1 || epoch > max_epoch) return Verdict::reject("EpochOutOfRange");
  if (cert.epoch != epoch) return Verdict::reject("WrongEpoch");
  if (cert.path.size() != MerkleTree::depth_for(max_epoch)) return Verdict::reject("BadMerklePath");
  if (!g.decode_element(cert.epoch_key.bytes)) return Verdict::reject("InvalidPublicKey");
  Digest leaf = kernels::fs_leaf(epoch, cert.epoch_key);
  if (MerkleTree::fold(leaf, epoch - 1, cert.path) != root) return Verdict::reject("BadMerklePath");
  return schnorr_check(g, cert.epoch_key, msg, cert);
}

Verdict fsgn_verify(const Group& g, const Digest& root, std::uint64_t max_epoch,
                    std::uint64_t epoch, ByteView msg, ByteView cert_bytes) {
  try {
    return fsgn_verify(g, root, max_epoch, epoch, msg, Certificate::decode(cert_bytes));
  } catch (const Error&) {
    return Verdict::reject("DecodeError");
  }
}

}  // namespace lrsha
