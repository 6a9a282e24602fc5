#include "lrsha/keyderive.hpp"

#include <array>
#include <string>

#include <sodium.h>

#include "lrsha/error.hpp"
#include "lrsha/metrics.hpp"

namespace lrsha {
namespace {

constexpr std::string_view kHashTag = "lrsha/H";
constexpr std::string_view kChainTag = "lrsha/chain";
constexpr std::string_view kReduceTag = "lrsha/seed-scalar";

std::string_view prf_tag(PrfRole role) {
  switch (role) {
    case PrfRole::nonce_seed: return "lrsha/prf/r";
    case PrfRole::key_chain: return "lrsha/prf/y";
    case PrfRole::message_mask: return "lrsha/prf/x";
  }
  return "lrsha/prf/?";
}

void update_tag(crypto_generichash_state& st, std::string_view tag) {
  auto len = static_cast<std::uint8_t>(tag.size());
  crypto_generichash_update(&st, &len, 1);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(tag.data()), tag.size());
}

template <std::size_t N>
std::array<std::uint8_t, N> keyed_digest(ByteView key, std::string_view tag,
                                         std::uint64_t counter) {
  static_assert(N >= crypto_generichash_BYTES_MIN && N <= crypto_generichash_BYTES_MAX);
  if (key.size() < crypto_generichash_KEYBYTES_MIN || key.size() > crypto_generichash_KEYBYTES_MAX) {
    throw Error(Errc::invalid_params, "PRF key must be 16..64 bytes");
  }
  init_crypto();
  crypto_generichash_state st;
  crypto_generichash_init(&st, key.data(), key.size(), N);
  update_tag(st, tag);
  Bytes ctr = Writer().u64(counter).take();
  crypto_generichash_update(&st, ctr.data(), ctr.size());
  std::array<std::uint8_t, N> out;
  crypto_generichash_final(&st, out.data(), N);
  return out;
}

}  // namespace

Scalar prf(const Group& g, ByteView key, std::uint64_t counter, PrfRole role) {
  ++metrics::local().prf;
  auto wide = keyed_digest<64>(key, prf_tag(role), counter);
  Scalar out = g.reduce_wide(wide);
  wipe(wide);
  return out;
}

Bytes32 prf_bytes(ByteView key, std::uint64_t counter, PrfRole role) {
  ++metrics::local().prf;
  return keyed_digest<32>(key, prf_tag(role), counter);
}

Scalar hash_to_scalar(const Group& g, ByteView msg) {
  ++metrics::local().hash;
  init_crypto();
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 64);
  update_tag(st, kHashTag);
  crypto_generichash_update(&st, msg.data(), msg.size());
  std::array<std::uint8_t, 64> wide;
  crypto_generichash_final(&st, wide.data(), wide.size());
  return g.reduce_wide(wide);
}

Scalar challenge(const Group& g, ByteView message, const Bytes32& mask) {
  ++metrics::local().hash;
  init_crypto();
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 64);
  update_tag(st, kHashTag);
  crypto_generichash_update(&st, message.data(), message.size());
  crypto_generichash_update(&st, mask.data(), mask.size());
  std::array<std::uint8_t, 64> wide;
  crypto_generichash_final(&st, wide.data(), wide.size());
  return g.reduce_wide(wide);
}

Seed chain_step(const Seed& s) {
  ++metrics::local().chain_hash;
  return {tagged_hash(kChainTag, {s.bytes})};
}

Seed hash_chain(Seed s, std::uint64_t k) {
  for (std::uint64_t i = 0; i < k; ++i) {
    Seed next = chain_step(s);
    wipe(s.bytes);
    s = next;
  }
  return s;
}

Scalar seed_to_scalar(const Group& g, const Seed& s) {
  ++metrics::local().seed_reduce;
  init_crypto();
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 64);
  update_tag(st, kReduceTag);
  crypto_generichash_update(&st, s.bytes.data(), s.bytes.size());
  std::array<std::uint8_t, 64> wide;
  crypto_generichash_final(&st, wide.data(), wide.size());
  Scalar out = g.reduce_wide(wide);
  wipe(wide);
  return out;
}

Bytes32 tagged_hash(std::string_view tag, std::initializer_list<ByteView> parts) {
  init_crypto();
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 32);
  update_tag(st, tag);
  for (auto p : parts) crypto_generichash_update(&st, p.data(), p.size());
  Bytes32 out;
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

ChainTable ChainTable::build(const Seed& first, std::uint64_t max_epoch, std::uint64_t stride) {
  if (stride < 1 || stride > max_epoch) {
    throw Error(Errc::invalid_stride, "stride must lie in [1, J]");
  }
  ChainTable t;
  t.stride_ = stride;
  t.max_epoch_ = max_epoch;
  t.anchors_.reserve((max_epoch + stride - 1) / stride);
  const std::uint64_t last_anchor = (max_epoch - 1) / stride * stride + 1;
  Seed cur = first;
  for (std::uint64_t epoch = 1; epoch <= last_anchor; ++epoch) {
    if ((epoch - 1) % stride == 0) t.anchors_.push_back({epoch, cur});
    if (epoch == last_anchor) break;
    Seed next = chain_step(cur);
    wipe(cur.bytes);
    cur = next;
  }
  wipe(cur.bytes);
  return t;
}

ChainTable::~ChainTable() {
  for (auto& a : anchors_) wipe(a.seed.bytes);
}

Seed ChainTable::lookup(std::uint64_t j) const {
  if (j < 1 || j > max_epoch_) {
    throw Error(Errc::epoch_out_of_range, "epoch " + std::to_string(j) + " outside [1, " +
                                              std::to_string(max_epoch_) + "]");
  }
  const Anchor& a = anchors_[(j - 1) / stride_];
  return hash_chain(a.seed, j - a.epoch);
}

}  // namespace lrsha
