#include <doctest.h>

#include <array>
#include <set>

#include "lrsha/error.hpp"
#include "lrsha/keyderive.hpp"
#include "lrsha/metrics.hpp"
#include "support.hpp"

using namespace lrsha;

namespace {

Seed counting_seed() {
  Seed s;
  for (int i = 0; i < 32; ++i) s.bytes[i] = static_cast<std::uint8_t>(i);
  return s;
}

std::uint64_t hashes_for_lookup(const ChainTable& t, std::uint64_t j) {
  metrics::Probe p;
  (void)t.lookup(j);
  return p.delta().chain_hash;
}

}  // namespace

// Expected digests below were produced by an independent BLAKE2b
// implementation (Python hashlib) with the same tag framing.
TEST_CASE("frozen digests match an independent BLAKE2b") {
  const Seed seed = counting_seed();
  CHECK(to_hex(hash_to_scalar(ristretto255(), {}).bytes) ==
        "a6309c5a7819318fd5576e68150144c89e06ccea20ebd46190165c39488dd105");
  CHECK(hash_to_scalar(toy_group(), {}) == testutil::toy_scalar(5));
  CHECK(to_hex(hash_chain(seed, 3).bytes) ==
        "b96d4969555c59bed685f8b77719ff4a2df728a84bc4d265161daa368842d265");
  CHECK(to_hex(prf(ristretto255(), seed.bytes, 1, PrfRole::nonce_seed).bytes) ==
        "7d6922d5eb9b00814b678403f46433ad38374730e2323c32635c611078b53e08");
  CHECK(prf(toy_group(), seed.bytes, 1, PrfRole::nonce_seed) == testutil::toy_scalar(2));
  CHECK(to_hex(prf_bytes(seed.bytes, 1, PrfRole::message_mask)) ==
        "44db7c1cfff59a7f12f1c755634a1d79e6afdcdcf30f4df7c5472b4b4c81f1a5");
  CHECK(to_hex(seed_to_scalar(ristretto255(), seed).bytes) ==
        "c399df6c817625fcba9e70b1a5c1cf404619ea7a86633d01df72264963c91800");
}

TEST_CASE("prf is deterministic and separates counters and keys") {
  const Group& g = ristretto255();
  SeededRng rng(1);
  Seed k = Seed::random(rng);
  CHECK(prf(g, k.bytes, 9) == prf(g, k.bytes, 9));

  std::set<Bytes32> outs;
  for (std::uint64_t j = 1; j <= 10000; ++j) outs.insert(prf(g, k.bytes, j).bytes);
  CHECK(outs.size() == 10000);

  int collisions = 0;
  for (int i = 0; i < 1000; ++i) {
    Seed a = Seed::random(rng);
    Seed b = Seed::random(rng);
    if (prf(g, a.bytes, 3) == prf(g, b.bytes, 3)) ++collisions;
  }
  CHECK(collisions == 0);
}

TEST_CASE("hash_to_scalar output is canonical and stable") {
  SeededRng rng(2);
  for (const Group* g : {&ristretto255(), &toy_group()}) {
    CAPTURE(to_string(g->id()));
    int bad = 0;
    Bytes msg(40);
    for (int i = 0; i < 100000; ++i) {
      rng.fill(msg);
      if (!g->decode_scalar(hash_to_scalar(*g, msg).bytes)) ++bad;
    }
    CHECK(bad == 0);
    CHECK(hash_to_scalar(*g, msg) == hash_to_scalar(*g, msg));
  }
}

TEST_CASE("challenge equals hash_to_scalar over the concatenation") {
  const Group& g = ristretto255();
  SeededRng rng(3);
  Bytes32 mask = rng.bytes32();
  std::string m = "attest";
  Bytes joined = testutil::to_bytes(m);
  joined.insert(joined.end(), mask.begin(), mask.end());
  CHECK(challenge(g, as_bytes(m), mask) == hash_to_scalar(g, joined));
}

TEST_CASE("prf roles and hash_to_scalar are domain separated") {
  const Group& g = ristretto255();
  SeededRng rng(4);
  int clashes = 0;
  for (int i = 0; i < 1000; ++i) {
    Bytes32 b = rng.bytes32();
    Scalar h = hash_to_scalar(g, b);
    Scalar r = prf(g, b, 1, PrfRole::nonce_seed);
    Scalar y = prf(g, b, 1, PrfRole::key_chain);
    Scalar x = prf(g, b, 1, PrfRole::message_mask);
    if (h == r || h == y || h == x || r == y || r == x || y == x) ++clashes;
  }
  CHECK(clashes == 0);
}

TEST_CASE("toy reduction of hash_to_scalar hits every residue") {
  const Group& g = toy_group();
  std::array<int, 11> hist{};
  for (std::uint64_t i = 0; i < 10000; ++i) {
    Bytes msg = Writer().u64(i).take();
    ++hist[hash_to_scalar(g, msg).bytes[0]];
  }
  double chi2 = 0;
  for (int c : hist) {
    CHECK(c > 0);
    double d = c - 10000.0 / 11;
    chi2 += d * d / (10000.0 / 11);
  }
  // 10 degrees of freedom; 29.59 is the 0.999 quantile.
  CHECK(chi2 < 29.59);
}

TEST_CASE("hash_chain composition") {
  SeededRng rng(5);
  Seed s = Seed::random(rng);
  CHECK(hash_chain(s, 0) == s);
  CHECK(hash_chain(s, 3) == chain_step(chain_step(chain_step(s))));
  for (std::uint64_t a = 0; a < 6; ++a) {
    for (std::uint64_t b = 0; b < 6; ++b) {
      CHECK(hash_chain(s, a + b) == hash_chain(hash_chain(s, a), b));
    }
  }
}

TEST_CASE("chain table anchors and lookup cost") {
  SeededRng rng(6);
  Seed s = Seed::random(rng);

  SUBCASE("stride 1 stores every epoch") {
    auto t = ChainTable::build(s, 16, 1);
    CHECK(t.anchors().size() == 16);
    for (std::uint64_t j = 1; j <= 16; ++j) CHECK(hashes_for_lookup(t, j) == 0);
  }
  SUBCASE("stride J keeps one anchor") {
    auto t = ChainTable::build(s, 16, 16);
    CHECK(t.anchors().size() == 1);
    CHECK(hashes_for_lookup(t, 16) == 15);
  }
  SUBCASE("J=16 stride 4") {
    auto t = ChainTable::build(s, 16, 4);
    std::vector<std::uint64_t> epochs;
    for (const auto& a : t.anchors()) epochs.push_back(a.epoch);
    CHECK(epochs == std::vector<std::uint64_t>{1, 5, 9, 13});
    CHECK(hashes_for_lookup(t, 7) == 2);
    CHECK(t.lookup_cost(7) == 2);
    for (const auto& a : t.anchors()) CHECK(t.lookup(a.epoch) == a.seed);
  }
  SUBCASE("uneven stride") {
    auto t = ChainTable::build(s, 10, 4);
    CHECK(t.anchors().size() == 3);
    for (std::uint64_t j = 1; j <= 10; ++j) CHECK(t.lookup(j) == hash_chain(s, j - 1));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(ChainTable::build(s, 16, 0), Error);
    CHECK_THROWS_AS(ChainTable::build(s, 16, 17), Error);
    auto t = ChainTable::build(s, 64, 8);
    try {
      (void)t.lookup(65);
      FAIL("expected EpochOutOfRange");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::epoch_out_of_range);
    }
    CHECK_THROWS_AS((void)t.lookup(0), Error);
  }
}

TEST_CASE("chain table equals direct hashing for every dividing stride") {
  SeededRng rng(7);
  Seed s = Seed::random(rng);
  for (std::uint64_t J : {1u, 12u, 64u, 256u}) {
    std::vector<Seed> direct(J);
    direct[0] = s;
    for (std::uint64_t j = 1; j < J; ++j) direct[j] = chain_step(direct[j - 1]);
    for (std::uint64_t stride = 1; stride <= J; ++stride) {
      if (J % stride != 0) continue;
      auto t = ChainTable::build(s, J, stride);
      int mismatches = 0;
      std::uint64_t worst = 0;
      for (std::uint64_t j = 1; j <= J; ++j) {
        if (t.lookup(j) != direct[j - 1]) ++mismatches;
        worst = std::max(worst, hashes_for_lookup(t, j));
      }
      CAPTURE(J);
      CAPTURE(stride);
      CHECK(mismatches == 0);
      CHECK(worst <= stride - 1);
    }
  }
}
