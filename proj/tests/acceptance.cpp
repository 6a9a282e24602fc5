// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.
//
//   acceptance [N ...]   run only the listed criteria

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "lrsha/basic.hpp"
#include "lrsha/cli.hpp"
#include "lrsha/comc.hpp"
#include "lrsha/error.hpp"
#include "lrsha/forward.hpp"
#include "lrsha/metrics.hpp"
#include "lrsha/vclient.hpp"
#include "lrsha/wire.hpp"
#include "support.hpp"

using namespace lrsha;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string str(auto v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

// ---------------------------------------------------------------- 1

// One deployment of either scheme, driven epoch by epoch in order.
struct Sweep {
  Scheme scheme;
  std::optional<basic::KeySet> plain;
  std::optional<forward::KeySet> fwd;

  Sweep(Scheme s, GroupId g, std::uint32_t L, std::uint64_t J, Rng& rng) : scheme(s) {
    SchemeParams p{s, g, J, L};
    if (s == Scheme::lrsha) {
      plain = basic::keygen(p, rng);
    } else {
      fwd = forward::keygen(p, rng);
    }
  }

  Signature sign(ByteView m) { return plain ? basic::sign(plain->signer, m) : forward::sign(fwd->signer, m); }

  std::vector<Bytes> commit(std::uint64_t j) {
    std::vector<Bytes> out;
    if (plain) {
      for (const auto& s : plain->servers) out.push_back(basic::server_commit(s, j).encode());
    } else {
      for (auto& s : fwd->servers) out.push_back(forward::server_commit(s, j).encode());
    }
    return out;
  }

  // The verifier's whole pipeline on raw bytes; any error is a rejection.
  bool accepts(ByteView m, ByteView sig_bytes, const std::vector<Bytes>& bundles, std::uint64_t j) const {
    try {
      Signature sig = Signature::decode(sig_bytes);
      if (sig.epoch != j) return false;
      if (plain) {
        std::vector<basic::CommitmentBundle> bs;
        for (std::size_t l = 0; l < bundles.size(); ++l) {
          bs.push_back(basic::CommitmentBundle::decode(bundles[l]));
          if (!basic::check_bundle(plain->public_key, static_cast<std::uint16_t>(l + 1), j, bs.back())) return false;
        }
        return basic::verify(plain->public_key, m, sig, basic::aggregate(bs, plain->public_key)).ok;
      }
      std::vector<forward::CommitmentBundle> bs;
      for (std::size_t l = 0; l < bundles.size(); ++l) {
        bs.push_back(forward::CommitmentBundle::decode(bundles[l]));
        if (!forward::check_bundle(fwd->verifier_key, static_cast<std::uint16_t>(l + 1), j, bs.back())) return false;
      }
      return forward::verify(fwd->verifier_key, m, sig, forward::aggregate(bs, fwd->verifier_key)).ok;
    } catch (const Error&) {
      return false;
    }
  }
};

Result correctness_sweep() {
  constexpr std::uint64_t J = 32;
  // Bundle byte positions are spread over the epochs: position p is mutated
  // at every epoch j with p % kBundleSpread == j % kBundleSpread.
  constexpr std::size_t kBundleSpread = 8;
  std::mt19937_64 rng(1001);
  SeededRng keys(1001);
  std::uint64_t honest = 0, honest_ok = 0;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> forged;  // backend -> (accepted, tried)
  for (GroupId g : {GroupId::ristretto255, GroupId::toy23}) {
    auto& [accepted, tried] = forged[std::string(to_string(g))];
    for (Scheme s : {Scheme::lrsha, Scheme::flrsha}) {
      for (std::uint32_t L = 1; L <= 3; ++L) {
        Sweep d(s, g, L, J, keys);
        for (std::uint64_t j = 1; j <= J; ++j) {
          Bytes m = bytes_of("sweep " + std::string(to_string(s)) + " L" + str(L) + " j" + str(j));
          Bytes sig = d.sign(m).encode();
          std::vector<Bytes> bundles = d.commit(j);
          ++honest;
          honest_ok += d.accepts(m, sig, bundles, j);

          auto flip = [&](Bytes& b, std::size_t pos) { b[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255); };
          for (std::size_t p = 0; p < m.size(); ++p) {
            Bytes mm = m;
            flip(mm, p);
            ++tried;
            accepted += d.accepts(mm, sig, bundles, j);
          }
          for (std::size_t p = 0; p < sig.size(); ++p) {
            Bytes ms = sig;
            flip(ms, p);
            ++tried;
            accepted += d.accepts(m, ms, bundles, j);
          }
          for (std::size_t l = 0; l < bundles.size(); ++l) {
            for (std::size_t p = j % kBundleSpread; p < bundles[l].size(); p += kBundleSpread) {
              std::vector<Bytes> mb = bundles;
              flip(mb[l], p);
              ++tried;
              accepted += d.accepts(m, sig, mb, j);
            }
          }
        }
      }
    }
  }
  Result r;
  r.pass = honest_ok == honest;
  r.detail = "honest " + str(honest_ok) + "/" + str(honest) + " accepted; mutations accepted";
  for (const auto& [g, c] : forged) {
    r.pass = r.pass && c.first == 0;
    r.detail += " " + g + " " + str(c.first) + "/" + str(c.second);
  }
  return r;
}

// ---------------------------------------------------------------- 2

using oracle::cpp_int;

unsigned toy_value(const GroupElement& e) { return e.bytes[0]; }
cpp_int sv(const Scalar& s) { return oracle::from_le(s.bytes); }

// Recomputes s, the per-server commitments, the aggregates and the
// verification equation with naive arithmetic modulo 23.
struct OracleCheck {
  int mismatches = 0;
  void expect(bool ok) { mismatches += !ok; }
};

void oracle_lrsha(std::mt19937_64& rng, SeededRng& keys, OracleCheck& c) {
  const Group& g = toy_group();
  const std::uint32_t L = 1 + rng() % 3;
  const std::uint64_t J = 1 + rng() % 8;
  const std::uint64_t j = 1 + rng() % J;
  auto ks = basic::keygen({Scheme::lrsha, GroupId::toy23, J, L}, keys);
  ks.signer.epoch = j;
  auto mat = basic::epoch_material(ks.signer, j);
  Bytes m = bytes_of("oracle " + str(rng()));
  Signature sig = basic::sign(ks.signer, m);

  cpp_int y = sv(ks.signer.y);
  cpp_int r = 0, R = 1;
  std::vector<basic::CommitmentBundle> bs;
  for (std::uint32_t l = 0; l < L; ++l) {
    cpp_int rl = sv(prf(g, ks.signer.seeds[l].bytes, j));
    r += rl;
    cpp_int Rl = oracle::naive_pow(oracle::kAlpha, rl);
    bs.push_back(basic::server_commit(ks.servers[l], j));
    c.expect(toy_value(bs.back().R) == Rl);
    R = R * Rl % oracle::kP;
  }
  cpp_int e = sv(challenge(g, m, mat.x));
  cpp_int s = oracle::mod_q(r - e * y);
  cpp_int Y = oracle::naive_pow(oracle::kAlpha, y);
  c.expect(sv(sig.s) == s);
  c.expect(sig.x == mat.x);
  c.expect(toy_value(ks.public_key.Y) == Y);
  c.expect(R == oracle::naive_pow(oracle::kAlpha, oracle::mod_q(r)));
  GroupElement agg = basic::aggregate(bs, ks.public_key);
  c.expect(toy_value(agg) == R);
  const bool oracle_ok = oracle::naive_pow(oracle::kAlpha, s) * oracle::naive_pow(Y, e) % oracle::kP == R;
  c.expect(oracle_ok);
  c.expect(basic::verify(ks.public_key, m, sig, agg).ok == oracle_ok);

  Signature bad = sig;
  bad.s = g.from_u64(static_cast<std::uint64_t>((s + 1) % oracle::kQ));
  const bool oracle_bad = oracle::naive_pow(oracle::kAlpha, (s + 1) % oracle::kQ) * oracle::naive_pow(Y, e) %
                              oracle::kP == R;
  c.expect(basic::verify(ks.public_key, m, bad, agg).ok == oracle_bad);
}

void oracle_flrsha(std::mt19937_64& rng, SeededRng& keys, OracleCheck& c) {
  const Group& g = toy_group();
  const std::uint32_t L = 1 + rng() % 3;
  const std::uint64_t J = 1 + rng() % 8;
  const std::uint64_t j = 1 + rng() % J;
  auto ks = forward::keygen({Scheme::flrsha, GroupId::toy23, J, L}, keys);
  for (std::uint64_t k = 1; k < j; ++k) forward::update(ks.signer);
  auto mat = forward::epoch_material(ks.signer);
  Bytes m = bytes_of("oracle " + str(rng()));
  Signature sig = forward::sign(ks.signer, m);

  cpp_int y = 0, r = 0, Y = 1, R = 1;
  std::vector<forward::CommitmentBundle> bs;
  for (std::uint32_t l = 0; l < L; ++l) {
    cpp_int yl = sv(seed_to_scalar(g, hash_chain(ks.servers[l].y_first, j - 1)));
    cpp_int rl = sv(seed_to_scalar(g, hash_chain(ks.servers[l].r_first, j - 1)));
    y += yl;
    r += rl;
    bs.push_back(forward::server_commit(ks.servers[l], j));
    cpp_int Yl = oracle::naive_pow(oracle::kAlpha, yl);
    cpp_int Rl = oracle::naive_pow(oracle::kAlpha, rl);
    c.expect(toy_value(bs.back().Y) == Yl);
    c.expect(toy_value(bs.back().R) == Rl);
    Y = Y * Yl % oracle::kP;
    R = R * Rl % oracle::kP;
  }
  cpp_int e = sv(challenge(g, m, mat.x));
  cpp_int s = oracle::mod_q(r - e * y);
  c.expect(sv(sig.s) == s);
  c.expect(sv(mat.y_sum) == oracle::mod_q(y));
  forward::Aggregate agg = forward::aggregate(bs, ks.verifier_key);
  c.expect(toy_value(agg.Y) == Y);
  c.expect(toy_value(agg.R) == R);
  const bool oracle_ok = oracle::naive_pow(oracle::kAlpha, s) * oracle::naive_pow(Y, e) % oracle::kP == R;
  c.expect(oracle_ok);
  c.expect(forward::verify(ks.verifier_key, m, sig, agg).ok == oracle_ok);
}

Result toy_oracle() {
  const Group& g = toy_group();
  OracleCheck c;

  // Hand case: y = 3, r = 5, e = 7.
  SchemeParams p{Scheme::lrsha, GroupId::toy23, 4, 1};
  basic::KeySet ks;
  ks.signer.group_id = GroupId::toy23;
  ks.signer.y = g.from_u64(3);
  ks.signer.max_epoch = 4;
  basic::ServerSecret srv;
  srv.params = p;
  srv.cert = sgn_keypair_from_secret(g, g.from_u64(4));
  srv.seed = testutil::seed_with_prf(5, 1);
  ks.signer.seeds = {srv.seed};
  ks.public_key = {p, g.exp_base(g.from_u64(3)), {srv.cert.public_key}};
  auto mat = basic::epoch_material(ks.signer, 1);
  std::string msg = testutil::message_with_challenge(7, mat.x);
  Signature sig = basic::sign(ks.signer, as_bytes(msg));
  std::array bundles{basic::server_commit(srv, 1)};
  GroupElement R = basic::aggregate(bundles, ks.public_key);
  const bool hand = sig.s == g.from_u64(6) && R == testutil::toy_elem(9) &&
                    basic::verify(ks.public_key, as_bytes(msg), sig, R).ok;

  std::mt19937_64 rng(2002);
  SeededRng keys(2002);
  for (int i = 0; i < 100; ++i) oracle_lrsha(rng, keys, c);
  for (int i = 0; i < 100; ++i) oracle_flrsha(rng, keys, c);
  Result r;
  r.pass = hand && c.mismatches == 0;
  r.detail = std::string("hand case s=") + str(sv(sig.s)) + " R=" + str(toy_value(R)) +
             (hand ? " verify true" : " MISMATCH") + "; 200 random cases, " + str(c.mismatches) + " mismatches";
  return r;
}

// ---------------------------------------------------------------- 3, 7

// L in-process ComC servers for a fresh production deployment; every epoch is
// signed up front.
struct Fleet {
  std::optional<basic::KeySet> plain;
  std::optional<forward::KeySet> fwd;
  std::vector<std::unique_ptr<comc::ComcServer>> servers;
  std::shared_ptr<vclient::InProcessTransport> transport;
  vclient::DeploymentDescriptor desc;
  std::vector<Bytes> messages;
  std::vector<Signature> sigs;

  Fleet(Scheme s, std::uint64_t J, std::uint32_t L, std::uint64_t seed) {
    SeededRng rng(seed);
    SchemeParams p{s, GroupId::ristretto255, J, L};
    std::vector<comc::ComcServer*> raw;
    for (std::uint32_t l = 1; l <= L; ++l) {
      comc::ServerConfig c;
      c.scheme = s;
      c.index = static_cast<std::uint16_t>(l);
      servers.push_back(std::make_unique<comc::ComcServer>(c, comc::make_memory_keystore()));
      raw.push_back(servers.back().get());
    }
    std::vector<std::string> addresses(L, "127.0.0.1:1");
    if (s == Scheme::lrsha) {
      plain = basic::keygen(p, rng);
      for (std::uint32_t l = 0; l < L; ++l) servers[l]->provision(plain->servers[l].encode());
      desc = vclient::DeploymentDescriptor::for_keys(plain->public_key, addresses);
    } else {
      fwd = forward::keygen(p, rng);
      for (std::uint32_t l = 0; l < L; ++l) {
        servers[l]->provision(fwd->servers[l].encode());
        servers[l]->precompute(1, J, J * servers[l]->bundle_size());
      }
      desc = vclient::DeploymentDescriptor::for_keys(fwd->verifier_key, addresses);
    }
    transport = std::make_shared<vclient::InProcessTransport>(raw);
    for (std::uint64_t j = 1; j <= J; ++j) {
      messages.push_back(bytes_of("fleet message " + str(j)));
      sigs.push_back(plain ? basic::sign(plain->signer, messages.back()) : forward::sign(fwd->signer, messages.back()));
    }
  }
};

Result exp_free_signing() {
  SeededRng rng(3003);
  std::uint64_t sign_exp[2] = {0, 0};
  std::uint64_t verify_exp_min[2] = {~0ull, ~0ull}, verify_exp_max[2] = {0, 0};
  constexpr int kRounds = 64;
  for (int k = 0; k < 2; ++k) {
    const Scheme s = k == 0 ? Scheme::lrsha : Scheme::flrsha;
    Fleet f(s, kRounds, 3, 3003 + k);
    if (f.plain) {
      auto ks = basic::keygen({s, GroupId::ristretto255, kRounds, 3}, rng);
      metrics::Probe p;
      for (int i = 0; i < kRounds; ++i) basic::sign(ks.signer, bytes_of("m" + str(i)));
      sign_exp[k] = p.delta().exp;
    } else {
      auto ks = forward::keygen({s, GroupId::ristretto255, kRounds, 3}, rng);
      metrics::Probe p;
      for (int i = 0; i < kRounds; ++i) forward::sign(ks.signer, bytes_of("m" + str(i)));
      sign_exp[k] = p.delta().exp;
    }
    vclient::Client client(f.desc, f.transport);
    if (!client.prefetch(1, kRounds).ok()) return {false, "prefetch failed"};
    for (int i = 0; i < kRounds; ++i) {
      metrics::Probe p;
      if (!client.verify_message(f.messages[i], f.sigs[i]).ok) return {false, "warm verify rejected"};
      const std::uint64_t e = p.delta().exp;
      verify_exp_min[k] = std::min(verify_exp_min[k], e);
      verify_exp_max[k] = std::max(verify_exp_max[k], e);
    }
  }
  Result r;
  r.pass = sign_exp[0] == 0 && sign_exp[1] == 0 && verify_exp_min[0] == 2 && verify_exp_max[0] == 2 &&
           verify_exp_min[1] == 2 && verify_exp_max[1] == 2;
  r.detail = "exp over " + str(kRounds) + " signs: lrsha " + str(sign_exp[0]) + ", flrsha " + str(sign_exp[1]) +
             "; warm verify exp per call: lrsha " + str(verify_exp_min[0]) + ".." + str(verify_exp_max[0]) +
             ", flrsha " + str(verify_exp_min[1]) + ".." + str(verify_exp_max[1]);
  return r;
}

Result false_commitment_detection() {
  constexpr int kTrials = 500;
  constexpr std::uint64_t J = 16;
  std::mt19937_64 rng(7007);
  int accepted = 0, misattributed = 0, named = 0, trials = 0;
  for (Scheme s : {Scheme::lrsha, Scheme::flrsha}) {
    Fleet f(s, J, 3, 7007);
    // Field boundaries inside an encoded bundle.
    std::vector<std::pair<std::size_t, std::size_t>> fields{{0, 2}, {2, 10}, {10, 42}};
    if (s == Scheme::flrsha) fields.push_back({42, 74});
    const std::size_t cert_at = fields.back().second;
    for (int t = 0; t < kTrials; ++t, ++trials) {
      const auto bad = static_cast<std::uint16_t>(1 + rng() % 3);
      const std::uint64_t epoch = 1 + rng() % J;
      const std::size_t field = rng() % (fields.size() + 1);
      const std::size_t pick = rng();
      const auto mask = static_cast<std::uint8_t>(1 + rng() % 255);
      auto evil = std::make_shared<vclient::TamperingTransport>(f.transport, bad, [&](std::uint64_t j, Bytes& b) {
        if (j != epoch) return;
        auto [lo, hi] = field < fields.size() ? fields[field] : std::pair{cert_at, b.size()};
        b[lo + pick % (hi - lo)] ^= mask;
      });
      vclient::Client client(f.desc, evil);
      Verdict v = client.verify_message(f.messages[epoch - 1], f.sigs[epoch - 1]);
      const std::string expect = "CertFailure{" + str(bad) + "," + str(epoch) + "}";
      if (v.ok) {
        ++accepted;
      } else if (v.reason != expect) {
        ++misattributed;
      } else {
        ++named;
      }
    }
  }
  Result r;
  r.pass = accepted == 0 && misattributed == 0 && named == trials;
  r.detail = str(trials) + " trials (" + str(kTrials) + " per scheme): named " + str(named) + ", misattributed " +
             str(misattributed) + ", accepted " + str(accepted);
  return r;
}

// ---------------------------------------------------------------- 4

Result relative_speed() {
  cli::BenchOptions o;
  o.iterations = 1000;
  cli::BenchReport rep = cli::run_bench(o);
  const double base = rep.row("schnorr_sign")->median_us;
  const double lr = rep.row("lrsha_sign")->median_us;
  const double fl = rep.row("flrsha_sign")->median_us;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "medians over 1000: schnorr %.2f us, lrsha %.2f us (x%.2f), flrsha %.2f us (x%.2f)", base, lr,
                base / lr, fl, base / fl);
  return {lr <= base / 2 && fl <= base, buf};
}

// ---------------------------------------------------------------- 5

Result size_contract() {
  bool ok = true;
  std::string detail;
  SeededRng rng(5005);
  auto lk = basic::keygen({Scheme::lrsha, GroupId::ristretto255, 4, 3}, rng);
  auto fk = forward::keygen({Scheme::flrsha, GroupId::ristretto255, 4, 3}, rng);
  const std::size_t lsig = basic::sign(lk.signer, bytes_of("m")).encode().size();
  const std::size_t fsig = forward::sign(fk.signer, bytes_of("m")).encode().size();
  ok = lsig == 72 && fsig == 72;
  detail = "signature lrsha " + str(lsig) + " B, flrsha " + str(fsig) + " B; flrsha key file payload";

  const fs::path dir = fs::temp_directory_path() / ("lrsha-accept-" + str(::getpid()));
  fs::remove_all(dir);
  const std::string seal(64, '1');
  for (std::uint32_t L = 1; L <= 3; ++L) {
    cli::CeremonyOptions co;
    co.scheme = Scheme::flrsha;
    co.servers = L;
    co.max_epoch = 16;
    co.out = dir / ("L" + str(L));
    co.seed = L;
    co.seal_key = seal;
    cli::CeremonyFiles files = cli::ceremony(co);
    Bytes record = cli::load_key_file(files.signer_key, comc::resolve_seal_key(files.signer_key, seal)).encode();
    const std::size_t payload = record.size() - cli::SignerKeyFile::kHeaderSize;
    const std::size_t want = 2 * L * 32 + 16;
    ok = ok && payload == want;
    detail += " L=" + str(L) + ":" + str(payload) + "/" + str(want);
  }
  fs::remove_all(dir);
  return {ok, detail + " B"};
}

// ---------------------------------------------------------------- 6

bool contains_window(ByteView hay, ByteView needle, std::size_t width) {
  for (std::size_t i = 0; i + width <= needle.size(); ++i) {
    ByteView w = needle.subspan(i, width);
    if (std::search(hay.begin(), hay.end(), w.begin(), w.end()) != hay.end()) return true;
  }
  return false;
}

Result forward_security() {
  constexpr std::uint64_t J = 16, kSigned = 8;
  constexpr std::uint32_t L = 3;
  constexpr std::size_t kWindow = 8;
  SeededRng rng(6006);
  auto ks = forward::keygen({Scheme::flrsha, GroupId::ristretto255, J, L}, rng);
  std::vector<forward::ServerSecret> servers = ks.servers;
  std::vector<Bytes> msgs;
  std::vector<Signature> sigs;
  std::vector<forward::Aggregate> aggs;
  std::vector<forward::EpochMaterial> old_material;
  for (std::uint64_t j = 1; j <= kSigned; ++j) {
    msgs.push_back(bytes_of("fs " + str(j)));
    old_material.push_back(forward::epoch_material(ks.signer));
    sigs.push_back(forward::sign(ks.signer, msgs.back()));
    std::vector<forward::CommitmentBundle> bs;
    for (auto& s : servers) bs.push_back(forward::server_commit(s, j));
    aggs.push_back(forward::aggregate(bs, ks.verifier_key));
  }

  // (a) no window of any epoch <= 8 chain value in the signer state.
  const Bytes state = ks.signer.serialize_payload();
  const Bytes record = cli::SignerKeyFile::from(ks.signer, L).encode();
  int leaks = 0, values = 0;
  for (std::uint32_t l = 0; l < L; ++l) {
    for (std::uint64_t j = 1; j <= kSigned; ++j) {
      for (const Seed& first : {ks.servers[l].y_first, ks.servers[l].r_first}) {
        Seed v = hash_chain(first, j - 1);
        ++values;
        leaks += contains_window(state, v.bytes, kWindow) || contains_window(record, v.bytes, kWindow);
      }
    }
  }

  // (b) signing or certifying any epoch <= 8 fails.
  int attempts = 0, refused = 0;
  auto expect_refusal = [&](auto&& fn) {
    ++attempts;
    try {
      fn();
    } catch (const Error& e) {
      refused += e.code() == Errc::epoch_expired || e.code() == Errc::state_exhausted;
    }
  };
  for (std::uint64_t j = 1; j <= kSigned; ++j) {
    expect_refusal([&] { forward::sign_with(ks.signer, msgs[0], old_material[j - 1]); });
    for (auto& s : servers) {
      expect_refusal([&] { forward::server_commit(s, j); });
      expect_refusal([&] { s.cert_state.sign(j, bytes_of("forged")); });
      expect_refusal([&] { (void)s.cert_state.epoch_public_key(j); });
    }
  }
  const bool next_ok = ks.signer.epoch == kSigned + 1;

  // (c) what was issued still verifies.
  int still_valid = 0;
  for (std::uint64_t j = 1; j <= kSigned; ++j) {
    still_valid += forward::verify(ks.verifier_key, msgs[j - 1], sigs[j - 1], aggs[j - 1]).ok;
  }
  Result r;
  r.pass = leaks == 0 && refused == attempts && still_valid == static_cast<int>(kSigned) && next_ok;
  r.detail = "(a) " + str(values) + " chain values, " + str(leaks) + " found in state; (b) " + str(refused) + "/" +
             str(attempts) + " attempts refused; (c) " + str(still_valid) + "/" + str(kSigned) + " still verify";
  return r;
}

// ---------------------------------------------------------------- 8

Result chain_table() {
  constexpr std::uint64_t J = 256;
  SeededRng rng(8008);
  Seed first = Seed::random(rng);
  std::vector<Seed> direct;
  for (std::uint64_t j = 1; j <= J; ++j) direct.push_back(hash_chain(first, j - 1));
  int mismatches = 0, count_errors = 0;
  std::string worst;
  for (std::uint64_t stride : {1u, 2u, 4u, 8u, 16u, 256u}) {
    auto t = ChainTable::build(first, J, stride);
    std::uint64_t most = 0;
    for (std::uint64_t j = 1; j <= J; ++j) {
      metrics::Probe p;
      Seed v = t.lookup(j);
      const std::uint64_t hashes = p.delta().chain_hash;
      mismatches += v != direct[j - 1];
      count_errors += hashes != (j - 1) % stride || hashes > stride - 1;
      most = std::max(most, hashes);
    }
    worst += " " + str(stride) + ":" + str(most);
  }
  return {mismatches == 0 && count_errors == 0,
          "J=256, " + str(mismatches) + " mismatches, " + str(count_errors) +
              " hash counts off the stride bound; max hashes per stride" + worst};
}

// ---------------------------------------------------------------- 9

std::pair<int, std::string> run(const std::string& cmd) {
  std::string out;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return {-1, ""};
  char buf[512];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int st = ::pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

Result end_to_end_demo() {
  bool ok = true;
  std::string detail;
  for (const char* scheme : {"lrsha", "flrsha"}) {
    auto [rc, out] = run(std::string(LRSHA_BIN) + " demo --scheme " + scheme + " --servers 3 --tamper-server 2");
    const bool good = rc == 0 && out.find("[demo] PASS") != std::string::npos &&
                      out.find("[servers] 3 comc-server processes") != std::string::npos &&
                      out.find("reject CertFailure{2,") != std::string::npos &&
                      out.find("[wire] requests and responses round-trip byte-exactly") != std::string::npos;
    ok = ok && good;
    detail += std::string(scheme) + " exit " + str(rc) + (good ? "" : " (transcript incomplete)") + "; ";
    if (!good) std::cerr << out;
  }

  // Every message shape, through a live server's handler.
  Fleet f(Scheme::lrsha, 8, 2, 9009);
  std::vector<wire::Request> reqs{wire::Request::get(Scheme::lrsha, 1, 3), wire::Request::batch(Scheme::lrsha, 2, 1, 8),
                                  wire::Request::status(Scheme::lrsha, 1), wire::Request::get(Scheme::lrsha, 1, 99),
                                  wire::Request::get(Scheme::flrsha, 2, 1)};
  int bodies = 0, exact = 0;
  for (const auto& req : reqs) {
    std::string body = wire::encode(req);
    std::string resp = f.servers[req.server - 1]->handle(body);
    bodies += 2;
    exact += wire::encode(wire::decode_request(body)) == body;
    exact += wire::encode(wire::decode_response(resp)) == resp;
  }
  ok = ok && exact == bodies;
  return {ok, detail + "wire " + str(exact) + "/" + str(bodies) + " bodies byte-exact"};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0: no runtime bound
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  init_crypto();
  const std::vector<Criterion> all{
      {1, "correctness sweep", 30, correctness_sweep},
      {2, "toy-group oracle equivalence", 0, toy_oracle},
      {3, "exponentiation-free signing", 0, exp_free_signing},
      {4, "relative speed", 60, relative_speed},
      {5, "size contract", 0, size_contract},
      {6, "forward-security contract", 10, forward_security},
      {7, "false-commitment detection", 30, false_commitment_detection},
      {8, "chain-table equivalence", 10, chain_table},
      {9, "end-to-end demo", 60, end_to_end_demo},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = Clock::now();
    Result r;
    try {
      r = c.run();
    } catch (const Error& e) {
      r = {false, "error " + e.tag() + ": " + e.what()};
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = c.budget_s == 0 || secs < c.budget_s;
    const bool pass = r.pass && in_time;
    failures += !pass;
    char timing[64];
    if (c.budget_s > 0) {
      std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", secs, c.budget_s);
    } else {
      std::snprintf(timing, sizeof timing, "%.2fs", secs);
    }
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " " << c.name << ": " << r.detail
              << " [" << timing << "]" << std::endl;
  }
  return failures;
}
