#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <thread>

#include <json.hpp>
#include <omp.h>
#include <sodium.h>

#include "lrsha/cli.hpp"
#include "lrsha/comc.hpp"
#include "lrsha/metrics.hpp"

namespace lrsha::cli {
namespace {

using Clock = std::chrono::steady_clock;

// Times `op(i)` once per iteration; a short warm-up is discarded.
template <class Op>
BenchRow measure(std::string name, std::uint64_t iterations, Op&& op) {
  for (std::uint64_t i = 0; i < std::min<std::uint64_t>(16, iterations); ++i) op(i);
  std::vector<double> us(iterations);
  metrics::Probe probe;
  for (std::uint64_t i = 0; i < iterations; ++i) {
    auto t0 = Clock::now();
    op(i);
    us[i] = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  }
  const std::uint64_t exps = probe.delta().exp;
  std::sort(us.begin(), us.end());
  auto at = [&](double q) { return us[static_cast<std::size_t>(q * static_cast<double>(us.size() - 1))]; };
  BenchRow r;
  r.name = std::move(name);
  r.iterations = iterations;
  r.median_us = at(0.5);
  r.p10_us = at(0.1);
  r.p90_us = at(0.9);
  r.exp_per_op = iterations == 0 ? 0 : exps / iterations;
  return r;
}

Bytes message_for(std::uint64_t i) {
  Writer w;
  w.raw(as_bytes("bench message ")).u64(i);
  return w.take();
}

// Warm-up and the verify fixture each use a few epochs on top of the timed ones.
constexpr std::uint64_t kSpareEpochs = 64;
constexpr std::uint64_t kVerifyEpochs = 8;

void bench_lrsha(const BenchOptions& o, BenchReport& rep) {
  SeededRng rng(1);
  const std::uint64_t J = 2 * o.iterations + kSpareEpochs;
  basic::KeySet ks = basic::keygen({Scheme::lrsha, o.group, J, o.servers}, rng);

  std::vector<Bytes> msgs;
  std::vector<Signature> sigs;
  for (std::uint64_t j = 1; j <= kVerifyEpochs; ++j) {
    msgs.push_back(message_for(j));
    sigs.push_back(basic::sign(ks.signer, msgs.back()));
  }
  rep.rows.push_back(measure("lrsha_sign", o.iterations, [&](std::uint64_t i) {
    auto m = message_for(i);
    basic::sign(ks.signer, m);
  }));

  std::vector<basic::EpochMaterial> mats;
  for (std::uint64_t k = 0; k < o.iterations + 16; ++k) mats.push_back(basic::epoch_material(ks.signer, ks.signer.epoch + k));
  std::size_t next = 0;
  rep.rows.push_back(measure("lrsha_sign_online", o.iterations, [&](std::uint64_t i) {
    auto m = message_for(i);
    basic::sign_with(ks.signer, m, mats[next++]);
  }));

  rep.rows.push_back(measure("lrsha_commit", o.iterations, [&](std::uint64_t i) {
    basic::server_commit(ks.servers[0], 1 + i % J);
  }));

  std::vector<std::unique_ptr<comc::ComcServer>> servers;
  std::vector<comc::ComcServer*> raw;
  for (const auto& s : ks.servers) {
    comc::ServerConfig c;
    c.index = s.index;
    servers.push_back(std::make_unique<comc::ComcServer>(c, comc::make_memory_keystore()));
    servers.back()->provision(s.encode());
    raw.push_back(servers.back().get());
  }
  auto desc = vclient::DeploymentDescriptor::for_keys(
      ks.public_key, std::vector<std::string>(o.servers, "127.0.0.1:1"));
  vclient::Client client(desc, std::make_shared<vclient::InProcessTransport>(raw));
  client.prefetch(1, kVerifyEpochs);
  rep.rows.push_back(measure("lrsha_verify_online", o.iterations, [&](std::uint64_t i) {
    client.verify_message(msgs[i % kVerifyEpochs], sigs[i % kVerifyEpochs]);
  }));

  rep.sizes.emplace_back("signature", sigs[0].encode().size());
  rep.sizes.emplace_back("lrsha_signer_key_payload", ks.signer.serialize_payload().size());
  rep.sizes.emplace_back("lrsha_bundle", basic::server_commit(ks.servers[0], 1).encode().size());
}

void bench_flrsha(const BenchOptions& o, BenchReport& rep) {
  SeededRng rng(2);
  const std::uint64_t J = 2 * o.iterations + kSpareEpochs;
  forward::KeySet ks = forward::keygen({Scheme::flrsha, o.group, J, o.servers}, rng);
  std::vector<forward::ServerSecret> live = ks.servers;

  std::vector<Bytes> msgs;
  std::vector<Signature> sigs;
  for (std::uint64_t j = 1; j <= kVerifyEpochs; ++j) {
    msgs.push_back(message_for(j));
    sigs.push_back(forward::sign(ks.signer, msgs.back()));
  }
  rep.rows.push_back(measure("flrsha_sign", o.iterations, [&](std::uint64_t i) {
    auto m = message_for(i);
    forward::sign(ks.signer, m);
  }));

  std::vector<forward::EpochMaterial> mats;
  forward::SignerKey copy = ks.signer;
  for (std::uint64_t k = 0; k < o.iterations + 16 && !copy.exhausted(); ++k) {
    mats.push_back(forward::epoch_material(copy));
    if (copy.epoch < copy.max_epoch) forward::update(copy);
  }
  std::size_t next = 0;
  rep.rows.push_back(measure("flrsha_sign_online", o.iterations, [&](std::uint64_t i) {
    auto m = message_for(i);
    forward::sign_with(ks.signer, m, mats[next++]);
  }));

  // Certification only moves forward, so every call takes a fresh epoch.
  std::uint64_t epoch = kVerifyEpochs;
  rep.rows.push_back(measure("flrsha_commit", o.iterations, [&](std::uint64_t) {
    forward::server_commit(live[0], ++epoch);
  }));

  std::vector<std::unique_ptr<comc::ComcServer>> servers;
  std::vector<comc::ComcServer*> raw;
  for (const auto& s : ks.servers) {
    comc::ServerConfig c;
    c.scheme = Scheme::flrsha;
    c.index = s.index;
    servers.push_back(std::make_unique<comc::ComcServer>(c, comc::make_memory_keystore()));
    servers.back()->provision(s.encode());
    raw.push_back(servers.back().get());
  }
  auto desc = vclient::DeploymentDescriptor::for_keys(
      ks.verifier_key, std::vector<std::string>(o.servers, "127.0.0.1:1"));
  vclient::Client client(desc, std::make_shared<vclient::InProcessTransport>(raw));
  client.prefetch(1, kVerifyEpochs);
  rep.rows.push_back(measure("flrsha_verify_online", o.iterations, [&](std::uint64_t i) {
    client.verify_message(msgs[i % kVerifyEpochs], sigs[i % kVerifyEpochs]);
  }));

  forward::SignerKey fresh = forward::keygen({Scheme::flrsha, o.group, 4, o.servers}, rng).signer;
  rep.sizes.emplace_back("flrsha_signer_key_payload", fresh.serialize_payload().size());
  rep.sizes.emplace_back("flrsha_bundle", forward::server_commit(live[1], 1).encode().size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

const BenchRow* BenchReport::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

BenchReport run_bench(const BenchOptions& o) {
  init_crypto();
  BenchReport rep;
  const Group& g = group_by_id(o.group);
  SeededRng rng(0);
  CertKeypair kp = sgn_keygen(g, rng);
  rep.rows.push_back(measure("schnorr_sign", o.iterations, [&](std::uint64_t i) {
    auto m = message_for(i);
    sgn_sign(g, kp, m);
  }));
  Bytes m0 = message_for(0);
  Certificate c0 = sgn_sign(g, kp, m0);
  rep.rows.push_back(measure("schnorr_verify", o.iterations, [&](std::uint64_t) {
    sgn_verify(g, kp.public_key, m0, c0);
  }));
  rep.sizes.emplace_back("schnorr_signature", 64);

  for (Scheme s : o.schemes) {
    if (s == Scheme::lrsha) bench_lrsha(o, rep);
    if (s == Scheme::flrsha) bench_flrsha(o, rep);
  }
  const double base = rep.row("schnorr_sign")->median_us;
  for (const char* name : {"lrsha_sign", "lrsha_sign_online", "flrsha_sign", "flrsha_sign_online"}) {
    if (const BenchRow* r = rep.row(name); r && r->median_us > 0) {
      rep.ratios.emplace_back(std::string("schnorr_sign/") + name, base / r->median_us);
    }
  }

  utsname u{};
  ::uname(&u);
  rep.environment = {
      {"group", std::string(to_string(o.group))},
      {"servers", std::to_string(o.servers)},
      {"compiler", __VERSION__},
      {"libsodium", sodium_version_string()},
      {"system", std::string(u.sysname) + " " + u.release + " " + u.machine},
      {"hardware_threads", std::to_string(std::thread::hardware_concurrency())},
      {"omp_max_threads", std::to_string(omp_get_max_threads())},
  };
  return rep;
}

std::string BenchReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"name", r.name},
                      {"median_us", r.median_us},
                      {"p10_us", r.p10_us},
                      {"p90_us", r.p90_us},
                      {"iterations", r.iterations},
                      {"exp_per_op", r.exp_per_op}});
  }
  nlohmann::json sizes_j = nlohmann::json::object();
  for (const auto& [k, v] : sizes) sizes_j[k] = v;
  nlohmann::json ratios_j = nlohmann::json::object();
  for (const auto& [k, v] : ratios) ratios_j[k] = v;
  nlohmann::json env_j = nlohmann::json::object();
  for (const auto& [k, v] : environment) env_j[k] = v;
  return nlohmann::json{{"format", "lrsha-bench/1"},
                        {"rows", rows_j},
                        {"sizes", sizes_j},
                        {"ratios", ratios_j},
                        {"environment", env_j}}
             .dump(2) + "\n";
}

std::string BenchReport::to_markdown() const {
  std::string out = "| operation | median (us) | p10 (us) | p90 (us) | exp/op | iterations |\n";
  out += "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += "| " + r.name + " | " + fmt(r.median_us) + " | " + fmt(r.p10_us) + " | " + fmt(r.p90_us) +
           " | " + std::to_string(r.exp_per_op) + " | " + std::to_string(r.iterations) + " |\n";
  }
  out += "\n| ratio | value |\n|---|---:|\n";
  for (const auto& [k, v] : ratios) out += "| " + k + " | " + fmt(v) + " |\n";
  out += "\n| encoding | bytes |\n|---|---:|\n";
  for (const auto& [k, v] : sizes) out += "| " + k + " | " + std::to_string(v) + " |\n";
  return out;
}

}  // namespace lrsha::cli
