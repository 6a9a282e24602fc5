#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <thread>

#include <unistd.h>

#include "lrsha/basic.hpp"
#include "lrsha/comc.hpp"
#include "lrsha/error.hpp"
#include "lrsha/fileio.hpp"
#include "lrsha/forward.hpp"
#include "lrsha/http.hpp"
#include "lrsha/wire.hpp"

using namespace lrsha;
using namespace lrsha::comc;
namespace fs = std::filesystem;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an lrsha::Error");
  return Errc::io_error;
}

SchemeParams params(Scheme s, std::uint64_t J, std::uint32_t L = 3) {
  return {s, GroupId::ristretto255, J, L};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lrsha-comc-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

ServerConfig config(Scheme s, std::uint16_t index) {
  ServerConfig c;
  c.scheme = s;
  c.index = index;
  c.table_stride = 8;
  return c;
}

std::unique_ptr<ComcServer> server_with(Scheme s, std::uint16_t index, ByteView blob,
                                        LogSink log = {}) {
  auto srv = std::make_unique<ComcServer>(config(s, index), make_memory_keystore(), std::move(log));
  srv->provision(blob);
  return srv;
}

bool has_bytes(ByteView hay, ByteView needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool contains_text(std::string_view hay, ByteView needle) {
  return has_bytes(as_bytes(hay), needle) || hay.find(to_hex(needle)) != std::string_view::npos;
}

}  // namespace

TEST_CASE("provisioning is one-shot") {
  SeededRng rng(1);
  auto ks = basic::keygen(params(Scheme::lrsha, 16), rng);
  ComcServer srv(config(Scheme::lrsha, 1), make_memory_keystore());
  CHECK_FALSE(srv.ready());
  CHECK(code_of([&] { srv.serve_commitment(1); }) == Errc::not_provisioned);
  srv.provision(ks.servers[0].encode());
  CHECK(srv.ready());
  CHECK(code_of([&] { srv.provision(ks.servers[0].encode()); }) == Errc::already_provisioned);
}

TEST_CASE("a secret for the wrong scheme or index is malformed") {
  SeededRng rng(2);
  auto plain = basic::keygen(params(Scheme::lrsha, 16), rng);
  auto fwd = forward::keygen(params(Scheme::flrsha, 16), rng);

  ComcServer f(config(Scheme::flrsha, 1), make_memory_keystore());
  CHECK(code_of([&] { f.provision(plain.servers[0].encode()); }) == Errc::malformed_secret);
  CHECK_FALSE(f.ready());
  f.provision(fwd.servers[0].encode());
  CHECK(f.ready());

  ComcServer p(config(Scheme::lrsha, 2), make_memory_keystore());
  CHECK(code_of([&] { p.provision(fwd.servers[1].encode()); }) == Errc::malformed_secret);
  CHECK(code_of([&] { p.provision(plain.servers[0].encode()); }) == Errc::malformed_secret);
  CHECK(code_of([&] { p.provision(Bytes{1, 2, 3}); }) == Errc::malformed_secret);
  p.provision(plain.servers[1].encode());
  CHECK(p.ready());
}

TEST_CASE("status reports readiness and nothing secret") {
  SeededRng rng(3);
  auto ks = basic::keygen(params(Scheme::lrsha, 16), rng);
  ComcServer srv(config(Scheme::lrsha, 2), make_memory_keystore());
  auto before = wire::decode_response(srv.handle(wire::encode(wire::Request::status(Scheme::lrsha, 2))));
  REQUIRE(before.status);
  CHECK_FALSE(before.status->ready);

  srv.provision(ks.servers[1].encode());
  std::string body = srv.handle(wire::encode(wire::Request::status(Scheme::lrsha, 2)));
  auto after = wire::decode_response(body);
  REQUIRE(after.status);
  CHECK(after.status->ready);
  CHECK(after.status->max_epoch == 16);
  CHECK(after.status->servers == 3);
  CHECK(after.status->keystore == "memory");
  CHECK_FALSE(contains_text(body, ks.servers[1].seed.bytes));
  CHECK_FALSE(contains_text(body, ks.servers[1].cert.secret.bytes));
}

TEST_CASE("serve_commitment: repeatable, range-checked, certified") {
  SeededRng rng(4);
  auto ks = basic::keygen(params(Scheme::lrsha, 16), rng);
  auto srv = server_with(Scheme::lrsha, 3, ks.servers[2].encode());
  Bytes a = srv->serve_commitment(7);
  CHECK(a == srv->serve_commitment(7));
  CHECK(a.size() == srv->bundle_size());
  CHECK(code_of([&] { srv->serve_commitment(0); }) == Errc::epoch_out_of_range);
  CHECK(code_of([&] { srv->serve_commitment(17); }) == Errc::epoch_out_of_range);
  auto b = basic::CommitmentBundle::decode(a);
  CHECK(basic::check_bundle(ks.public_key, 3, 7, b).ok);
  CHECK(b == basic::server_commit(ks.servers[2], 7));
}

TEST_CASE("forward-secure live path serves in order and keeps issued bundles") {
  SeededRng rng(5);
  auto ks = forward::keygen(params(Scheme::flrsha, 16), rng);
  auto srv = server_with(Scheme::flrsha, 1, ks.servers[0].encode());
  Bytes five = srv->serve_commitment(5);
  CHECK(five == srv->serve_commitment(5));
  CHECK(forward::check_bundle(ks.verifier_key, 1, 5, forward::CommitmentBundle::decode(five)).ok);
  CHECK(code_of([&] { srv->serve_commitment(4); }) == Errc::epoch_expired);
  CHECK(srv->status().next_live_epoch == 6);
  Bytes nine = srv->serve_commitment(9);
  CHECK(forward::check_bundle(ks.verifier_key, 1, 9, forward::CommitmentBundle::decode(nine)).ok);
  CHECK(five == srv->serve_commitment(5));
}

TEST_CASE("serve_batch") {
  SeededRng rng(6);
  for (Scheme s : {Scheme::lrsha, Scheme::flrsha}) {
    CAPTURE(to_string(s));
    SchemeParams p = params(s, 64);
    basic::KeySet plain;
    std::optional<forward::KeySet> fwd;
    Bytes blob;
    if (s == Scheme::lrsha) {
      plain = basic::keygen(p, rng);
      blob = plain.servers[1].encode();
    } else {
      fwd = forward::keygen(p, rng);
      blob = fwd->servers[1].encode();
    }
    auto srv = server_with(s, 2, blob);
    // A forward-secure server certifies in order, so the full range goes first.
    auto all = srv->serve_batch(1, 64);
    REQUIRE(all.size() == 64);
    auto one = srv->serve_batch(5, 5);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == srv->serve_commitment(5));
    CHECK(one[0] == all[4]);
    for (std::uint64_t j = 1; j <= 64; ++j) {
      bool ok = s == Scheme::lrsha
                    ? basic::check_bundle(plain.public_key, 2, j,
                                          basic::CommitmentBundle::decode(all[j - 1])).ok
                    : forward::check_bundle(fwd->verifier_key, 2, j,
                                            forward::CommitmentBundle::decode(all[j - 1])).ok;
      CHECK(ok);
    }
    CHECK(code_of([&] { srv->serve_batch(0, 3); }) == Errc::epoch_out_of_range);
    CHECK(code_of([&] { srv->serve_batch(9, 8); }) == Errc::epoch_out_of_range);
    CHECK(code_of([&] { srv->serve_batch(60, 65); }) == Errc::epoch_out_of_range);
  }

  auto ks = basic::keygen(params(Scheme::lrsha, 64), rng);
  ServerConfig c = config(Scheme::lrsha, 1);
  c.max_batch = 16;
  ComcServer small(c, make_memory_keystore());
  small.provision(ks.servers[0].encode());
  CHECK(code_of([&] { small.serve_batch(1, 64); }) == Errc::range_too_large);
  CHECK(small.serve_batch(1, 16).size() == 16);
}

TEST_CASE("serial and parallel batch kernels agree") {
  SeededRng rng(7);
  auto ks = basic::keygen(params(Scheme::lrsha, 128), rng);
  ServerConfig serial = config(Scheme::lrsha, 1);
  serial.exec = kernels::Exec::serial;
  ComcServer a(serial, make_memory_keystore());
  a.provision(ks.servers[0].encode());
  auto b = server_with(Scheme::lrsha, 1, ks.servers[0].encode());
  CHECK(a.serve_batch(1, 128) == b->serve_batch(1, 128));
}

TEST_CASE("precompute") {
  SeededRng rng(8);
  for (Scheme s : {Scheme::lrsha, Scheme::flrsha}) {
    CAPTURE(to_string(s));
    SchemeParams p = params(s, 128);
    Bytes blob = s == Scheme::lrsha ? basic::keygen(p, rng).servers[0].encode()
                                    : forward::keygen(p, rng).servers[0].encode();
    auto warm = server_with(s, 1, blob);
    auto cold = server_with(s, 1, blob);
    const std::uint64_t size = warm->bundle_size();

    CHECK(code_of([&] { warm->precompute(1, 100, size - 1); }) == Errc::budget_exceeded);
    CHECK(warm->cache_stats().bundles == 0);

    CacheStats st = warm->precompute(1, 100, 100 * size + 7);
    CHECK(st.bundles == 100);
    CHECK(st.bytes == 100 * size);
    CHECK(st.bytes <= st.budget);
    CHECK(st.lo == 1);
    CHECK(st.hi == 100);

    std::uint64_t hits = warm->cache_stats().hits;
    Bytes hot = warm->serve_commitment(50);
    CHECK(warm->cache_stats().hits == hits + 1);
    CHECK(hot == cold->serve_commitment(50));
  }
}

TEST_CASE("cached and cold bundles are byte-identical") {
  SeededRng rng(9);
  std::mt19937_64 pick(9);
  const std::uint64_t J = 1024;
  for (Scheme s : {Scheme::lrsha, Scheme::flrsha}) {
    CAPTURE(to_string(s));
    SchemeParams p = params(s, J, 2);
    Bytes blob = s == Scheme::lrsha ? basic::keygen(p, rng).servers[1].encode()
                                    : forward::keygen(p, rng).servers[1].encode();
    auto warm = server_with(s, 2, blob);
    auto cold = server_with(s, 2, blob);
    warm->precompute(1, J, J * warm->bundle_size());

    std::vector<std::uint64_t> epochs(1000);
    for (auto& j : epochs) j = 1 + pick() % J;
    // The forward-secure live path only moves forward.
    if (s == Scheme::flrsha) std::sort(epochs.begin(), epochs.end());
    std::uint64_t mismatches = 0;
    for (std::uint64_t j : epochs) mismatches += warm->serve_commitment(j) != cold->serve_commitment(j);
    CHECK(mismatches == 0);
    CHECK(warm->cache_stats().misses == 0);
  }
}

TEST_CASE("keystore hermeticity") {
  SeededRng rng(10);
  TempDir dir;
  std::string logs;
  LogSink sink = [&](std::string_view line) {
    logs += line;
    logs += '\n';
  };

  SchemeParams pp = params(Scheme::lrsha, 64);
  auto plain = basic::keygen(pp, rng);
  SchemeParams fp = params(Scheme::flrsha, 64);
  auto fwd = forward::keygen(fp, rng);

  std::vector<Bytes> secrets;
  for (const auto& s : plain.servers) {
    secrets.emplace_back(s.seed.bytes.begin(), s.seed.bytes.end());
    secrets.emplace_back(s.cert.secret.bytes.begin(), s.cert.secret.bytes.end());
  }
  for (auto& s : fwd.servers) {
    for (std::uint64_t j = 1; j <= 64; ++j) {
      for (const Seed& v : {s.y_at(j), s.r_at(j)}) secrets.emplace_back(v.bytes.begin(), v.bytes.end());
    }
    Bytes state = s.cert_state.serialize();
    // group(1) | J(8) | epoch(8) | has_seed(1) | seed(32)
    REQUIRE(state[17] == 1);
    secrets.emplace_back(state.begin() + 18, state.begin() + 50);
  }

  std::vector<std::string> outputs;
  std::vector<fs::path> files;
  auto exercise = [&](Scheme s, std::uint16_t index, ByteView blob) {
    ServerConfig c = config(s, index);
    c.cache_file = dir.path / (std::string(to_string(s)) + std::to_string(index) + ".cache");
    files.push_back(*c.cache_file);
    ComcServer srv(c, make_memory_keystore(), sink);
    srv.provision(blob);
    srv.precompute(10, 20, 1 << 20);
    for (const auto& req : {wire::Request::get(s, index, 15), wire::Request::get(s, index, 30),
                            wire::Request::batch(s, index, 1, 64), wire::Request::get(s, index, 0),
                            wire::Request::status(s, index)}) {
      outputs.push_back(srv.handle(wire::encode(req)));
    }
    outputs.push_back(srv.handle("{not json"));
  };
  for (const auto& s : plain.servers) exercise(Scheme::lrsha, s.index, s.encode());
  for (const auto& s : fwd.servers) exercise(Scheme::flrsha, s.index, s.encode());
  REQUIRE_FALSE(logs.empty());

  std::size_t leaks = 0;
  for (const Bytes& secret : secrets) {
    leaks += contains_text(logs, secret);
    for (const auto& o : outputs) leaks += contains_text(o, secret);
    for (const auto& f : files) leaks += has_bytes(read_file(f), secret);
  }
  CHECK(leaks == 0);
}

TEST_CASE("restart re-serves identical bytes") {
  SeededRng rng(11);
  TempDir dir;
  Bytes seal_key(32, 0x42);
  for (Scheme s : {Scheme::lrsha, Scheme::flrsha}) {
    CAPTURE(to_string(s));
    SchemeParams p = params(s, 32);
    Bytes blob = s == Scheme::lrsha ? basic::keygen(p, rng).servers[0].encode()
                                    : forward::keygen(p, rng).servers[0].encode();
    ServerConfig c = config(s, 1);
    fs::path ks_path = dir.path / (std::string(to_string(s)) + ".ks");
    c.cache_file = dir.path / (std::string(to_string(s)) + ".cache");

    std::vector<Bytes> before;
    {
      ComcServer srv(c, open_file_keystore(ks_path, seal_key));
      srv.provision(blob);
      for (std::uint64_t j : {3, 7}) before.push_back(srv.serve_commitment(j));
      srv.precompute(20, 24, 1 << 20);
      for (std::uint64_t j : {22, 27}) before.push_back(srv.serve_commitment(j));
    }
    CHECK((fs::status(ks_path).permissions() & fs::perms::all) ==
          (fs::perms::owner_read | fs::perms::owner_write));
    ComcServer again(c, open_file_keystore(ks_path, seal_key));
    REQUIRE(again.ready());
    std::vector<Bytes> after;
    for (std::uint64_t j : {3, 7, 22, 27}) after.push_back(again.serve_commitment(j));
    CHECK(before == after);
    CHECK(again.cache_stats().bundles == 5);
    if (s == Scheme::flrsha) {
      CHECK(code_of([&] { again.serve_commitment(5); }) == Errc::epoch_expired);
      CHECK(again.serve_commitment(28).size() == again.bundle_size());
    }
    CHECK(code_of([&] { again.provision(blob); }) == Errc::already_provisioned);
  }
}

TEST_CASE("a torn journal record is dropped on restart") {
  SeededRng rng(12);
  TempDir dir;
  Bytes seal_key(32, 0x17);
  auto ks = forward::keygen(params(Scheme::flrsha, 16), rng);
  ServerConfig c = config(Scheme::flrsha, 1);
  c.cache_file = dir.path / "f.cache";
  Bytes three;
  {
    ComcServer srv(c, open_file_keystore(dir.path / "f.ks", seal_key));
    srv.provision(ks.servers[0].encode());
    three = srv.serve_commitment(3);
    srv.serve_commitment(4);
  }
  Bytes raw = read_file(*c.cache_file);
  raw.resize(raw.size() - 10);
  atomic_write_file(*c.cache_file, raw);
  ComcServer again(c, open_file_keystore(dir.path / "f.ks", seal_key));
  CHECK(again.serve_commitment(3) == three);
  // Epoch 4's certification key is gone with the sealed state; its bundle was lost.
  CHECK(code_of([&] { again.serve_commitment(4); }) == Errc::epoch_expired);
}

TEST_CASE("file keystore") {
  TempDir dir;
  Bytes key(32, 7);
  fs::path path = dir.path / "ks";
  auto ks = open_file_keystore(path, key);
  CHECK(ks->backend() == "file");
  CHECK_FALSE(ks->provisioned());
  CHECK(code_of([&] { ks->unseal(); }) == Errc::not_provisioned);
  CHECK(code_of([&] { ks->reseal(Bytes{1}); }) == Errc::not_provisioned);
  Bytes secret(100);
  for (std::size_t i = 0; i < secret.size(); ++i) secret[i] = static_cast<std::uint8_t>(i * 7 + 1);
  ks->provision(secret);
  CHECK(code_of([&] { ks->provision(secret); }) == Errc::already_provisioned);
  {
    SecretBytes out = ks->unseal();
    CHECK(Bytes(out.view().begin(), out.view().end()) == secret);
  }
  CHECK_FALSE(has_bytes(read_file(path), ByteView(secret).subspan(0, 16)));

  auto wrong = open_file_keystore(path, Bytes(32, 8));
  CHECK(code_of([&] { wrong->unseal(); }) == Errc::decode_error);
  CHECK(code_of([&] { open_file_keystore(path, Bytes(31, 0)); }) == Errc::invalid_params);

  Bytes raw = read_file(path);
  raw.back() ^= 1;
  atomic_write_file(path, raw);
  CHECK(code_of([&] { ks->unseal(); }) == Errc::decode_error);

  ks->reset();
  CHECK_FALSE(ks->provisioned());
  ks->provision(Bytes{9, 9});
  CHECK(ks->unseal().size() == 2);
}

TEST_CASE("memory keystore") {
  auto ks = make_memory_keystore();
  CHECK(ks->backend() == "memory");
  ks->provision(Bytes{1, 2, 3});
  ks->reseal(Bytes{4, 5});
  SecretBytes out = ks->unseal();
  CHECK(Bytes(out.view().begin(), out.view().end()) == Bytes{4, 5});
  ks->reset();
  CHECK(code_of([&] { ks->unseal(); }) == Errc::not_provisioned);
}

TEST_CASE("seal key resolution") {
  TempDir dir;
  fs::path ks = dir.path / "server.ks";
  ::unsetenv("LRSHA_SEAL_KEY");
  std::string hex(64, 'a');
  CHECK(resolve_seal_key(ks, hex) == Bytes(32, 0xaa));
  CHECK(code_of([&] { resolve_seal_key(ks, std::string("abcd")); }) == Errc::invalid_params);
  Bytes generated = resolve_seal_key(ks, std::nullopt);
  CHECK(generated.size() == 32);
  CHECK(resolve_seal_key(ks, std::nullopt) == generated);
  ::setenv("LRSHA_SEAL_KEY", std::string(64, 'b').c_str(), 1);
  CHECK(resolve_seal_key(ks, std::nullopt) == Bytes(32, 0xbb));
  ::unsetenv("LRSHA_SEAL_KEY");
}

TEST_CASE("a tampered seed passes certification but fails verification") {
  SeededRng rng(13);
  const std::uint64_t J = 8;

  auto ks = basic::keygen(params(Scheme::lrsha, J), rng);
  basic::ServerSecret bad = ks.servers[1];
  bad.seed.bytes[0] ^= 0x80;
  std::vector<std::unique_ptr<ComcServer>> fleet;
  for (std::uint16_t l = 1; l <= 3; ++l) {
    fleet.push_back(server_with(Scheme::lrsha, l, l == 2 ? bad.encode() : ks.servers[l - 1].encode()));
  }
  for (std::uint64_t j = 1; j <= J; ++j) {
    Signature sig = basic::sign(ks.signer, as_bytes("message"));
    std::vector<basic::CommitmentBundle> bundles;
    for (auto& srv : fleet) bundles.push_back(basic::CommitmentBundle::decode(srv->serve_commitment(j)));
    for (std::uint16_t l = 1; l <= 3; ++l) {
      CHECK(basic::check_bundle(ks.public_key, l, j, bundles[l - 1]).ok);
    }
    CHECK_FALSE(basic::verify(ks.public_key, as_bytes("message"), sig,
                              basic::aggregate(bundles, ks.public_key)).ok);
  }

  auto fk = forward::keygen(params(Scheme::flrsha, J), rng);
  forward::ServerSecret fbad = fk.servers[2];
  fbad.r_first.bytes[5] ^= 0x01;
  std::vector<std::unique_ptr<ComcServer>> ffleet;
  for (std::uint16_t l = 1; l <= 3; ++l) {
    ffleet.push_back(server_with(Scheme::flrsha, l, l == 3 ? fbad.encode() : fk.servers[l - 1].encode()));
  }
  for (std::uint64_t j = 1; j <= J; ++j) {
    Signature sig = forward::sign(fk.signer, as_bytes("message"));
    std::vector<forward::CommitmentBundle> bundles;
    for (auto& srv : ffleet) {
      bundles.push_back(forward::CommitmentBundle::decode(srv->serve_commitment(j)));
    }
    for (std::uint16_t l = 1; l <= 3; ++l) {
      CHECK(forward::check_bundle(fk.verifier_key, l, j, bundles[l - 1]).ok);
    }
    CHECK_FALSE(forward::verify(fk.verifier_key, as_bytes("message"), sig,
                                forward::aggregate(bundles, fk.verifier_key)).ok);
  }
}

TEST_CASE("injected faults break certification") {
  SeededRng rng(14);
  auto ks = basic::keygen(params(Scheme::lrsha, 16), rng);
  auto srv = server_with(Scheme::lrsha, 1, ks.servers[0].encode());
  Bytes honest = srv->serve_commitment(7);

  srv->set_fault(Fault::parse("flip:20@7"));
  Bytes flipped = srv->serve_commitment(7);
  CHECK(flipped.size() == honest.size());
  CHECK(flipped[20] == (honest[20] ^ 1));
  CHECK_FALSE(basic::check_bundle(ks.public_key, 1, 7, basic::CommitmentBundle::decode(flipped)).ok);
  CHECK(srv->serve_commitment(6) == basic::server_commit(ks.servers[0], 6).encode());

  srv->set_fault(Fault::parse("random-r"));
  for (std::uint64_t j : {1, 9, 16}) {
    auto b = basic::CommitmentBundle::decode(srv->serve_commitment(j));
    CHECK(b.R != basic::derive_commitment(ks.servers[0], j));
    CHECK_FALSE(basic::check_bundle(ks.public_key, 1, j, b).ok);
  }
  srv->set_fault(Fault::parse("none"));
  CHECK(srv->serve_commitment(7) == honest);

  CHECK(Fault::parse("random-r@3").epoch == 3u);
  CHECK(code_of([] { Fault::parse("flip"); }) == Errc::invalid_params);
  CHECK(code_of([] { Fault::parse("flip:x"); }) == Errc::invalid_params);
  CHECK(code_of([] { Fault::parse("random-r@"); }) == Errc::invalid_params);
}

TEST_CASE("wire messages round-trip byte-exactly") {
  std::vector<std::string> texts = {
      wire::encode(wire::Request::get(Scheme::lrsha, 2, 7)),
      wire::encode(wire::Request::batch(Scheme::flrsha, 3, 1, 64)),
      wire::encode(wire::Request::status(Scheme::lrsha, 1)),
  };
  CHECK(texts[0] == R"({"j":7,"op":"get","scheme":"lrsha","server":2,"v":1})");
  CHECK(texts[1] == R"({"hi":64,"lo":1,"op":"batch","scheme":"flrsha","server":3,"v":1})");

  wire::Response ok;
  ok.bundles = {Bytes{0x00, 0xab, 0xff}, Bytes{}};
  wire::Response err;
  err.error = wire::ErrorBody{"CertFailure", "bad", 2, 7};
  wire::Response st;
  st.status = wire::ServerStatus{true, "flrsha", 2, "ristretto255", 32, 3, 5, "file",
                                 1, 9, 9, 100, 200, 4, 1, 1024};
  for (const auto& r : {ok, err, st}) {
    std::string t = wire::encode(r);
    CHECK(wire::decode_response(t) == r);
    texts.push_back(t);
  }
  CHECK(texts[3] == R"({"bundles":["00abff",""],"v":1})");
  for (const auto& t : texts) {
    std::string again = t.front() == '{' && t.find("\"op\"") != std::string::npos
                            ? wire::encode(wire::decode_request(t))
                            : wire::encode(wire::decode_response(t));
    CHECK(again == t);
  }
  CHECK(wire::decode_request(texts[1]) == wire::Request::batch(Scheme::flrsha, 3, 1, 64));
}

TEST_CASE("malformed wire messages are rejected") {
  for (std::string_view bad : {
           R"({"j":7,"op":"get","scheme":"lrsha","server":2})",
           R"({"j":7,"op":"get","scheme":"lrsha","server":2,"v":2})",
           R"({"j":-1,"op":"get","scheme":"lrsha","server":2,"v":1})",
           R"({"j":7,"op":"get","scheme":"rsa","server":2,"v":1})",
           R"({"j":7,"op":"put","scheme":"lrsha","server":2,"v":1})",
           R"({"j":7,"op":"get","scheme":"lrsha","server":0,"v":1})",
           R"({"extra":1,"j":7,"op":"get","scheme":"lrsha","server":2,"v":1})",
           R"({"op":"get","scheme":"lrsha","server":2,"v":1})",
           R"([1,2])",
           "",
       }) {
    CAPTURE(bad);
    CHECK(code_of([&] { wire::decode_request(bad); }) == Errc::decode_error);
  }
  for (std::string_view bad : {
           R"({"bundles":["ABCD"],"v":1})",
           R"({"bundles":["abc"],"v":1})",
           R"({"bundles":[1],"v":1})",
           R"({"v":1})",
           R"({"bundles":[],"error":{"code":"x","message":"y"},"v":1})",
       }) {
    CAPTURE(bad);
    CHECK(code_of([&] { wire::decode_response(bad); }) == Errc::decode_error);
  }
}

TEST_CASE("handle maps every failure to an error body") {
  SeededRng rng(15);
  auto ks = basic::keygen(params(Scheme::lrsha, 16), rng);
  auto srv = server_with(Scheme::lrsha, 2, ks.servers[1].encode());
  auto code = [&](const std::string& body) {
    auto r = wire::decode_response(srv->handle(body));
    return r.error ? r.error->code : std::string("ok");
  };
  CHECK(code(wire::encode(wire::Request::get(Scheme::lrsha, 2, 3))) == "ok");
  CHECK(code(wire::encode(wire::Request::get(Scheme::lrsha, 1, 3))) == "InvalidParams");
  CHECK(code(wire::encode(wire::Request::get(Scheme::flrsha, 2, 3))) == "InvalidParams");
  CHECK(code(wire::encode(wire::Request::get(Scheme::lrsha, 2, 0))) == "EpochOutOfRange");
  CHECK(code(wire::encode(wire::Request::batch(Scheme::lrsha, 2, 4, 2))) == "EpochOutOfRange");
  CHECK(code("garbage") == "DecodeError");
  auto r = wire::decode_response(srv->handle(wire::encode(wire::Request::get(Scheme::lrsha, 2, 99))));
  REQUIRE(r.error);
  CHECK(r.error->server == 2u);
  CHECK(r.error->epoch == 99u);
}

TEST_CASE("concurrent readers during precompute see consistent bytes") {
  SeededRng rng(16);
  auto ks = basic::keygen(params(Scheme::lrsha, 256), rng);
  auto srv = server_with(Scheme::lrsha, 1, ks.servers[0].encode());
  std::atomic<int> bad{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&, t] {
      for (std::uint64_t j = 1 + t; j <= 256; j += 4) {
        if (srv->serve_commitment(j) != basic::server_commit(ks.servers[0], j).encode()) ++bad;
      }
    });
  }
  srv->precompute(1, 256, 1 << 20);
  srv->precompute(100, 200, 1 << 20);
  for (auto& th : readers) th.join();
  CHECK(bad == 0);
}

TEST_CASE("HTTP transport") {
  SeededRng rng(17);
  auto ks = basic::keygen(params(Scheme::lrsha, 16), rng);
  auto srv = server_with(Scheme::lrsha, 1, ks.servers[0].encode());
  HttpServer http(*srv);
  int port = http.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread loop([&] { http.run(); });

  Address to{"127.0.0.1", port};
  std::string body = http_post(to, wire::encode(wire::Request::get(Scheme::lrsha, 1, 4)));
  auto resp = wire::decode_response(body);
  REQUIRE(resp.bundles.size() == 1);
  CHECK(resp.bundles[0] == srv->serve_commitment(4));
  http.stop();
  loop.join();

  CHECK(code_of([&] { http_post(to, "{}", std::chrono::milliseconds(500)); }) ==
        Errc::server_unreachable);
}

TEST_CASE("addresses") {
  CHECK(Address::parse("127.0.0.1:9000").port == 9000);
  CHECK(Address::parse(":80").host == "127.0.0.1");
  CHECK(Address::parse("4000").port == 4000);
  CHECK(Address::parse("localhost:1").str() == "localhost:1");
  CHECK(code_of([] { Address::parse("host:"); }) == Errc::invalid_params);
  CHECK(code_of([] { Address::parse("host:70000"); }) == Errc::invalid_params);
}
