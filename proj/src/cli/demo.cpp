#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <sodium.h>

#include "lrsha/cli.hpp"
#include "lrsha/error.hpp"
#include "lrsha/fileio.hpp"
#include "lrsha/http.hpp"
#include "lrsha/wire.hpp"

extern char** environ;

namespace lrsha::cli {
namespace fs = std::filesystem;
namespace {

struct StageFailure {
  std::string stage;
  std::string reason;
};

[[noreturn]] void fail(const std::string& stage, const std::string& reason) {
  throw StageFailure{stage, reason};
}

std::string tail_of(const fs::path& log) {
  std::ifstream in(log);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return last;
}

// A comc-server child. It announces its port as "LISTENING <port>" on stdout.
class ServerProcess {
 public:
  ServerProcess(const fs::path& bin, const std::vector<std::string>& args, const fs::path& log) {
    int fds[2];
    if (::pipe(fds) != 0) fail("servers", "pipe failed");
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], 1);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    posix_spawn_file_actions_addclose(&actions, fds[1]);
    posix_spawn_file_actions_addopen(&actions, 2, log.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0600);

    std::vector<std::string> argv_s{bin.string()};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);
    int rc = posix_spawn(&pid_, bin.c_str(), &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(fds[1]);
    if (rc != 0) {
      ::close(fds[0]);
      pid_ = -1;
      fail("servers", "cannot start " + bin.string());
    }

    std::string line;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
    char c = 0;
    while (std::chrono::steady_clock::now() < deadline) {
      pollfd p{fds[0], POLLIN, 0};
      if (::poll(&p, 1, 200) <= 0) continue;
      if (::read(fds[0], &c, 1) != 1) break;
      if (c == '\n') break;
      line += c;
    }
    ::close(fds[0]);
    if (!line.starts_with("LISTENING ")) {
      stop();
      fail("servers", "server did not come up: " + tail_of(log));
    }
    port_ = std::stoi(line.substr(10));
  }

  ServerProcess(const ServerProcess&) = delete;
  ServerProcess& operator=(const ServerProcess&) = delete;
  ~ServerProcess() { stop(); }

  int port() const { return port_; }

  void stop() {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGTERM);
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }

 private:
  pid_t pid_ = -1;
  int port_ = 0;
};

std::string digest_hex(ByteView data) {
  unsigned char out[16];
  crypto_generichash(out, sizeof out, data.data(), data.size(), nullptr, 0);
  return to_hex(ByteView(out, sizeof out));
}

std::string random_hex32() {
  Bytes k(32);
  system_rng().fill(k);
  return to_hex(k);
}

}  // namespace

int run_demo(const DemoOptions& opts, std::ostream& T) {
  init_crypto();
  const std::uint64_t J = opts.max_epoch;
  const std::uint64_t N = opts.messages == 0 ? J : std::min(opts.messages, J);
  const std::string scheme(to_string(opts.scheme));
  T << "[demo] scheme=" << scheme << " L=" << opts.servers << " J=" << J << " messages=" << N << "\n";

  fs::path work;
  bool cleanup = false;
  if (opts.workdir) {
    work = *opts.workdir;
  } else {
    std::string tmpl = (fs::temp_directory_path() / "lrsha-demo-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      T << "[demo] FAIL stage=setup: cannot create a work directory\n";
      return 1;
    }
    work = tmpl;
    cleanup = true;
  }
  const fs::path keys = work / "keys";
  const std::string seal_hex = random_hex32();

  std::vector<std::unique_ptr<ServerProcess>> servers;
  int code = 0;
  try {
    if (opts.tamper_server < 1 || opts.tamper_server > opts.servers) {
      fail("setup", "tamper server must be one of 1.." + std::to_string(opts.servers));
    }
    if (!fs::exists(opts.server_bin)) fail("setup", "comc-server not found at " + opts.server_bin.string());

    // 1. Key ceremony.
    CeremonyOptions co;
    co.scheme = opts.scheme;
    co.servers = opts.servers;
    co.max_epoch = J;
    co.out = keys;
    co.seed = opts.seed;
    co.seal_key = seal_hex;
    CeremonyFiles files;
    try {
      files = ceremony(co);
    } catch (const Error& e) {
      fail("ceremony", e.tag() + ": " + e.what());
    }
    T << "[ceremony] 1 signer key, " << files.server_secrets.size() << " server secrets, 1 descriptor\n";

    // 2. Servers, each provisioned from its blob, which is then discarded.
    auto server_args = [&](std::uint16_t l, bool provision, const std::string& fault) {
      std::vector<std::string> a{"--scheme",   scheme,
                                 "--index",    std::to_string(l),
                                 "--listen",   "127.0.0.1:0",
                                 "--keystore", (work / ("server-" + std::to_string(l) + ".ks")).string(),
                                 "--seal-key", seal_hex,
                                 "--cache",    (work / ("server-" + std::to_string(l) + ".cache")).string()};
      if (provision) {
        a.insert(a.end(), {"--provision", files.server_secrets[l - 1].string()});
        if (opts.scheme == Scheme::flrsha) a.insert(a.end(), {"--precompute", "1:" + std::to_string(J)});
      }
      if (!fault.empty()) a.insert(a.end(), {"--fault", fault});
      return a;
    };
    auto log_of = [&](std::uint16_t l) { return work / ("server-" + std::to_string(l) + ".log"); };
    for (std::uint16_t l = 1; l <= opts.servers; ++l) {
      servers.push_back(std::make_unique<ServerProcess>(opts.server_bin, server_args(l, true, ""), log_of(l)));
      fs::remove(files.server_secrets[l - 1]);
    }
    const Bytes desc_bytes = read_file(files.descriptor);
    auto desc = vclient::DeploymentDescriptor::from_json(std::string(desc_bytes.begin(), desc_bytes.end()));
    auto rebind = [&] {
      for (std::size_t i = 0; i < servers.size(); ++i) {
        desc.servers[i].address = "127.0.0.1:" + std::to_string(servers[i]->port());
      }
    };
    rebind();
    T << "[servers] " << servers.size() << " comc-server processes provisioned and listening\n";

    // 3. Signing.
    std::vector<Bytes> messages;
    std::vector<Bytes> sigs;
    Bytes transcript_bytes;
    SignOptions so;
    so.key = files.signer_key;
    so.seal_key = seal_hex;
    for (std::uint64_t i = 1; i <= N; ++i) {
      std::string m = "demo message " + std::to_string(i);
      messages.emplace_back(m.begin(), m.end());
      try {
        sigs.push_back(sign_message(so, messages.back()).signature.encode());
      } catch (const Error& e) {
        fail("sign", e.tag() + ": " + e.what());
      }
      transcript_bytes.insert(transcript_bytes.end(), sigs.back().begin(), sigs.back().end());
    }
    T << "[sign] " << N << " signatures of " << sigs.front().size() << " bytes, digest "
      << digest_hex(transcript_bytes) << "\n";

    // 4. Honest verification over the wire.
    vclient::Client client(desc, std::make_shared<vclient::HttpTransport>(desc));
    vclient::PrefetchResult pre = client.prefetch(1, N);
    if (!pre.ok()) fail("prefetch", pre.failures.front().tag());
    T << "[prefetch] " << pre.cached << " aggregates cached from " << desc.servers.size() << " servers\n";
    std::uint64_t accepted = 0;
    for (std::uint64_t i = 0; i < N; ++i) {
      VerifyOutcome v = verify_signature(client, messages[i], sigs[i]);
      if (v.outcome != Outcome::accept) fail("verify", "epoch " + std::to_string(i + 1) + ": " + v.reason);
      ++accepted;
    }
    T << "[verify] " << accepted << "/" << N << " accepted\n";
    Bytes altered = messages[0];
    altered.back() ^= 1;
    VerifyOutcome forged = verify_signature(client, altered, sigs[0]);
    if (forged.outcome != Outcome::reject) fail("verify", "altered message was not rejected");
    T << "[verify] altered message: reject " << forged.reason << "\n";

    // Wire bodies survive encode -> decode -> encode unchanged.
    for (std::uint16_t l = 1; l <= opts.servers; ++l) {
      for (const auto& req : {wire::Request::get(opts.scheme, l, 1), wire::Request::batch(opts.scheme, l, 1, N),
                              wire::Request::status(opts.scheme, l)}) {
        std::string body = wire::encode(req);
        if (wire::encode(wire::decode_request(body)) != body) fail("wire", "request changed in round trip");
        std::string resp = comc::http_post(comc::Address::parse(desc.servers[l - 1].address), body);
        if (wire::encode(wire::decode_response(resp)) != resp) fail("wire", "response changed in round trip");
      }
    }
    T << "[wire] requests and responses round-trip byte-exactly\n";

    // 5. Tamper: restart one server with response corruption.
    const std::uint16_t t = opts.tamper_server;
    servers[t - 1]->stop();
    servers[t - 1] = std::make_unique<ServerProcess>(opts.server_bin, server_args(t, false, opts.fault), log_of(t));
    rebind();
    T << "[tamper] server " << t << " restarted with fault " << opts.fault << "\n";
    vclient::Client fresh(desc, std::make_shared<vclient::HttpTransport>(desc));
    VerifyOutcome v = verify_signature(fresh, messages[0], sigs[0]);
    const std::string expect = "CertFailure{" + std::to_string(t) + ",";
    if (v.outcome != Outcome::reject || !v.reason.starts_with(expect)) {
      fail("tamper", "expected " + expect + "...}, got " + format_outcome(v, false));
    }
    T << "[tamper] epoch 1: reject " << v.reason << "\n";
    std::vector<std::uint64_t> sample{1, (N + 1) / 2, N};
    vclient::AuditReport report = fresh.audit_servers(sample);
    for (const auto& s : report.servers) {
      if (s.ok() == (s.index == t)) fail("audit", "server " + std::to_string(s.index) + " misjudged");
    }
    std::istringstream lines(format_audit(report, false));
    for (std::string line; std::getline(lines, line);) T << "[audit] " << line << "\n";

    T << "[demo] PASS\n";
  } catch (const StageFailure& f) {
    T << "[demo] FAIL stage=" << f.stage << ": " << f.reason << "\n";
    code = 1;
  } catch (const Error& e) {
    T << "[demo] FAIL stage=infrastructure: " << e.tag() << ": " << e.what() << "\n";
    code = 1;
  }
  servers.clear();
  if (cleanup) fs::remove_all(work);
  return code;
}

}  // namespace lrsha::cli
