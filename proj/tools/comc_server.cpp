// comc-server: one commitment-construction server behind HTTP.
//
// Prints "LISTENING <port>" on stdout once bound; logs go to stderr.
// Every flag can also be set through an LRSHA_* environment variable.

#include <pthread.h>
#include <signal.h>

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "lrsha/comc.hpp"
#include "lrsha/error.hpp"
#include "lrsha/fileio.hpp"
#include "lrsha/http.hpp"

namespace {

using namespace lrsha;

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(Errc::invalid_params, "expected lo:hi, got " + text);
  try {
    return {std::stoull(text.substr(0, colon)), std::stoull(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(Errc::invalid_params, "expected lo:hi, got " + text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commitment-construction server"};
  std::string scheme = "lrsha";
  std::uint16_t index = 1;
  std::string listen = "127.0.0.1:0";
  std::string keystore;
  std::string provision;
  std::string seal_key;
  std::string precompute;
  std::uint64_t budget = std::uint64_t{256} << 20;
  std::uint64_t max_batch = 1024;
  std::uint64_t stride = 64;
  std::string cache;
  std::string fault = "none";
  bool serial = false;

  app.add_option("--scheme", scheme, "lrsha or flrsha")->envname("LRSHA_SCHEME")->capture_default_str();
  app.add_option("--index", index, "Server index, 1-based")->envname("LRSHA_INDEX")->capture_default_str();
  app.add_option("--listen", listen, "host:port; port 0 picks one")->envname("LRSHA_LISTEN")->capture_default_str();
  app.add_option("--keystore", keystore, "Sealed keystore file (default: in-memory)")->envname("LRSHA_KEYSTORE");
  app.add_option("--provision", provision, "Server secret blob to seal on startup")->envname("LRSHA_PROVISION");
  app.add_option("--seal-key", seal_key, "Hex seal key for the keystore")->envname("LRSHA_SEAL_KEY");
  app.add_option("--precompute", precompute, "Cache epochs lo:hi at startup")->envname("LRSHA_PRECOMPUTE");
  app.add_option("--budget", budget, "Cache budget in bytes")->envname("LRSHA_BUDGET")->capture_default_str();
  app.add_option("--max-batch", max_batch, "Largest batch served")->envname("LRSHA_MAX_BATCH")->capture_default_str();
  app.add_option("--stride", stride, "Chain table stride")->envname("LRSHA_STRIDE")->capture_default_str();
  app.add_option("--cache", cache, "Cache file for precomputed and issued bundles")->envname("LRSHA_CACHE");
  app.add_option("--fault", fault, "Fault injection: none | flip:<off>[@<j>] | random-r[@<j>]")
      ->envname("LRSHA_FAULT")
      ->capture_default_str();
  app.add_flag("--serial", serial, "Use the serial kernels")->envname("LRSHA_SERIAL");
  CLI11_PARSE(app, argc, argv);

  // Termination signals are taken synchronously by main; every other thread
  // inherits the blocked mask.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGTERM);
  sigaddset(&stop_signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  ::signal(SIGPIPE, SIG_IGN);

  try {
    init_crypto();
    comc::ServerConfig cfg;
    cfg.scheme = parse_scheme(scheme);
    cfg.index = index;
    cfg.max_batch = max_batch;
    cfg.table_stride = stride;
    cfg.exec = serial ? kernels::Exec::serial : kernels::Exec::parallel;
    if (!cache.empty()) cfg.cache_file = cache;

    std::unique_ptr<comc::SealedKeystore> ks;
    if (keystore.empty()) {
      ks = comc::make_memory_keystore();
    } else {
      std::optional<std::string> hex;
      if (!seal_key.empty()) hex = seal_key;
      ks = comc::open_file_keystore(keystore, comc::resolve_seal_key(keystore, hex));
    }

    auto sink = [](std::string_view line) { std::cerr << line << std::endl; };
    comc::ComcServer server(cfg, std::move(ks), sink);
    if (!provision.empty()) {
      Bytes blob = read_file(provision);
      server.provision(blob);
      wipe(blob);
    }
    if (!server.ready()) throw Error(Errc::not_provisioned, "no secret: pass --provision or a provisioned --keystore");
    if (!precompute.empty()) {
      auto [lo, hi] = parse_range(precompute);
      server.precompute(lo, hi, budget);
    }
    server.set_fault(comc::Fault::parse(fault));

    comc::Address addr = comc::Address::parse(listen);
    comc::HttpServer http(server);
    const int port = http.bind(addr.host, addr.port);
    std::thread loop([&] { http.run(); });
    std::cout << "LISTENING " << port << std::endl;

    int sig = 0;
    sigwait(&stop_signals, &sig);
    http.stop();
    loop.join();
    std::cerr << "stopping on signal " << sig << std::endl;
  } catch (const Error& e) {
    std::cerr << "comc-server: " << e.tag() << ": " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "comc-server: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
