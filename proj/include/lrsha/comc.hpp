#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "lrsha/basic.hpp"
#include "lrsha/forward.hpp"
#include "lrsha/keystore.hpp"
#include "lrsha/wire.hpp"

// The commitment-construction server: owns a sealed secret and serves
// certified commitment bundles for single epochs or ranges, optionally from a
// precomputed cache.
namespace lrsha::comc {

// Response-level fault injection, used to exercise detection end to end.
struct Fault {
  enum class Kind { none, flip_byte, random_commitment };
  Kind kind = Kind::none;
  std::optional<std::uint64_t> epoch;  // every epoch when unset
  std::size_t offset = 12;             // byte flipped by flip_byte

  // "none" | "flip:<offset>[@<epoch>]" | "random-r[@<epoch>]"
  static Fault parse(std::string_view text);
  bool applies(std::uint64_t j) const { return kind != Kind::none && (!epoch || *epoch == j); }
};

struct ServerConfig {
  Scheme scheme = Scheme::lrsha;
  std::uint16_t index = 1;
  std::uint64_t max_batch = 1024;
  std::uint64_t table_stride = 64;
  kernels::Exec exec = kernels::Exec::parallel;
  // Precomputed and issued bundles persist here when set.
  std::optional<std::filesystem::path> cache_file;
};

struct CacheStats {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t bundles = 0;
  std::uint64_t bytes = 0;
  std::uint64_t budget = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
};

using LogSink = std::function<void(std::string_view)>;

class ComcServer {
 public:
  // Picks up an already-provisioned keystore and the cache file, if any.
  ComcServer(ServerConfig cfg, std::unique_ptr<SealedKeystore> keystore, LogSink sink = {});
  ~ComcServer();
  ComcServer(const ComcServer&) = delete;
  ComcServer& operator=(const ComcServer&) = delete;

  // Errors: already_provisioned, malformed_secret (wrong scheme, wrong index, bad blob).
  void provision(ByteView secret_blob);
  bool ready() const;
  const ServerConfig& config() const { return cfg_; }
  std::optional<SchemeParams> params() const;

  // Encoded bundle for epoch j. Repeated requests return identical bytes.
  // Errors: not_provisioned, epoch_out_of_range, epoch_expired (forward-secure
  // live path, epoch already passed and never issued).
  Bytes serve_commitment(std::uint64_t j);
  // Errors: as above plus range_too_large.
  std::vector<Bytes> serve_batch(std::uint64_t lo, std::uint64_t hi);
  // Replaces the cache with [lo, hi]. Errors: not_provisioned,
  // epoch_out_of_range, budget_exceeded (nothing is cached in that case).
  CacheStats precompute(std::uint64_t lo, std::uint64_t hi, std::uint64_t budget_bytes);
  CacheStats cache_stats() const;
  std::size_t bundle_size() const;

  wire::ServerStatus status() const;
  // Full request/response cycle on wire bodies; never throws.
  std::string handle(std::string_view request_body);

  void set_fault(Fault f);
  // Rewrites the cache file from memory.
  void save_cache() const;

 private:
  struct Loaded;

  void require_ready() const;
  void check_range(std::uint64_t lo, std::uint64_t hi) const;
  void load_secret(ByteView blob);
  void load_cache();
  std::optional<Bytes> cached(std::uint64_t j) const;
  Bytes derive(std::uint64_t j);
  Bytes issue_live(std::uint64_t j);
  Bytes apply_fault(std::uint64_t j, Bytes bundle) const;
  void log(const std::string& line) const;

  ServerConfig cfg_;
  std::unique_ptr<SealedKeystore> keystore_;
  LogSink log_;
  std::unique_ptr<Loaded> loaded_;

  mutable std::shared_mutex cache_mu_;
  std::map<std::uint64_t, Bytes> cache_;   // precomputed range
  std::map<std::uint64_t, Bytes> issued_;  // forward-secure live path
  std::uint64_t cache_lo_ = 0;
  std::uint64_t cache_hi_ = 0;
  std::uint64_t cache_bytes_ = 0;
  std::uint64_t budget_ = 0;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};

  std::mutex fs_mu_;  // forward-secure certification is single-writer
  mutable std::mutex fault_mu_;
  Fault fault_;
};

}  // namespace lrsha::comc
