#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lrsha/basic.hpp"
#include "lrsha/error.hpp"
#include "lrsha/forward.hpp"
#include "lrsha/signature.hpp"

namespace lrsha::comc {
class ComcServer;
}

// Verifier side: fetches and certificate-checks commitment bundles from all
// L servers ahead of time, keeps per-epoch aggregates, and verifies
// signatures against them.
namespace lrsha::vclient {

// What a verifier needs to know about a deployment. Stored as canonical JSON:
//
//   {
//     "group": "ristretto255",
//     "max_epoch": 32,
//     "scheme": "lrsha",
//     "servers": [{"address": "127.0.0.1:7001", "cert_key": "<hex>", "index": 1}, ...],
//     "signer_public_key": "<hex>",
//     "v": 1
//   }
//
// Forward-secure deployments carry "root" per server instead of "cert_key"
// and no signer key.
struct DeploymentDescriptor {
  static constexpr int kVersion = 1;

  struct Server {
    std::uint16_t index = 0;
    std::string address;
    Bytes32 key{};  // certification public key, or forward-secure root

    friend bool operator==(const Server&, const Server&) = default;
  };

  Scheme scheme = Scheme::lrsha;
  GroupId group = GroupId::ristretto255;
  std::uint64_t max_epoch = 0;
  std::vector<Server> servers;
  std::optional<GroupElement> signer_key;  // lrsha only

  static DeploymentDescriptor for_keys(const basic::PublicKey& pk,
                                       const std::vector<std::string>& addresses);
  static DeploymentDescriptor for_keys(const forward::VerifierKey& vk,
                                       const std::vector<std::string>& addresses);

  SchemeParams params() const;
  basic::PublicKey public_key() const;
  forward::VerifierKey verifier_key() const;

  std::string to_json() const;
  // Throws Errc::decode_error; checks list lengths, indices, addresses and keys.
  static DeploymentDescriptor from_json(std::string_view text);

  friend bool operator==(const DeploymentDescriptor&, const DeploymentDescriptor&) = default;
};

// Moves one wire request to server `server` and returns the response body.
// Throws Errc::server_unreachable when the server cannot be reached.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string exchange(std::uint16_t server, std::string_view request) = 0;
};

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(const DeploymentDescriptor& d,
                         std::chrono::milliseconds timeout = std::chrono::seconds(10));
  std::string exchange(std::uint16_t server, std::string_view request) override;

 private:
  std::vector<std::string> addresses_;
  std::chrono::milliseconds timeout_;
};

// Calls servers in the same process; a null entry or a downed server is unreachable.
class InProcessTransport final : public Transport {
 public:
  explicit InProcessTransport(std::vector<comc::ComcServer*> servers);
  std::string exchange(std::uint16_t server, std::string_view request) override;
  void set_down(std::uint16_t server, bool down);

 private:
  std::vector<comc::ComcServer*> servers_;
  std::vector<char> down_;
  std::mutex mu_;
};

// Rewrites the bundles one server returns, as an on-path attacker would.
class TamperingTransport final : public Transport {
 public:
  using Tamper = std::function<void(std::uint64_t epoch, Bytes& bundle)>;
  TamperingTransport(std::shared_ptr<Transport> inner, std::uint16_t server, Tamper tamper);
  std::string exchange(std::uint16_t server, std::string_view request) override;

 private:
  std::shared_ptr<Transport> inner_;
  std::uint16_t server_;
  Tamper tamper_;
};

struct EpochAggregate {
  GroupElement R;
  GroupElement Y;  // forward-secure only

  friend bool operator==(const EpochAggregate&, const EpochAggregate&) = default;
};

// LRU map epoch -> aggregate. Thread-safe.
class AggregateCache {
 public:
  explicit AggregateCache(std::size_t capacity);

  std::optional<EpochAggregate> get(std::uint64_t epoch);
  void put(std::uint64_t epoch, const EpochAggregate& agg);
  bool contains(std::uint64_t epoch) const;
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t hits() const;
  std::uint64_t misses() const;
  std::uint64_t evictions() const;

 private:
  using Order = std::list<std::uint64_t>;
  struct Slot {
    EpochAggregate agg;
    Order::iterator pos;
  };

  std::size_t capacity_;
  mutable std::mutex mu_;
  Order order_;  // most recent first
  std::unordered_map<std::uint64_t, Slot> slots_;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::uint64_t evictions_ = 0;
};

struct PrefetchResult {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint64_t cached = 0;     // epochs in [lo, hi] whose aggregate is now cached
  std::vector<Error> failures;  // ServerUnreachable{l}, CertFailure{l,j}, ...

  bool ok() const { return failures.empty(); }
};

struct ServerAudit {
  std::uint16_t index = 0;
  std::uint64_t checked = 0;
  std::uint64_t passed = 0;
  std::optional<std::uint64_t> first_failure;
  std::string reason;  // of the first failure

  bool ok() const { return checked == passed; }
};

struct AuditReport {
  std::vector<ServerAudit> servers;  // empty when no epochs were sampled

  bool all_pass() const;
};

struct ClientOptions {
  std::size_t cache_capacity = 4096;
  std::uint64_t max_batch = 1024;
  // Reject any signature whose epoch is not above the last accepted one.
  bool strict_increasing = false;
};

class Client {
 public:
  Client(DeploymentDescriptor d, std::shared_ptr<Transport> transport, ClientOptions opts = {});

  // Offline phase. Throws Errc::epoch_out_of_range for a range outside
  // [1, J]; every other problem is reported per server in the result, and
  // epochs untouched by a failure are still cached.
  PrefetchResult prefetch(std::uint64_t lo, std::uint64_t hi);

  // Online phase; fetches on a cache miss. Reject reasons: BadSignatureEq,
  // CertFailure{l,j}, ServerUnreachable{l}, EpochOutOfRange, DecodeError,
  // EpochNotIncreasing.
  Verdict verify_message(ByteView message, const Signature& sig);
  Verdict verify_message(ByteView message, ByteView signature_bytes);

  AuditReport audit_servers(std::span<const std::uint64_t> epochs);

  const DeploymentDescriptor& descriptor() const { return desc_; }
  AggregateCache& cache() { return cache_; }

 private:
  struct Fetched;

  Fetched fetch_from(std::uint16_t server, std::uint64_t lo, std::uint64_t hi);
  std::optional<Error> fetch_one(std::uint16_t server, std::uint64_t epoch, Fetched& out);
  std::optional<Error> check(std::uint16_t server, std::uint64_t epoch, ByteView bundle,
                             Fetched& out);

  DeploymentDescriptor desc_;
  std::shared_ptr<Transport> transport_;
  ClientOptions opts_;
  basic::PublicKey pk_;
  forward::VerifierKey vk_;
  AggregateCache cache_;
  std::mutex last_mu_;
  std::uint64_t last_accepted_ = 0;
};

}  // namespace lrsha::vclient
