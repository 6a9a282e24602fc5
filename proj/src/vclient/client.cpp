#include <algorithm>
#include <future>

#include "lrsha/comc.hpp"
#include "lrsha/http.hpp"
#include "lrsha/vclient.hpp"
#include "lrsha/wire.hpp"

namespace lrsha::vclient {

// ---- transports ----

HttpTransport::HttpTransport(const DeploymentDescriptor& d, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  for (const auto& s : d.servers) addresses_.push_back(s.address);
}

std::string HttpTransport::exchange(std::uint16_t server, std::string_view request) {
  if (server < 1 || server > addresses_.size()) {
    throw Error(Errc::server_unreachable, "no address for server", server);
  }
  return comc::http_post(comc::Address::parse(addresses_[server - 1]), request, timeout_);
}

InProcessTransport::InProcessTransport(std::vector<comc::ComcServer*> servers)
    : servers_(std::move(servers)), down_(servers_.size(), 0) {}

void InProcessTransport::set_down(std::uint16_t server, bool down) {
  std::lock_guard lock(mu_);
  down_.at(server - 1) = down;
}

std::string InProcessTransport::exchange(std::uint16_t server, std::string_view request) {
  comc::ComcServer* target = nullptr;
  {
    std::lock_guard lock(mu_);
    if (server >= 1 && server <= servers_.size() && !down_[server - 1]) target = servers_[server - 1];
  }
  if (target == nullptr) throw Error(Errc::server_unreachable, "server is down", server);
  return target->handle(request);
}

TamperingTransport::TamperingTransport(std::shared_ptr<Transport> inner, std::uint16_t server,
                                       Tamper tamper)
    : inner_(std::move(inner)), server_(server), tamper_(std::move(tamper)) {}

std::string TamperingTransport::exchange(std::uint16_t server, std::string_view request) {
  std::string body = inner_->exchange(server, request);
  if (server != server_) return body;
  wire::Request req = wire::decode_request(request);
  wire::Response resp = wire::decode_response(body);
  if (resp.error || resp.status) return body;
  std::uint64_t first = req.op == wire::Op::get ? req.j : req.lo;
  for (std::size_t i = 0; i < resp.bundles.size(); ++i) tamper_(first + i, resp.bundles[i]);
  return wire::encode(resp);
}

// ---- cache ----

AggregateCache::AggregateCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

std::optional<EpochAggregate> AggregateCache::get(std::uint64_t epoch) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(epoch);
  if (it == slots_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  order_.splice(order_.begin(), order_, it->second.pos);
  return it->second.agg;
}

void AggregateCache::put(std::uint64_t epoch, const EpochAggregate& agg) {
  std::lock_guard lock(mu_);
  if (auto it = slots_.find(epoch); it != slots_.end()) {
    it->second.agg = agg;
    order_.splice(order_.begin(), order_, it->second.pos);
    return;
  }
  if (slots_.size() == capacity_) {
    slots_.erase(order_.back());
    order_.pop_back();
    ++evictions_;
  }
  order_.push_front(epoch);
  slots_.emplace(epoch, Slot{agg, order_.begin()});
}

bool AggregateCache::contains(std::uint64_t epoch) const {
  std::lock_guard lock(mu_);
  return slots_.contains(epoch);
}

std::size_t AggregateCache::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

std::uint64_t AggregateCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::uint64_t AggregateCache::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::uint64_t AggregateCache::evictions() const {
  std::lock_guard lock(mu_);
  return evictions_;
}

bool AuditReport::all_pass() const {
  return std::all_of(servers.begin(), servers.end(), [](const ServerAudit& s) { return s.ok(); });
}

// ---- client ----

// One server's verified contributions for [lo, hi].
struct Client::Fetched {
  std::uint64_t lo = 0;
  std::vector<std::optional<EpochAggregate>> parts;
  std::vector<Error> failures;

  Fetched(std::uint64_t first, std::uint64_t last) : lo(first), parts(last - first + 1) {}
};

Client::Client(DeploymentDescriptor d, std::shared_ptr<Transport> transport, ClientOptions opts)
    : desc_(std::move(d)),
      transport_(std::move(transport)),
      opts_(opts),
      cache_(opts.cache_capacity) {
  if (opts_.max_batch == 0) throw Error(Errc::invalid_params, "max_batch must be positive");
  if (desc_.scheme == Scheme::lrsha) {
    pk_ = desc_.public_key();
  } else {
    vk_ = desc_.verifier_key();
  }
}

std::optional<Error> Client::check(std::uint16_t server, std::uint64_t epoch, ByteView bundle,
                                   Fetched& out) {
  try {
    EpochAggregate part;
    Verdict v;
    if (desc_.scheme == Scheme::lrsha) {
      auto b = basic::CommitmentBundle::decode(bundle);
      v = basic::check_bundle(pk_, server, epoch, b);
      part.R = b.R;
    } else {
      auto b = forward::CommitmentBundle::decode(bundle);
      v = forward::check_bundle(vk_, server, epoch, b);
      part.R = b.R;
      part.Y = b.Y;
    }
    if (!v) return Error(Errc::cert_failure, v.reason, server, epoch);
    out.parts[epoch - out.lo] = part;
    return std::nullopt;
  } catch (const Error& e) {
    return Error(Errc::cert_failure, e.what(), server, epoch);
  }
}

std::optional<Error> Client::fetch_one(std::uint16_t server, std::uint64_t epoch, Fetched& out) {
  wire::Response resp;
  try {
    resp = wire::decode_response(
        transport_->exchange(server, wire::encode(wire::Request::get(desc_.scheme, server, epoch))));
  } catch (const Error& e) {
    if (e.code() == Errc::server_unreachable) return Error(Errc::server_unreachable, e.what(), server);
    return Error(Errc::cert_failure, e.what(), server, epoch);
  }
  if (resp.error) {
    Errc code = parse_errc(resp.error->code).value_or(Errc::cert_failure);
    return Error(code, resp.error->message, server, epoch);
  }
  if (resp.bundles.size() != 1) return Error(Errc::cert_failure, "expected one bundle", server, epoch);
  return check(server, epoch, resp.bundles[0], out);
}

Client::Fetched Client::fetch_from(std::uint16_t server, std::uint64_t lo, std::uint64_t hi) {
  Fetched f(lo, hi);
  for (std::uint64_t a = lo; a <= hi;) {
    const std::uint64_t b = std::min(hi, a + (opts_.max_batch - 1));
    std::optional<wire::Response> resp;
    if (b > a) {
      try {
        resp = wire::decode_response(
            transport_->exchange(server, wire::encode(wire::Request::batch(desc_.scheme, server, a, b))));
      } catch (const Error& e) {
        if (e.code() == Errc::server_unreachable) {
          f.failures.emplace_back(Errc::server_unreachable, e.what(), server);
          return f;
        }
      }
    }
    if (resp && !resp->error && resp->bundles.size() == b - a + 1) {
      for (std::uint64_t j = a; j <= b; ++j) {
        if (auto err = check(server, j, resp->bundles[j - a], f)) f.failures.push_back(*err);
      }
    } else {
      // Single epochs, or a batch the server refused: fall back to gets.
      for (std::uint64_t j = a; j <= b; ++j) {
        if (auto err = fetch_one(server, j, f)) {
          f.failures.push_back(*err);
          if (err->code() == Errc::server_unreachable) return f;
        }
      }
    }
    if (b == hi) break;
    a = b + 1;
  }
  return f;
}

PrefetchResult Client::prefetch(std::uint64_t lo, std::uint64_t hi) {
  if (lo < 1 || hi < lo || hi > desc_.max_epoch) {
    throw Error(Errc::epoch_out_of_range, "range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                              "] outside [1, " + std::to_string(desc_.max_epoch) + "]",
                std::nullopt, lo < 1 || lo > desc_.max_epoch ? lo : hi);
  }
  const std::size_t L = desc_.servers.size();
  std::vector<std::future<Fetched>> pending;
  for (std::size_t l = 1; l <= L; ++l) {
    pending.push_back(std::async(std::launch::async, [this, l, lo, hi] {
      return fetch_from(static_cast<std::uint16_t>(l), lo, hi);
    }));
  }
  std::vector<Fetched> per_server;
  for (auto& p : pending) per_server.push_back(p.get());

  PrefetchResult result;
  result.lo = lo;
  result.hi = hi;
  for (auto& f : per_server) {
    for (auto& e : f.failures) result.failures.push_back(std::move(e));
  }
  const Group& g = group_by_id(desc_.group);
  std::vector<GroupElement> Rs(L), Ys(L);
  for (std::uint64_t j = lo; j <= hi; ++j) {
    bool complete = true;
    for (std::size_t l = 0; l < L && complete; ++l) {
      const auto& part = per_server[l].parts[j - lo];
      if (!part) {
        complete = false;
        break;
      }
      Rs[l] = part->R;
      Ys[l] = part->Y;
    }
    if (!complete) continue;
    EpochAggregate agg;
    agg.R = g.product(Rs);
    if (desc_.scheme == Scheme::flrsha) agg.Y = g.product(Ys);
    cache_.put(j, agg);
    ++result.cached;
  }
  return result;
}

Verdict Client::verify_message(ByteView message, const Signature& sig) {
  if (sig.epoch < 1 || sig.epoch > desc_.max_epoch) return Verdict::reject("EpochOutOfRange");
  std::unique_lock<std::mutex> strict;
  if (opts_.strict_increasing) {
    strict = std::unique_lock(last_mu_);
    if (sig.epoch <= last_accepted_) return Verdict::reject("EpochNotIncreasing");
  }
  std::optional<EpochAggregate> agg = cache_.get(sig.epoch);
  while (!agg) {
    PrefetchResult r = prefetch(sig.epoch, sig.epoch);
    if (!r.ok()) return Verdict::reject(r.failures.front().tag());
    // A concurrent burst of inserts may evict the entry before it is read.
    agg = cache_.get(sig.epoch);
  }
  Verdict v = desc_.scheme == Scheme::lrsha
                  ? basic::verify(pk_, message, sig, agg->R)
                  : forward::verify(vk_, message, sig, forward::Aggregate{agg->Y, agg->R});
  if (v && opts_.strict_increasing) last_accepted_ = sig.epoch;
  return v;
}

Verdict Client::verify_message(ByteView message, ByteView signature_bytes) {
  Signature sig;
  try {
    sig = Signature::decode(signature_bytes);
  } catch (const Error&) {
    return Verdict::reject("DecodeError");
  }
  return verify_message(message, sig);
}

AuditReport Client::audit_servers(std::span<const std::uint64_t> epochs) {
  AuditReport report;
  if (epochs.empty()) return report;
  std::vector<std::uint64_t> sample(epochs.begin(), epochs.end());
  std::sort(sample.begin(), sample.end());
  sample.erase(std::unique(sample.begin(), sample.end()), sample.end());

  std::vector<std::future<ServerAudit>> pending;
  for (const auto& s : desc_.servers) {
    pending.push_back(std::async(std::launch::async, [this, &sample, index = s.index] {
      ServerAudit a;
      a.index = index;
      bool reachable = true;
      for (std::uint64_t j : sample) {
        ++a.checked;
        std::optional<Error> err;
        if (!reachable) {
          err = Error(Errc::server_unreachable, "unreachable", index);
        } else if (j < 1 || j > desc_.max_epoch) {
          err = Error(Errc::epoch_out_of_range, "epoch outside deployment", index, j);
        } else {
          Fetched f(j, j);
          err = fetch_one(index, j, f);
          if (err && err->code() == Errc::server_unreachable) reachable = false;
        }
        if (!err) {
          ++a.passed;
        } else if (!a.first_failure) {
          a.first_failure = j;
          a.reason = err->tag();
        }
      }
      return a;
    }));
  }
  for (auto& p : pending) report.servers.push_back(p.get());
  return report;
}

}  // namespace lrsha::vclient
