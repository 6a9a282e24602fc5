#include "lrsha/comc.hpp"

#include <charconv>

#include "lrsha/error.hpp"
#include "lrsha/fileio.hpp"

namespace lrsha::comc {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kCacheMagic = "LRCC";
constexpr std::uint8_t kCacheVersion = 1;
constexpr std::uint8_t kPrecomputed = 1;
constexpr std::uint8_t kIssued = 2;

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(Errc::invalid_params, "bad " + std::string(what) + ": " + std::string(s));
  }
  return v;
}

Bytes record(std::uint8_t kind, std::uint64_t epoch, const Bytes& bundle) {
  return Writer(13 + bundle.size())
      .u8(kind)
      .u64(epoch)
      .u32(static_cast<std::uint32_t>(bundle.size()))
      .raw(bundle)
      .take();
}

}  // namespace

Fault Fault::parse(std::string_view text) {
  Fault f;
  if (text.empty() || text == "none") return f;
  std::string_view body = text;
  if (auto at = text.find('@'); at != std::string_view::npos) {
    f.epoch = parse_u64(text.substr(at + 1), "fault epoch");
    body = text.substr(0, at);
  }
  if (body == "random-r") {
    f.kind = Kind::random_commitment;
  } else if (body.starts_with("flip:")) {
    f.kind = Kind::flip_byte;
    f.offset = parse_u64(body.substr(5), "fault offset");
  } else {
    throw Error(Errc::invalid_params, "unknown fault: " + std::string(text));
  }
  return f;
}

struct ComcServer::Loaded {
  SchemeParams params;
  std::optional<basic::ServerSecret> plain;
  std::optional<forward::ServerSecret> fwd;
};

ComcServer::ComcServer(ServerConfig cfg, std::unique_ptr<SealedKeystore> keystore, LogSink sink)
    : cfg_(std::move(cfg)), keystore_(std::move(keystore)), log_(std::move(sink)) {
  if (keystore_->provisioned()) {
    SecretBytes blob = keystore_->unseal();
    load_secret(blob.view());
    load_cache();
    log("restored sealed secret from " + std::string(keystore_->backend()) + " keystore");
  }
}

ComcServer::~ComcServer() = default;

void ComcServer::log(const std::string& line) const {
  if (log_) log_("server " + std::to_string(cfg_.index) + ": " + line);
}

void ComcServer::load_secret(ByteView blob) {
  auto l = std::make_unique<Loaded>();
  if (cfg_.scheme == Scheme::lrsha) {
    l->plain = basic::ServerSecret::decode(blob);
    l->params = l->plain->params;
    if (l->plain->index != cfg_.index) {
      throw Error(Errc::malformed_secret, "secret belongs to server " +
                                              std::to_string(l->plain->index));
    }
  } else {
    l->fwd = forward::ServerSecret::decode(blob);
    l->params = l->fwd->params;
    if (l->fwd->index != cfg_.index) {
      throw Error(Errc::malformed_secret, "secret belongs to server " +
                                              std::to_string(l->fwd->index));
    }
    l->fwd->build_tables(cfg_.table_stride);
  }
  loaded_ = std::move(l);
}

void ComcServer::provision(ByteView secret_blob) {
  if (keystore_->provisioned()) {
    throw Error(Errc::already_provisioned, "keystore already provisioned; reset it first",
                cfg_.index);
  }
  load_secret(secret_blob);
  keystore_->provision(secret_blob);
  log("provisioned");
}

bool ComcServer::ready() const { return loaded_ != nullptr; }

std::optional<SchemeParams> ComcServer::params() const {
  if (!loaded_) return std::nullopt;
  return loaded_->params;
}

void ComcServer::require_ready() const {
  if (!loaded_) throw Error(Errc::not_provisioned, "server has no secret", cfg_.index);
}

void ComcServer::check_range(std::uint64_t lo, std::uint64_t hi) const {
  const std::uint64_t J = loaded_->params.max_signatures;
  if (lo < 1 || lo > J) {
    throw Error(Errc::epoch_out_of_range, "epoch " + std::to_string(lo) + " outside [1, " +
                                              std::to_string(J) + "]",
                cfg_.index, lo);
  }
  if (hi < lo || hi > J) {
    throw Error(Errc::epoch_out_of_range, "bad range [" + std::to_string(lo) + ", " +
                                              std::to_string(hi) + "]",
                cfg_.index, hi);
  }
}

std::size_t ComcServer::bundle_size() const {
  require_ready();
  if (cfg_.scheme == Scheme::lrsha) return 42 + certificate_size(CertTag::plain, 1);
  return 74 + certificate_size(CertTag::forward_secure, loaded_->params.max_signatures);
}

std::optional<Bytes> ComcServer::cached(std::uint64_t j) const {
  std::shared_lock lock(cache_mu_);
  if (auto it = cache_.find(j); it != cache_.end()) return it->second;
  if (auto it = issued_.find(j); it != issued_.end()) return it->second;
  return std::nullopt;
}

Bytes ComcServer::derive(std::uint64_t j) {
  if (cfg_.scheme == Scheme::lrsha) return basic::server_commit(*loaded_->plain, j).encode();
  return issue_live(j);
}

Bytes ComcServer::issue_live(std::uint64_t j) {
  std::lock_guard lock(fs_mu_);
  if (auto hit = cached(j)) return *hit;
  forward::ServerSecret& secret = *loaded_->fwd;
  if (j < secret.cert_state.current_epoch()) {
    throw Error(Errc::epoch_expired,
                "certification key for epoch " + std::to_string(j) + " was erased", cfg_.index, j);
  }
  Bytes bundle = forward::server_commit(secret, j).encode();
  {
    std::unique_lock w(cache_mu_);
    issued_[j] = bundle;
  }
  if (cfg_.cache_file) {
    if (fs::exists(*cfg_.cache_file)) {
      append_file(*cfg_.cache_file, record(kIssued, j, bundle));
    } else {
      save_cache();
    }
  }
  // TODO: keep the public Merkle leaves outside the sealed blob so this reseal
  // does not rewrite 32*J bytes per live epoch.
  Bytes blob = secret.encode();
  keystore_->reseal(blob);
  wipe(blob);
  log("certified epoch " + std::to_string(j) + " on the live path");
  return bundle;
}

Bytes ComcServer::apply_fault(std::uint64_t j, Bytes bundle) const {
  Fault f;
  {
    std::lock_guard lock(fault_mu_);
    f = fault_;
  }
  if (!f.applies(j)) return bundle;
  if (f.kind == Fault::Kind::flip_byte) {
    bundle[f.offset % bundle.size()] ^= 0x01;
  } else {
    const Group& g = loaded_->params.group();
    GroupElement fake = g.exp_base(g.random_scalar(system_rng()));
    std::size_t at = cfg_.scheme == Scheme::lrsha ? 10 : 42;
    std::copy(fake.bytes.begin(), fake.bytes.end(), bundle.begin() + static_cast<long>(at));
  }
  return bundle;
}

Bytes ComcServer::serve_commitment(std::uint64_t j) {
  require_ready();
  check_range(j, j);
  if (auto hit = cached(j)) {
    ++hits_;
    return apply_fault(j, std::move(*hit));
  }
  ++misses_;
  return apply_fault(j, derive(j));
}

std::vector<Bytes> ComcServer::serve_batch(std::uint64_t lo, std::uint64_t hi) {
  require_ready();
  check_range(lo, hi);
  if (hi - lo + 1 > cfg_.max_batch) {
    throw Error(Errc::range_too_large,
                std::to_string(hi - lo + 1) + " epochs exceed the batch limit of " +
                    std::to_string(cfg_.max_batch),
                cfg_.index);
  }
  std::vector<Bytes> out;
  out.reserve(hi - lo + 1);
  if (cfg_.scheme == Scheme::lrsha) {
    auto served = kernels::map_epochs(
        lo, hi,
        [&](std::uint64_t j) -> std::pair<bool, Bytes> {
          if (auto hit = cached(j)) return {true, std::move(*hit)};
          return {false, basic::server_commit(*loaded_->plain, j).encode()};
        },
        cfg_.exec);
    for (std::uint64_t j = lo; j <= hi; ++j) {
      auto& [hit, bundle] = served[j - lo];
      ++(hit ? hits_ : misses_);
      out.push_back(apply_fault(j, std::move(bundle)));
    }
    return out;
  }
  for (std::uint64_t j = lo; j <= hi; ++j) out.push_back(serve_commitment(j));
  return out;
}

CacheStats ComcServer::precompute(std::uint64_t lo, std::uint64_t hi, std::uint64_t budget_bytes) {
  require_ready();
  check_range(lo, hi);
  const std::uint64_t need = (hi - lo + 1) * bundle_size();
  if (need > budget_bytes) {
    throw Error(Errc::budget_exceeded,
                "range needs " + std::to_string(need) + " bytes, budget is " +
                    std::to_string(budget_bytes),
                cfg_.index);
  }
  std::map<std::uint64_t, Bytes> fresh;
  if (cfg_.scheme == Scheme::lrsha) {
    auto bundles = kernels::map_epochs(
        lo, hi, [&](std::uint64_t j) { return basic::server_commit(*loaded_->plain, j).encode(); },
        cfg_.exec);
    for (std::uint64_t j = lo; j <= hi; ++j) fresh.emplace(j, std::move(bundles[j - lo]));
  } else {
    std::lock_guard lock(fs_mu_);
    forward::ServerSecret& secret = *loaded_->fwd;
    const Group& g = loaded_->params.group();
    // Commitments are order-free; certificates must be issued in epoch order.
    auto ys = kernels::chain_commitments(g, *secret.y_table, lo, hi, cfg_.exec);
    auto rs = kernels::chain_commitments(g, *secret.r_table, lo, hi, cfg_.exec);
    for (std::uint64_t j = lo; j <= hi; ++j) {
      if (auto hit = cached(j)) {
        fresh.emplace(j, std::move(*hit));
        continue;
      }
      if (j < secret.cert_state.current_epoch()) {
        throw Error(Errc::epoch_expired,
                    "certification key for epoch " + std::to_string(j) + " was erased",
                    cfg_.index, j);
      }
      forward::CommitmentBundle b;
      b.server = cfg_.index;
      b.epoch = j;
      b.Y = ys[j - lo];
      b.R = rs[j - lo];
      b.cert = secret.cert_state.sign(j, forward::commitment_message(b.server, j, b.Y, b.R));
      fresh.emplace(j, b.encode());
    }
  }
  {
    std::unique_lock w(cache_mu_);
    if (cfg_.scheme == Scheme::flrsha) {
      // Issued certificates cannot be re-derived, so they outlive the range.
      for (auto& [j, b] : cache_) {
        if (!fresh.contains(j)) issued_.emplace(j, std::move(b));
      }
    }
    cache_ = std::move(fresh);
    cache_lo_ = lo;
    cache_hi_ = hi;
    cache_bytes_ = need;
    budget_ = budget_bytes;
  }
  if (cfg_.cache_file) save_cache();
  if (cfg_.scheme == Scheme::flrsha) {
    std::lock_guard lock(fs_mu_);
    Bytes blob = loaded_->fwd->encode();
    keystore_->reseal(blob);
    wipe(blob);
  }
  log("precomputed epochs " + std::to_string(lo) + ".." + std::to_string(hi));
  return cache_stats();
}

CacheStats ComcServer::cache_stats() const {
  std::shared_lock lock(cache_mu_);
  return {cache_lo_, cache_hi_, cache_.size(), cache_bytes_, budget_, hits_.load(), misses_.load()};
}

void ComcServer::set_fault(Fault f) {
  std::lock_guard lock(fault_mu_);
  fault_ = f;
}

void ComcServer::save_cache() const {
  if (!cfg_.cache_file) return;
  Writer w;
  w.raw(as_bytes(kCacheMagic)).u8(kCacheVersion).u8(static_cast<std::uint8_t>(cfg_.scheme));
  w.u16(cfg_.index);
  std::shared_lock lock(cache_mu_);
  w.u64(budget_).u64(cache_lo_).u64(cache_hi_);
  for (const auto& [j, b] : cache_) w.raw(record(kPrecomputed, j, b));
  for (const auto& [j, b] : issued_) w.raw(record(kIssued, j, b));
  atomic_write_file(*cfg_.cache_file, w.bytes());
}

void ComcServer::load_cache() {
  if (!cfg_.cache_file || !fs::exists(*cfg_.cache_file)) return;
  Bytes raw = read_file(*cfg_.cache_file);
  Reader r(raw);
  auto magic = r.raw(4);
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != kCacheMagic ||
      r.u8() != kCacheVersion || r.u8() != static_cast<std::uint8_t>(cfg_.scheme) ||
      r.u16() != cfg_.index) {
    throw Error(Errc::decode_error, "cache file does not belong to this server", cfg_.index);
  }
  std::unique_lock lock(cache_mu_);
  budget_ = r.u64();
  cache_lo_ = r.u64();
  cache_hi_ = r.u64();
  cache_bytes_ = 0;
  // A torn trailing record (crash during append) is dropped.
  while (r.remaining() >= 13) {
    auto kind = r.u8();
    auto epoch = r.u64();
    auto len = r.u32();
    if (r.remaining() < len) break;
    auto view = r.raw(len);
    Bytes b(view.begin(), view.end());
    if (kind == kPrecomputed) {
      cache_bytes_ += b.size();
      cache_[epoch] = std::move(b);
    } else if (kind == kIssued) {
      issued_[epoch] = std::move(b);
    } else {
      throw Error(Errc::decode_error, "unknown cache record kind", cfg_.index);
    }
  }
  log("loaded " + std::to_string(cache_.size() + issued_.size()) + " cached bundles");
}

wire::ServerStatus ComcServer::status() const {
  wire::ServerStatus s;
  s.ready = ready();
  s.scheme = std::string(to_string(cfg_.scheme));
  s.server = cfg_.index;
  s.keystore = std::string(keystore_->backend());
  s.max_batch = cfg_.max_batch;
  if (loaded_) {
    s.group = std::string(to_string(loaded_->params.group_id));
    s.max_epoch = loaded_->params.max_signatures;
    s.servers = loaded_->params.servers;
    if (loaded_->fwd) s.next_live_epoch = loaded_->fwd->cert_state.current_epoch();
  }
  CacheStats c = cache_stats();
  s.cache_lo = c.lo;
  s.cache_hi = c.hi;
  s.cache_bundles = c.bundles;
  s.cache_bytes = c.bytes;
  s.cache_budget = c.budget;
  s.cache_hits = c.hits;
  s.cache_misses = c.misses;
  return s;
}

std::string ComcServer::handle(std::string_view request_body) {
  wire::Response resp;
  try {
    wire::Request req = wire::decode_request(request_body);
    if (req.scheme != cfg_.scheme || req.server != cfg_.index) {
      throw Error(Errc::invalid_params,
                  "this is " + std::string(to_string(cfg_.scheme)) + " server " +
                      std::to_string(cfg_.index),
                  cfg_.index);
    }
    switch (req.op) {
      case wire::Op::get:
        resp.bundles.push_back(serve_commitment(req.j));
        log("get j=" + std::to_string(req.j));
        break;
      case wire::Op::batch:
        resp.bundles = serve_batch(req.lo, req.hi);
        log("batch " + std::to_string(req.lo) + ".." + std::to_string(req.hi));
        break;
      case wire::Op::status: resp.status = status(); break;
    }
  } catch (const Error& e) {
    resp = {};
    resp.error = wire::ErrorBody{std::string(to_string(e.code())), e.what(), e.server(), e.epoch()};
    log("error " + e.tag());
  } catch (const std::exception& e) {
    resp = {};
    resp.error = wire::ErrorBody{"Internal", e.what(), cfg_.index, std::nullopt};
    log(std::string("internal error: ") + e.what());
  }
  return wire::encode(resp);
}

}  // namespace lrsha::comc
