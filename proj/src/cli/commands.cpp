#include <cstdlib>

#include <json.hpp>

#include "lrsha/cli.hpp"
#include "lrsha/error.hpp"
#include "lrsha/fileio.hpp"
#include "lrsha/keystore.hpp"

namespace lrsha::cli {
namespace fs = std::filesystem;
namespace {

constexpr fs::perms kOwnerOnly = fs::perms::owner_all;

// Seal key for files that must already exist: never generates one.
Bytes existing_seal_key(const fs::path& file, const std::optional<std::string>& hex) {
  if (!fs::exists(file)) throw Error(Errc::io_error, "no such file: " + file.string());
  fs::path key_file = file;
  key_file += ".key";
  const char* env = std::getenv("LRSHA_SEAL_KEY");
  if (!hex && (env == nullptr || *env == '\0') && !fs::exists(key_file)) {
    throw Error(Errc::invalid_params, "no seal key for " + file.string() +
                                          " (use --seal-key, LRSHA_SEAL_KEY or " + key_file.string() + ")");
  }
  return comc::resolve_seal_key(file, hex);
}

}  // namespace

std::string server_secret_name(std::uint16_t index) {
  return "server-" + std::to_string(index) + ".secret";
}

CeremonyFiles ceremony(const CeremonyOptions& opts) {
  if (fs::exists(opts.out) && !fs::is_empty(opts.out)) {
    throw Error(Errc::dir_not_empty, "output directory is not empty: " + opts.out.string());
  }
  SchemeParams p{opts.scheme, opts.group, opts.max_epoch, opts.servers};
  p.validate();
  std::vector<std::string> addresses = opts.addresses;
  if (addresses.empty()) {
    for (std::uint32_t l = 1; l <= opts.servers; ++l) {
      addresses.push_back("127.0.0.1:" + std::to_string(7000 + l));
    }
  }
  if (addresses.size() != opts.servers) {
    throw Error(Errc::invalid_params, "need exactly one address per server");
  }

  fs::create_directories(opts.out);
  fs::permissions(opts.out, kOwnerOnly);

  std::optional<SeededRng> seeded;
  if (opts.seed) seeded.emplace(*opts.seed);
  Rng& rng = seeded ? static_cast<Rng&>(*seeded) : static_cast<Rng&>(system_rng());

  CeremonyFiles files;
  files.signer_key = opts.out / kSignerKeyName;
  files.descriptor = opts.out / kDescriptorName;
  const Bytes seal = comc::resolve_seal_key(files.signer_key, opts.seal_key);

  std::vector<Bytes> blobs;
  vclient::DeploymentDescriptor desc;
  if (opts.scheme == Scheme::lrsha) {
    basic::KeySet ks = basic::keygen(p, rng);
    create_key_file(files.signer_key, seal, SignerKeyFile::from(ks.signer, opts.servers));
    for (const auto& s : ks.servers) blobs.push_back(s.encode());
    desc = vclient::DeploymentDescriptor::for_keys(ks.public_key, addresses);
  } else {
    forward::KeySet ks = forward::keygen(p, rng);
    create_key_file(files.signer_key, seal, SignerKeyFile::from(ks.signer, opts.servers));
    for (const auto& s : ks.servers) blobs.push_back(s.encode());
    desc = vclient::DeploymentDescriptor::for_keys(ks.verifier_key, addresses);
  }
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    fs::path path = opts.out / server_secret_name(static_cast<std::uint16_t>(i + 1));
    atomic_write_file(path, blobs[i]);
    wipe(blobs[i]);
    files.server_secrets.push_back(path);
  }
  std::string json = desc.to_json();
  atomic_write_file(files.descriptor, as_bytes(json),
                    fs::perms::owner_read | fs::perms::owner_write | fs::perms::group_read |
                        fs::perms::others_read);
  return files;
}

SignResult sign_message(const SignOptions& opts, ByteView message) {
  const Bytes seal = existing_seal_key(opts.key, opts.seal_key);
  SignerKeyFile key = load_key_file(opts.key, seal);
  if (key.remaining() == 0) {
    throw Error(Errc::state_exhausted, "all " + std::to_string(key.max_epoch()) + " epochs are used");
  }

  SignResult result;
  std::optional<PrecomputeStore> store;
  std::optional<PrecomputeStore::Entry> entry;
  if (opts.precomputed && fs::exists(*opts.precomputed)) {
    store = load_store(*opts.precomputed, seal);
    if (store->scheme != key.scheme || store->group != key.group || store->servers != key.servers) {
      throw Error(Errc::corrupt_key_file, "precompute store belongs to a different key");
    }
    entry = store->take(key.epoch());
  }

  if (key.plain) {
    result.signature = entry ? basic::sign_with(*key.plain, message,
                                                basic::EpochMaterial{entry->epoch, entry->r_sum, entry->x})
                             : basic::sign(*key.plain, message);
  } else {
    result.signature =
        entry ? forward::sign_with(*key.fwd, message,
                                   forward::EpochMaterial{entry->epoch, entry->y_sum, entry->r_sum, entry->x})
              : forward::sign(*key.fwd, message);
  }
  result.used_precomputed = entry.has_value();

  // Write-ahead: the advanced state is durable before the signature leaves.
  crash_point("sign:before-persist");
  store_key_file(opts.key, seal, key);
  crash_point("sign:after-persist");
  if (store) {
    save_store(*opts.precomputed, seal, *store);
    result.replenish = store->needs_replenish();
  }
  return result;
}

PrecomputeStats precompute_store(const PrecomputeOptions& opts) {
  const Bytes seal = existing_seal_key(opts.key, opts.seal_key);
  SignerKeyFile key = load_key_file(opts.key, seal);
  PrecomputeStore store =
      PrecomputeStore::build(key, opts.count, opts.watermark.value_or(opts.count / 8), opts.exec);
  save_store(opts.out, seal, store);
  PrecomputeStats st;
  st.first = store.entries.empty() ? 0 : store.entries.front().epoch;
  st.entries = store.entries.size();
  st.entry_bytes = store.entry_size();
  st.store_bytes = store.encoded_size();
  return st;
}

VerifyOutcome verify_signature(vclient::Client& client, ByteView message, ByteView signature) {
  VerifyOutcome out;
  try {
    out.epoch = Signature::decode(signature).epoch;
  } catch (const Error&) {
  }
  Verdict v = client.verify_message(message, signature);
  if (v.ok) {
    out.outcome = Outcome::accept;
  } else {
    out.outcome = v.reason.starts_with("ServerUnreachable") ? Outcome::error : Outcome::reject;
    out.reason = v.reason;
  }
  return out;
}

std::string format_outcome(const VerifyOutcome& v, bool json) {
  const char* word = v.outcome == Outcome::accept ? "accept" : v.outcome == Outcome::reject ? "reject" : "error";
  if (json) {
    nlohmann::json j{{"result", word}, {"epoch", v.epoch}};
    if (!v.reason.empty()) j["reason"] = v.reason;
    return j.dump();
  }
  return v.reason.empty() ? std::string(word) : std::string(word) + " " + v.reason;
}

std::string format_audit(const vclient::AuditReport& r, bool json) {
  if (json) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : r.servers) {
      nlohmann::json e{{"index", s.index}, {"checked", s.checked}, {"passed", s.passed}, {"ok", s.ok()}};
      if (s.first_failure) {
        e["first_failure"] = *s.first_failure;
        e["reason"] = s.reason;
      }
      list.push_back(std::move(e));
    }
    return nlohmann::json{{"all_pass", r.all_pass()}, {"servers", std::move(list)}}.dump();
  }
  std::string out;
  for (const auto& s : r.servers) {
    out += "server " + std::to_string(s.index) + ": " + (s.ok() ? "pass" : "FAIL") + " (" +
           std::to_string(s.passed) + "/" + std::to_string(s.checked) + ")";
    if (s.first_failure) out += " first=" + std::to_string(*s.first_failure) + " " + s.reason;
    out += "\n";
  }
  if (r.servers.empty()) out = "no epochs sampled\n";
  return out;
}

}  // namespace lrsha::cli
