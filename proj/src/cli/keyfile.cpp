#include "lrsha/keyfile.hpp"

#include "lrsha/error.hpp"
#include "lrsha/keystore.hpp"

namespace lrsha::cli {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kKeyMagic = "LRSK";
constexpr std::string_view kStoreMagic = "LRPS";
constexpr std::uint8_t kVersion = 1;

[[noreturn]] void corrupt(const std::string& what) { throw Error(Errc::corrupt_key_file, what); }

void check_magic(Reader& r, std::string_view magic, const char* what) {
  ByteView m = r.raw(4);
  if (std::string_view(reinterpret_cast<const char*>(m.data()), 4) != magic) {
    corrupt(std::string("not a ") + what);
  }
  if (r.u8() != kVersion) corrupt(std::string("unsupported ") + what + " version");
}

struct Header {
  Scheme scheme;
  GroupId group;
  std::uint32_t servers;
};

Header read_header(Reader& r) {
  Header h{};
  std::uint8_t s = r.u8();
  if (s != static_cast<std::uint8_t>(Scheme::lrsha) && s != static_cast<std::uint8_t>(Scheme::flrsha)) {
    corrupt("unknown scheme tag");
  }
  h.scheme = static_cast<Scheme>(s);
  try {
    h.group = group_by_id(static_cast<GroupId>(r.u8())).id();
  } catch (const Error&) {
    corrupt("unknown group tag");
  }
  h.servers = r.u32();
  if (h.servers < 1 || h.servers > 0xffff) corrupt("server count out of range");
  return h;
}

// Any structural decode failure inside is reported as a corrupt file.
template <class Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == Errc::corrupt_key_file) throw;
    throw Error(Errc::corrupt_key_file, e.what());
  }
}

void seal_over(const fs::path& path, ByteView seal_key, ByteView record) {
  auto ks = comc::open_file_keystore(path, seal_key);
  if (ks->provisioned()) {
    ks->reseal(record);
  } else {
    ks->provision(record);
  }
}

Bytes unseal_from(const fs::path& path, ByteView seal_key) {
  if (!fs::exists(path)) throw Error(Errc::io_error, "no such file: " + path.string());
  auto ks = comc::open_file_keystore(path, seal_key);
  comc::SecretBytes s = guarded([&] { return ks->unseal(); });
  return Bytes(s.view().begin(), s.view().end());
}

}  // namespace

SignerKeyFile SignerKeyFile::from(const basic::SignerKey& k, std::uint32_t servers) {
  SignerKeyFile f;
  f.scheme = Scheme::lrsha;
  f.group = k.group_id;
  f.servers = servers;
  f.plain = k;
  return f;
}

SignerKeyFile SignerKeyFile::from(const forward::SignerKey& k, std::uint32_t servers) {
  SignerKeyFile f;
  f.scheme = Scheme::flrsha;
  f.group = k.group_id;
  f.servers = servers;
  f.fwd = k;
  return f;
}

std::uint64_t SignerKeyFile::epoch() const { return plain ? plain->epoch : fwd->epoch; }
std::uint64_t SignerKeyFile::max_epoch() const { return plain ? plain->max_epoch : fwd->max_epoch; }

std::uint64_t SignerKeyFile::remaining() const {
  return epoch() > max_epoch() ? 0 : max_epoch() - epoch() + 1;
}

Bytes SignerKeyFile::payload() const { return plain ? plain->serialize_payload() : fwd->serialize_payload(); }

Bytes SignerKeyFile::encode() const {
  Bytes p = payload();
  Writer w(kHeaderSize + p.size());
  w.raw(as_bytes(kKeyMagic)).u8(kVersion).u8(static_cast<std::uint8_t>(scheme));
  w.u8(static_cast<std::uint8_t>(group)).u32(servers).raw(p);
  wipe(p);
  return w.take();
}

SignerKeyFile SignerKeyFile::decode(ByteView record) {
  return guarded([&] {
    Reader r(record);
    check_magic(r, kKeyMagic, "signer key file");
    Header h = read_header(r);
    ByteView payload = r.raw(r.remaining());
    SignerKeyFile f;
    f.scheme = h.scheme;
    f.group = h.group;
    f.servers = h.servers;
    if (h.scheme == Scheme::lrsha) {
      f.plain = basic::SignerKey::from_payload(h.group, h.servers, payload);
    } else {
      f.fwd = forward::SignerKey::from_payload(h.group, h.servers, payload);
    }
    return f;
  });
}

void create_key_file(const fs::path& path, ByteView seal_key, const SignerKeyFile& key) {
  Bytes record = key.encode();
  comc::open_file_keystore(path, seal_key)->provision(record);
  wipe(record);
}

SignerKeyFile load_key_file(const fs::path& path, ByteView seal_key) {
  Bytes record = unseal_from(path, seal_key);
  SignerKeyFile f = SignerKeyFile::decode(record);
  wipe(record);
  return f;
}

void store_key_file(const fs::path& path, ByteView seal_key, const SignerKeyFile& key) {
  Bytes record = key.encode();
  seal_over(path, seal_key, record);
  wipe(record);
}

PrecomputeStore PrecomputeStore::build(const SignerKeyFile& key, std::uint64_t count,
                                       std::uint64_t watermark, kernels::Exec exec) {
  if (count > key.remaining()) {
    throw Error(Errc::count_exceeds_remaining,
                "asked for " + std::to_string(count) + " entries, key has " +
                    std::to_string(key.remaining()) + " signatures left");
  }
  PrecomputeStore s;
  s.scheme = key.scheme;
  s.group = key.group;
  s.servers = key.servers;
  s.watermark = watermark;
  if (count == 0) return s;
  const std::uint64_t first = key.epoch();
  if (key.plain) {
    auto mats = kernels::map_epochs(
        first, first + count - 1, [&](std::uint64_t j) { return basic::epoch_material(*key.plain, j); },
        exec);
    for (const auto& m : mats) s.entries.push_back({m.epoch, {}, m.r_sum, m.x});
  } else {
    // Chains only run forward, so this walks a private copy of the key.
    forward::SignerKey copy = *key.fwd;
    for (std::uint64_t i = 0; i < count; ++i) {
      auto m = forward::epoch_material(copy);
      s.entries.push_back({m.epoch, m.y_sum, m.r_sum, m.x});
      if (i + 1 < count) forward::update(copy);
    }
  }
  return s;
}

std::size_t PrecomputeStore::entry_size() const { return scheme == Scheme::lrsha ? 64 : 96; }

std::size_t PrecomputeStore::encoded_size() const { return 39 + entries.size() * entry_size(); }

std::optional<PrecomputeStore::Entry> PrecomputeStore::take(std::uint64_t epoch) {
  while (!entries.empty() && entries.front().epoch < epoch) entries.pop_front();
  if (entries.empty() || entries.front().epoch != epoch) return std::nullopt;
  Entry e = entries.front();
  entries.pop_front();
  return e;
}

Bytes PrecomputeStore::encode() const {
  Writer w(encoded_size());
  w.raw(as_bytes(kStoreMagic)).u8(kVersion).u8(static_cast<std::uint8_t>(scheme));
  w.u8(static_cast<std::uint8_t>(group)).u32(servers).u64(watermark);
  w.u64(entries.empty() ? 0 : entries.front().epoch).u64(entries.size());
  for (const auto& e : entries) {
    if (scheme == Scheme::flrsha) w.raw(e.y_sum.bytes);
    w.raw(e.r_sum.bytes).raw(e.x);
  }
  return w.take();
}

PrecomputeStore PrecomputeStore::decode(ByteView in) {
  return guarded([&] {
    Reader r(in);
    check_magic(r, kStoreMagic, "precompute store");
    Header h = read_header(r);
    PrecomputeStore s;
    s.scheme = h.scheme;
    s.group = h.group;
    s.servers = h.servers;
    s.watermark = r.u64();
    const std::uint64_t first = r.u64();
    const std::uint64_t count = r.u64();
    if (count > 0 && first == 0) corrupt("precompute store starts at epoch 0");
    if (r.remaining() != count * s.entry_size()) corrupt("precompute store has the wrong length");
    for (std::uint64_t i = 0; i < count; ++i) {
      Entry e;
      e.epoch = first + i;
      if (s.scheme == Scheme::flrsha) e.y_sum.bytes = r.raw32();
      e.r_sum.bytes = r.raw32();
      e.x = r.raw32();
      s.entries.push_back(e);
    }
    return s;
  });
}

void save_store(const fs::path& path, ByteView seal_key, const PrecomputeStore& store) {
  Bytes record = store.encode();
  seal_over(path, seal_key, record);
  wipe(record);
}

PrecomputeStore load_store(const fs::path& path, ByteView seal_key) {
  Bytes record = unseal_from(path, seal_key);
  PrecomputeStore s = PrecomputeStore::decode(record);
  wipe(record);
  return s;
}

}  // namespace lrsha::cli
