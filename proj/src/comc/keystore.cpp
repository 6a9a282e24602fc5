#include "lrsha/keystore.hpp"

#include <cstdlib>
#include <mutex>

#include <sodium.h>

#include "lrsha/error.hpp"
#include "lrsha/fileio.hpp"
#include "lrsha/rng.hpp"

namespace lrsha::comc {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kFileMagic = "LRKS";
constexpr std::uint8_t kFileVersion = 1;
constexpr std::size_t kHeader = 4 + 1 + crypto_secretbox_NONCEBYTES;

Bytes seal(const unsigned char* key, ByteView plain) {
  Bytes out(crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES + plain.size());
  randombytes_buf(out.data(), crypto_secretbox_NONCEBYTES);
  crypto_secretbox_easy(out.data() + crypto_secretbox_NONCEBYTES, plain.data(), plain.size(),
                        out.data(), key);
  return out;
}

// `boxed` is nonce | ciphertext.
Bytes open_box(const unsigned char* key, ByteView boxed) {
  if (boxed.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES) {
    throw Error(Errc::decode_error, "sealed blob is truncated");
  }
  Bytes plain(boxed.size() - crypto_secretbox_NONCEBYTES - crypto_secretbox_MACBYTES);
  if (crypto_secretbox_open_easy(plain.data(), boxed.data() + crypto_secretbox_NONCEBYTES,
                                 boxed.size() - crypto_secretbox_NONCEBYTES, boxed.data(),
                                 key) != 0) {
    throw Error(Errc::decode_error, "sealed blob failed authentication");
  }
  return plain;
}

// Key material in sodium guarded pages, inaccessible except while in use.
class GuardedKey {
 public:
  explicit GuardedKey(ByteView key) {
    init_crypto();
    ptr_ = static_cast<unsigned char*>(sodium_malloc(crypto_secretbox_KEYBYTES));
    if (ptr_ == nullptr) throw Error(Errc::io_error, "cannot allocate guarded memory");
    if (key.empty()) {
      crypto_secretbox_keygen(ptr_);
    } else {
      std::copy(key.begin(), key.end(), ptr_);
    }
    sodium_mprotect_noaccess(ptr_);
  }
  GuardedKey(const GuardedKey&) = delete;
  GuardedKey& operator=(const GuardedKey&) = delete;
  ~GuardedKey() { sodium_free(ptr_); }

  template <class Fn>
  auto with(Fn&& fn) const {
    std::lock_guard lock(mu_);
    sodium_mprotect_readonly(ptr_);
    struct Relock {
      unsigned char* p;
      ~Relock() { sodium_mprotect_noaccess(p); }
    } relock{ptr_};
    return fn(static_cast<const unsigned char*>(ptr_));
  }

 private:
  unsigned char* ptr_ = nullptr;
  mutable std::mutex mu_;
};

class MemoryKeystore final : public SealedKeystore {
 public:
  MemoryKeystore() : key_(ByteView{}) {}

  std::string_view backend() const override { return "memory"; }
  bool provisioned() const override {
    std::lock_guard lock(mu_);
    return !sealed_.empty();
  }

  void provision(ByteView secret) override {
    std::lock_guard lock(mu_);
    if (!sealed_.empty()) throw Error(Errc::already_provisioned, "keystore already holds a secret");
    sealed_ = key_.with([&](const unsigned char* k) { return seal(k, secret); });
  }

  void reseal(ByteView secret) override {
    std::lock_guard lock(mu_);
    if (sealed_.empty()) throw Error(Errc::not_provisioned, "keystore is empty");
    sealed_ = key_.with([&](const unsigned char* k) { return seal(k, secret); });
  }

  SecretBytes unseal() const override {
    std::lock_guard lock(mu_);
    if (sealed_.empty()) throw Error(Errc::not_provisioned, "keystore is empty");
    return SecretBytes(key_.with([&](const unsigned char* k) { return open_box(k, sealed_); }));
  }

  void reset() override {
    std::lock_guard lock(mu_);
    sealed_.clear();
  }

 private:
  GuardedKey key_;
  mutable std::mutex mu_;
  Bytes sealed_;
};

class FileKeystore final : public SealedKeystore {
 public:
  FileKeystore(fs::path path, ByteView key) : path_(std::move(path)), key_(key) {}

  std::string_view backend() const override { return "file"; }
  bool provisioned() const override {
    std::lock_guard lock(mu_);
    return fs::exists(path_);
  }

  void provision(ByteView secret) override {
    std::lock_guard lock(mu_);
    if (fs::exists(path_)) {
      throw Error(Errc::already_provisioned, "keystore file already exists: " + path_.string());
    }
    write(secret);
  }

  void reseal(ByteView secret) override {
    std::lock_guard lock(mu_);
    if (!fs::exists(path_)) throw Error(Errc::not_provisioned, "keystore file missing");
    write(secret);
  }

  SecretBytes unseal() const override {
    std::lock_guard lock(mu_);
    if (!fs::exists(path_)) throw Error(Errc::not_provisioned, "keystore file missing");
    Bytes raw = read_file(path_);
    if (raw.size() < kHeader ||
        std::string_view(reinterpret_cast<const char*>(raw.data()), 4) != kFileMagic ||
        raw[4] != kFileVersion) {
      throw Error(Errc::decode_error, "not a keystore file: " + path_.string());
    }
    return SecretBytes(
        key_.with([&](const unsigned char* k) { return open_box(k, ByteView(raw).subspan(5)); }));
  }

  void reset() override {
    std::lock_guard lock(mu_);
    fs::remove(path_);
  }

 private:
  void write(ByteView secret) {
    Bytes boxed = key_.with([&](const unsigned char* k) { return seal(k, secret); });
    Writer w(5 + boxed.size());
    w.raw(as_bytes(kFileMagic)).u8(kFileVersion).raw(boxed);
    atomic_write_file(path_, w.bytes());
  }

  fs::path path_;
  GuardedKey key_;
  mutable std::mutex mu_;
};

}  // namespace

SecretBytes& SecretBytes::operator=(SecretBytes&& o) noexcept {
  if (this != &o) {
    wipe(bytes_);
    bytes_ = std::move(o.bytes_);
    o.bytes_.clear();
  }
  return *this;
}

std::unique_ptr<SealedKeystore> make_memory_keystore() { return std::make_unique<MemoryKeystore>(); }

std::unique_ptr<SealedKeystore> open_file_keystore(const fs::path& path, ByteView seal_key) {
  if (seal_key.size() != crypto_secretbox_KEYBYTES) {
    throw Error(Errc::invalid_params, "seal key must be 32 bytes");
  }
  return std::make_unique<FileKeystore>(path, seal_key);
}

Bytes resolve_seal_key(const fs::path& keystore, const std::optional<std::string>& hex_key) {
  auto check = [](Bytes k) {
    if (k.size() != crypto_secretbox_KEYBYTES) {
      throw Error(Errc::invalid_params, "seal key must be 64 hex characters");
    }
    return k;
  };
  if (hex_key) return check(from_hex(*hex_key));
  if (const char* env = std::getenv("LRSHA_SEAL_KEY"); env != nullptr && *env != '\0') {
    return check(from_hex(env));
  }
  fs::path key_file = keystore;
  key_file += ".key";
  if (fs::exists(key_file)) return check(read_file(key_file));
  init_crypto();
  Bytes k(crypto_secretbox_KEYBYTES);
  crypto_secretbox_keygen(k.data());
  atomic_write_file(key_file, k);
  return k;
}

}  // namespace lrsha::comc
