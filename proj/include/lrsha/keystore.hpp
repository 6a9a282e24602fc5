#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "lrsha/bytes.hpp"

// Sealed storage for a ComC server's secret. This is the process-level stand-in
// for an enclave: the secret only leaves the keystore through unseal(), and the
// server that calls it is treated as running inside the boundary.
//
// Two backends:
//   memory: secretbox-sealed under a per-process key held in guarded memory.
//   file:   secretbox-sealed file, "LRKS" | version(1) | nonce(24) | ciphertext.
// A hardware enclave would be a third implementation of the same interface.
namespace lrsha::comc {

// Plain byte buffer that is wiped when it goes out of scope.
class SecretBytes {
 public:
  SecretBytes() = default;
  explicit SecretBytes(Bytes b) : bytes_(std::move(b)) {}
  SecretBytes(const SecretBytes&) = delete;
  SecretBytes& operator=(const SecretBytes&) = delete;
  SecretBytes(SecretBytes&& o) noexcept : bytes_(std::move(o.bytes_)) { o.bytes_.clear(); }
  SecretBytes& operator=(SecretBytes&& o) noexcept;
  ~SecretBytes() { wipe(bytes_); }

  ByteView view() const { return bytes_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  Bytes bytes_;
};

class SealedKeystore {
 public:
  virtual ~SealedKeystore() = default;

  virtual std::string_view backend() const = 0;
  virtual bool provisioned() const = 0;
  // One-shot. Throws Errc::already_provisioned if a secret is already sealed.
  virtual void provision(ByteView secret) = 0;
  // Replaces the sealed secret (evolving state). Throws Errc::not_provisioned.
  virtual void reseal(ByteView secret) = 0;
  // Throws Errc::not_provisioned.
  virtual SecretBytes unseal() const = 0;
  // Explicit reset; the only way to provision again.
  virtual void reset() = 0;
};

std::unique_ptr<SealedKeystore> make_memory_keystore();

// `seal_key` must be 32 bytes. The file is created on first provision.
std::unique_ptr<SealedKeystore> open_file_keystore(const std::filesystem::path& path,
                                                   ByteView seal_key);

// Seal key for a file keystore: the explicit hex value if given, else the
// LRSHA_SEAL_KEY environment variable, else `<keystore>.key`, generated with
// owner-only permissions when missing.
Bytes resolve_seal_key(const std::filesystem::path& keystore,
                       const std::optional<std::string>& hex_key);

}  // namespace lrsha::comc
