#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>

#include "lrsha/basic.hpp"
#include "lrsha/forward.hpp"

// Signer-side files. Both are kept sealed at rest through the file keystore
// ("LRKS" envelope); the records below are what the envelope protects.
namespace lrsha::cli {

// "LRSK" | version(1) | scheme(1) | group(1) | L(4) | payload
// payload: the scheme's SignerKey::serialize_payload().
struct SignerKeyFile {
  static constexpr std::size_t kHeaderSize = 11;

  Scheme scheme = Scheme::lrsha;
  GroupId group = GroupId::ristretto255;
  std::uint32_t servers = 0;
  std::optional<basic::SignerKey> plain;
  std::optional<forward::SignerKey> fwd;

  static SignerKeyFile from(const basic::SignerKey& k, std::uint32_t servers);
  static SignerKeyFile from(const forward::SignerKey& k, std::uint32_t servers);

  std::uint64_t epoch() const;
  std::uint64_t max_epoch() const;
  // Signatures left, including the current epoch.
  std::uint64_t remaining() const;

  Bytes payload() const;
  Bytes encode() const;
  // Throws Errc::corrupt_key_file.
  static SignerKeyFile decode(ByteView record);
};

// Creates a new sealed key file; fails if the path exists.
void create_key_file(const std::filesystem::path& path, ByteView seal_key, const SignerKeyFile& key);
// Throws Errc::corrupt_key_file (bad envelope, wrong seal key, bad record) or io_error (missing).
SignerKeyFile load_key_file(const std::filesystem::path& path, ByteView seal_key);
// Atomic replace: readers see the old or the new state, never a mix.
void store_key_file(const std::filesystem::path& path, ByteView seal_key, const SignerKeyFile& key);

// Offline signer material for a run of consecutive epochs, derived from a
// copy of the key; the live key does not advance until it signs.
//
// "LRPS" | version(1) | scheme(1) | group(1) | L(4) | watermark(8) | first(8) | count(8) | entries
// entry: r_sum(32) | x(32) for lrsha; y_sum(32) | r_sum(32) | x(32) for flrsha.
struct PrecomputeStore {
  struct Entry {
    std::uint64_t epoch = 0;
    Scalar y_sum;  // flrsha only
    Scalar r_sum;
    Bytes32 x{};
  };

  Scheme scheme = Scheme::lrsha;
  GroupId group = GroupId::ristretto255;
  std::uint32_t servers = 0;
  std::uint64_t watermark = 0;  // replenish once fewer entries than this remain
  std::deque<Entry> entries;

  // Errors: count_exceeds_remaining.
  static PrecomputeStore build(const SignerKeyFile& key, std::uint64_t count,
                               std::uint64_t watermark,
                               kernels::Exec exec = kernels::Exec::parallel);

  std::size_t entry_size() const;
  std::size_t encoded_size() const;
  bool needs_replenish() const { return entries.size() < watermark; }
  // Drops entries below `epoch` and removes and returns the one for `epoch`.
  std::optional<Entry> take(std::uint64_t epoch);

  Bytes encode() const;
  // Throws Errc::corrupt_key_file.
  static PrecomputeStore decode(ByteView in);
};

void save_store(const std::filesystem::path& path, ByteView seal_key, const PrecomputeStore& store);
PrecomputeStore load_store(const std::filesystem::path& path, ByteView seal_key);

}  // namespace lrsha::cli
