#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrsha {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Bytes32 = std::array<std::uint8_t, 32>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::string to_hex(ByteView data);
// Throws Errc::decode_error on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

// True if `needle` occurs anywhere inside `haystack`.
bool contains(ByteView haystack, ByteView needle);

// Overwrites memory in a way the optimizer cannot elide.
void wipe(std::span<std::uint8_t> data);

// Little-endian append helpers used by every binary layout in the project.
class Writer {
 public:
  Writer() = default;
  explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

  Writer& u8(std::uint8_t v) {
    out_.push_back(v);
    return *this;
  }
  Writer& u16(std::uint16_t v) { return uint_le(v, 2); }
  Writer& u32(std::uint32_t v) { return uint_le(v, 4); }
  Writer& u64(std::uint64_t v) { return uint_le(v, 8); }
  Writer& raw(ByteView v) {
    out_.insert(out_.end(), v.begin(), v.end());
    return *this;
  }

  const Bytes& bytes() const& { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Writer& uint_le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Bytes out_;
};

// Bounds-checked cursor; every read past the end throws Errc::decode_error.
class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteView raw(std::size_t n);
  Bytes32 raw32();

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }
  // Throws if unread bytes remain.
  void expect_done() const;

 private:
  std::uint64_t uint_le(int n);
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace lrsha
