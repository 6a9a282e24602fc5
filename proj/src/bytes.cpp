#include "lrsha/bytes.hpp"

#include <algorithm>

#include <sodium.h>

#include "lrsha/error.hpp"

namespace lrsha {

std::string to_hex(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::decode_error, "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::decode_error, "invalid hex character");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

bool contains(ByteView haystack, ByteView needle) {
  if (needle.empty()) return true;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

void wipe(std::span<std::uint8_t> data) {
  if (!data.empty()) sodium_memzero(data.data(), data.size());
}

std::uint64_t Reader::uint_le(int n) {
  auto b = raw(static_cast<std::size_t>(n));
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint8_t Reader::u8() { return static_cast<std::uint8_t>(uint_le(1)); }
std::uint16_t Reader::u16() { return static_cast<std::uint16_t>(uint_le(2)); }
std::uint32_t Reader::u32() { return static_cast<std::uint32_t>(uint_le(4)); }
std::uint64_t Reader::u64() { return uint_le(8); }

ByteView Reader::raw(std::size_t n) {
  if (remaining() < n) throw Error(Errc::decode_error, "truncated input");
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Bytes32 Reader::raw32() {
  Bytes32 out;
  auto b = raw(32);
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

void Reader::expect_done() const {
  if (!done()) throw Error(Errc::decode_error, "trailing bytes after encoded value");
}

}  // namespace lrsha
