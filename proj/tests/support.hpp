#pragma once

// Shared helpers for the test binaries: an independent big-integer model of
// the toy group, and brute-force searches that pin PRF/hash outputs in the
// toy group to chosen values.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lrsha/bytes.hpp"
#include "lrsha/group.hpp"
#include "lrsha/keyderive.hpp"

namespace oracle {

using boost::multiprecision::cpp_int;

inline const cpp_int kP = 23;
inline const cpp_int kQ = 11;
inline const cpp_int kAlpha = 2;

inline cpp_int from_le(lrsha::ByteView b) {
  cpp_int v = 0;
  for (std::size_t i = b.size(); i-- > 0;) v = v * 256 + b[i];
  return v;
}

// base^e mod p by repeated multiplication: deliberately naive.
inline cpp_int naive_pow(cpp_int base, cpp_int e, const cpp_int& p = kP) {
  cpp_int acc = 1;
  for (cpp_int i = 0; i < e; ++i) acc = (acc * base) % p;
  return acc;
}

inline bool in_subgroup(const cpp_int& v) { return v >= 1 && v < kP && naive_pow(v, kQ) == 1; }

inline cpp_int mod_q(const cpp_int& v) {
  cpp_int r = v % kQ;
  return r < 0 ? r + kQ : r;
}

inline unsigned value(const lrsha::Bytes32& b) { return static_cast<unsigned>(from_le(b)); }

}  // namespace oracle

namespace testutil {

inline lrsha::Scalar toy_scalar(unsigned v) { return lrsha::toy_group().from_u64(v); }
inline lrsha::GroupElement toy_elem(unsigned v) {
  lrsha::GroupElement e;
  e.bytes[0] = static_cast<std::uint8_t>(v);
  return e;
}

inline lrsha::Seed numbered_seed(std::uint64_t n) {
  lrsha::Seed s;
  for (int i = 0; i < 8; ++i) s.bytes[i] = static_cast<std::uint8_t>(n >> (8 * i));
  s.bytes[31] = 0xA5;
  return s;
}

// First seed whose PRF output at `counter` equals `target` in the toy group.
inline lrsha::Seed seed_with_prf(unsigned target, std::uint64_t counter = 1) {
  for (std::uint64_t n = 0;; ++n) {
    auto s = numbered_seed(n);
    if (lrsha::prf(lrsha::toy_group(), s.bytes, counter, lrsha::PrfRole::nonce_seed) ==
        toy_scalar(target)) {
      return s;
    }
  }
}

// First seed that reduces to `target` in the toy group.
inline lrsha::Seed seed_reducing_to(unsigned target) {
  for (std::uint64_t n = 0;; ++n) {
    auto s = numbered_seed(n);
    if (lrsha::seed_to_scalar(lrsha::toy_group(), s) == toy_scalar(target)) return s;
  }
}

// First message "msg-<n>" whose challenge under `mask` equals `target`.
inline std::string message_with_challenge(unsigned target, const lrsha::Bytes32& mask) {
  for (std::uint64_t n = 0;; ++n) {
    std::string m = "msg-" + std::to_string(n);
    if (lrsha::challenge(lrsha::toy_group(), lrsha::as_bytes(m), mask) == toy_scalar(target)) {
      return m;
    }
  }
}

inline lrsha::Bytes to_bytes(const std::string& s) { return lrsha::Bytes(s.begin(), s.end()); }

}  // namespace testutil
