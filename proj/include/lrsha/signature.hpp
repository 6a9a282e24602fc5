#pragma once

#include <cstddef>
#include <cstdint>

#include "lrsha/bytes.hpp"
#include "lrsha/group.hpp"

namespace lrsha {

// sigma_j = <s_j, x_j, j>, identical for both schemes.
struct Signature {
  static constexpr std::size_t kEncodedSize = 72;

  Scalar s;      // not validated until verification
  Bytes32 x{};   // one-time mask, full PRF width
  std::uint64_t epoch = 0;

  // s(32) | x(32) | j(8, LE)
  Bytes encode() const;
  // Throws Errc::decode_error unless the input is exactly 72 bytes.
  static Signature decode(ByteView in);

  friend bool operator==(const Signature&, const Signature&) = default;
};

}  // namespace lrsha
