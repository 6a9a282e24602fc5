#pragma once

#include <cstdint>
#include <string_view>

#include "lrsha/bytes.hpp"
#include "lrsha/group.hpp"

namespace lrsha {

enum class Scheme : std::uint8_t { lrsha = 1, flrsha = 2 };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

// J used when the caller does not choose one.
inline constexpr std::uint64_t kDefaultMaxSignatures = std::uint64_t{1} << 20;

// Public parameter block shared by the signer, every ComC server and every verifier.
struct SchemeParams {
  Scheme scheme = Scheme::lrsha;
  GroupId group_id = GroupId::ristretto255;
  std::uint64_t max_signatures = kDefaultMaxSignatures;  // J
  std::uint32_t servers = 3;                             // L

  const Group& group() const { return group_by_id(group_id); }
  // Throws Errc::invalid_params unless J >= 1 and 1 <= L <= 65535.
  void validate() const;

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

// scheme(1) | group(1) | J(8) | L(4)
void write_params(Writer& w, const SchemeParams& p);
SchemeParams read_params(Reader& r);

}  // namespace lrsha
