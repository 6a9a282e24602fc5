#include "lrsha/params.hpp"

#include <string>

#include "lrsha/error.hpp"

namespace lrsha {

std::string_view to_string(Scheme s) {
  return s == Scheme::lrsha ? "lrsha" : "flrsha";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "lrsha") return Scheme::lrsha;
  if (name == "flrsha") return Scheme::flrsha;
  throw Error(Errc::invalid_params, "unknown scheme: " + std::string(name));
}

void SchemeParams::validate() const {
  if (max_signatures < 1) throw Error(Errc::invalid_params, "J must be at least 1");
  if (servers < 1 || servers > 0xffff) throw Error(Errc::invalid_params, "L must be in [1, 65535]");
  if (scheme != Scheme::lrsha && scheme != Scheme::flrsha) {
    throw Error(Errc::invalid_params, "unknown scheme tag");
  }
  (void)group();
}

void write_params(Writer& w, const SchemeParams& p) {
  w.u8(static_cast<std::uint8_t>(p.scheme))
      .u8(static_cast<std::uint8_t>(p.group_id))
      .u64(p.max_signatures)
      .u32(p.servers);
}

SchemeParams read_params(Reader& r) {
  SchemeParams p;
  p.scheme = static_cast<Scheme>(r.u8());
  p.group_id = static_cast<GroupId>(r.u8());
  p.max_signatures = r.u64();
  p.servers = r.u32();
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(Errc::decode_error, std::string("invalid parameter block: ") + e.what());
  }
  return p;
}

}  // namespace lrsha
