#include "lrsha/error.hpp"

namespace lrsha {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_params: return "InvalidParams";
    case Errc::empty_list: return "EmptyList";
    case Errc::invalid_stride: return "InvalidStride";
    case Errc::epoch_out_of_range: return "EpochOutOfRange";
    case Errc::epoch_expired: return "EpochExpired";
    case Errc::state_exhausted: return "StateExhausted";
    case Errc::decode_error: return "DecodeError";
    case Errc::cert_failure: return "CertFailure";
    case Errc::missing_server: return "MissingServer";
    case Errc::epoch_mismatch: return "EpochMismatch";
    case Errc::already_provisioned: return "AlreadyProvisioned";
    case Errc::malformed_secret: return "MalformedSecret";
    case Errc::not_provisioned: return "NotProvisioned";
    case Errc::range_too_large: return "RangeTooLarge";
    case Errc::budget_exceeded: return "BudgetExceeded";
    case Errc::server_unreachable: return "ServerUnreachable";
    case Errc::dir_not_empty: return "DirNotEmpty";
    case Errc::corrupt_key_file: return "CorruptKeyFile";
    case Errc::count_exceeds_remaining: return "CountExceedsRemaining";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

std::optional<Errc> parse_errc(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(Errc::io_error); ++i) {
    if (to_string(static_cast<Errc>(i)) == name) return static_cast<Errc>(i);
  }
  return std::nullopt;
}

Error::Error(Errc code, std::string what, std::optional<std::uint32_t> server,
             std::optional<std::uint64_t> epoch)
    : std::runtime_error(std::move(what)), code_(code), server_(server), epoch_(epoch) {}

std::string Error::tag() const {
  std::string out(to_string(code_));
  if (server_ || epoch_) {
    out += '{';
    if (server_) out += std::to_string(*server_);
    if (server_ && epoch_) out += ',';
    if (epoch_) out += std::to_string(*epoch_);
    out += '}';
  }
  return out;
}

}  // namespace lrsha
