#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lrsha {

enum class Errc {
  invalid_params,
  empty_list,
  invalid_stride,
  epoch_out_of_range,
  epoch_expired,
  state_exhausted,
  decode_error,
  cert_failure,
  missing_server,
  epoch_mismatch,
  already_provisioned,
  malformed_secret,
  not_provisioned,
  range_too_large,
  budget_exceeded,
  server_unreachable,
  dir_not_empty,
  corrupt_key_file,
  count_exceeds_remaining,
  io_error,
};

// Stable, machine-readable name ("EpochExpired", "CertFailure", ...).
std::string_view to_string(Errc code);
// Inverse of to_string; nullopt for unknown names.
std::optional<Errc> parse_errc(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string what, std::optional<std::uint32_t> server = std::nullopt,
        std::optional<std::uint64_t> epoch = std::nullopt);

  Errc code() const noexcept { return code_; }
  std::optional<std::uint32_t> server() const noexcept { return server_; }
  std::optional<std::uint64_t> epoch() const noexcept { return epoch_; }

  // e.g. "CertFailure{2,7}" or "StateExhausted".
  std::string tag() const;

 private:
  Errc code_;
  std::optional<std::uint32_t> server_;
  std::optional<std::uint64_t> epoch_;
};

// Outcome of a verification routine. Verifiers never throw on bad input;
// they return a rejection carrying the reason.
struct Verdict {
  bool ok = false;
  std::string reason;

  static Verdict accept() { return {true, {}}; }
  static Verdict reject(std::string why) { return {false, std::move(why)}; }
  explicit operator bool() const noexcept { return ok; }
};

}  // namespace lrsha
