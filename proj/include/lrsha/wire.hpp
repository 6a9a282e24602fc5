#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrsha/bytes.hpp"
#include "lrsha/params.hpp"

// ComC wire messages. Bodies are canonical JSON: keys sorted, no whitespace,
// so encode(decode(text)) == text for every message this module produces.
//
//   request:  {"hi":9,"lo":1,"op":"batch","scheme":"lrsha","server":2,"v":1}
//   response: {"bundles":["<hex>",...],"v":1}
//             {"error":{"code":"EpochOutOfRange","epoch":0,"message":"...","server":2},"v":1}
//             {"status":{...},"v":1}
namespace lrsha::wire {

inline constexpr int kVersion = 1;
inline constexpr std::string_view kPath = "/comc";

enum class Op { get, batch, status };

std::string_view to_string(Op op);

struct Request {
  Scheme scheme = Scheme::lrsha;
  std::uint16_t server = 1;
  Op op = Op::get;
  std::uint64_t j = 0;   // get
  std::uint64_t lo = 0;  // batch
  std::uint64_t hi = 0;  // batch

  static Request get(Scheme s, std::uint16_t server, std::uint64_t j);
  static Request batch(Scheme s, std::uint16_t server, std::uint64_t lo, std::uint64_t hi);
  static Request status(Scheme s, std::uint16_t server);

  friend bool operator==(const Request&, const Request&) = default;
};

struct ErrorBody {
  std::string code;  // Errc name
  std::string message;
  std::optional<std::uint32_t> server;
  std::optional<std::uint64_t> epoch;

  friend bool operator==(const ErrorBody&, const ErrorBody&) = default;
};

struct ServerStatus {
  bool ready = false;
  std::string scheme;
  std::uint16_t server = 0;
  std::string group;
  std::uint64_t max_epoch = 0;
  std::uint32_t servers = 0;
  std::uint64_t next_live_epoch = 0;  // forward-secure servers only; 0 otherwise
  std::string keystore;
  std::uint64_t cache_lo = 0;
  std::uint64_t cache_hi = 0;
  std::uint64_t cache_bundles = 0;
  std::uint64_t cache_bytes = 0;
  std::uint64_t cache_budget = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t max_batch = 0;

  friend bool operator==(const ServerStatus&, const ServerStatus&) = default;
};

struct Response {
  std::vector<Bytes> bundles;
  std::optional<ErrorBody> error;
  std::optional<ServerStatus> status;

  friend bool operator==(const Response&, const Response&) = default;
};

std::string encode(const Request& r);
std::string encode(const Response& r);
// Both throw Errc::decode_error on malformed or unsupported messages.
Request decode_request(std::string_view text);
Response decode_response(std::string_view text);

}  // namespace lrsha::wire
