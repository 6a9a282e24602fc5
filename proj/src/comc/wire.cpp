#include "lrsha/wire.hpp"

#include <json.hpp>

#include "lrsha/error.hpp"

namespace lrsha::wire {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::decode_error, "wire: " + what); }

json parse(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) bad("body is not a JSON object");
  if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<int>() != kVersion) {
    bad("unsupported version");
  }
  return j;
}

std::uint64_t uint_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    bad(std::string("missing or negative integer field \"") + key + "\"");
  }
  return j[key].get<std::uint64_t>();
}

std::string string_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) bad(std::string("missing string field \"") + key + "\"");
  return j[key].get<std::string>();
}

Op parse_op(const std::string& s) {
  if (s == "get") return Op::get;
  if (s == "batch") return Op::batch;
  if (s == "status") return Op::status;
  bad("unknown op \"" + s + "\"");
}

json status_json(const ServerStatus& s) {
  return json{{"ready", s.ready},
              {"scheme", s.scheme},
              {"server", s.server},
              {"group", s.group},
              {"max_epoch", s.max_epoch},
              {"servers", s.servers},
              {"next_live_epoch", s.next_live_epoch},
              {"keystore", s.keystore},
              {"cache_lo", s.cache_lo},
              {"cache_hi", s.cache_hi},
              {"cache_bundles", s.cache_bundles},
              {"cache_bytes", s.cache_bytes},
              {"cache_budget", s.cache_budget},
              {"cache_hits", s.cache_hits},
              {"cache_misses", s.cache_misses},
              {"max_batch", s.max_batch}};
}

ServerStatus status_from(const json& j) {
  if (!j.is_object()) bad("status is not an object");
  ServerStatus s;
  if (!j.contains("ready") || !j["ready"].is_boolean()) bad("status.ready");
  s.ready = j["ready"].get<bool>();
  s.scheme = string_field(j, "scheme");
  s.server = static_cast<std::uint16_t>(uint_field(j, "server"));
  s.group = string_field(j, "group");
  s.max_epoch = uint_field(j, "max_epoch");
  s.servers = static_cast<std::uint32_t>(uint_field(j, "servers"));
  s.next_live_epoch = uint_field(j, "next_live_epoch");
  s.keystore = string_field(j, "keystore");
  s.cache_lo = uint_field(j, "cache_lo");
  s.cache_hi = uint_field(j, "cache_hi");
  s.cache_bundles = uint_field(j, "cache_bundles");
  s.cache_bytes = uint_field(j, "cache_bytes");
  s.cache_budget = uint_field(j, "cache_budget");
  s.cache_hits = uint_field(j, "cache_hits");
  s.cache_misses = uint_field(j, "cache_misses");
  s.max_batch = uint_field(j, "max_batch");
  return s;
}

}  // namespace

std::string_view to_string(Op op) {
  switch (op) {
    case Op::get: return "get";
    case Op::batch: return "batch";
    case Op::status: return "status";
  }
  return "?";
}

Request Request::get(Scheme s, std::uint16_t server, std::uint64_t j) {
  Request r;
  r.scheme = s;
  r.server = server;
  r.op = Op::get;
  r.j = j;
  return r;
}

Request Request::batch(Scheme s, std::uint16_t server, std::uint64_t lo, std::uint64_t hi) {
  Request r;
  r.scheme = s;
  r.server = server;
  r.op = Op::batch;
  r.lo = lo;
  r.hi = hi;
  return r;
}

Request Request::status(Scheme s, std::uint16_t server) {
  Request r;
  r.scheme = s;
  r.server = server;
  r.op = Op::status;
  return r;
}

std::string encode(const Request& r) {
  json j{{"v", kVersion},
         {"scheme", std::string(to_string(r.scheme))},
         {"server", r.server},
         {"op", std::string(to_string(r.op))}};
  if (r.op == Op::get) j["j"] = r.j;
  if (r.op == Op::batch) {
    j["lo"] = r.lo;
    j["hi"] = r.hi;
  }
  return j.dump();
}

Request decode_request(std::string_view text) {
  json j = parse(text);
  Request r;
  try {
    r.scheme = parse_scheme(string_field(j, "scheme"));
  } catch (const Error&) {
    bad("unknown scheme");
  }
  std::uint64_t server = uint_field(j, "server");
  if (server < 1 || server > 0xffff) bad("server index out of range");
  r.server = static_cast<std::uint16_t>(server);
  r.op = parse_op(string_field(j, "op"));
  std::size_t expected = 4;
  if (r.op == Op::get) {
    r.j = uint_field(j, "j");
    expected = 5;
  } else if (r.op == Op::batch) {
    r.lo = uint_field(j, "lo");
    r.hi = uint_field(j, "hi");
    expected = 6;
  }
  if (j.size() != expected) bad("unexpected fields in request");
  return r;
}

std::string encode(const Response& r) {
  json j{{"v", kVersion}};
  if (r.error) {
    json e{{"code", r.error->code}, {"message", r.error->message}};
    if (r.error->server) e["server"] = *r.error->server;
    if (r.error->epoch) e["epoch"] = *r.error->epoch;
    j["error"] = std::move(e);
  } else if (r.status) {
    j["status"] = status_json(*r.status);
  } else {
    json arr = json::array();
    for (const auto& b : r.bundles) arr.push_back(to_hex(b));
    j["bundles"] = std::move(arr);
  }
  return j.dump();
}

Response decode_response(std::string_view text) {
  json j = parse(text);
  Response r;
  if (j.size() != 2) bad("response must carry exactly one payload field");
  if (j.contains("error")) {
    const json& e = j["error"];
    if (!e.is_object()) bad("error is not an object");
    ErrorBody body;
    body.code = string_field(e, "code");
    body.message = string_field(e, "message");
    if (e.contains("server")) body.server = static_cast<std::uint32_t>(uint_field(e, "server"));
    if (e.contains("epoch")) body.epoch = uint_field(e, "epoch");
    r.error = std::move(body);
  } else if (j.contains("status")) {
    r.status = status_from(j["status"]);
  } else if (j.contains("bundles")) {
    if (!j["bundles"].is_array()) bad("bundles is not an array");
    for (const auto& h : j["bundles"]) {
      if (!h.is_string()) bad("bundle is not a string");
      const auto& s = h.get_ref<const std::string&>();
      for (char c : s) {
        if (c >= 'A' && c <= 'F') bad("bundle hex must be lowercase");
      }
      r.bundles.push_back(from_hex(s));
    }
  } else {
    bad("response has no payload");
  }
  return r;
}

}  // namespace lrsha::wire
