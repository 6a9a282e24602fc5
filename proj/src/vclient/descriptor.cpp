#include <json.hpp>

#include "lrsha/http.hpp"
#include "lrsha/vclient.hpp"

namespace lrsha::vclient {
namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& what) {
  throw Error(Errc::decode_error, "deployment descriptor: " + what);
}

Bytes32 key_from_hex(const json& v, const char* what) {
  if (!v.is_string()) bad(std::string(what) + " is not a string");
  const auto& s = v.get_ref<const std::string&>();
  if (s.size() != 64) bad(std::string(what) + " must be 64 hex characters");
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) bad(std::string(what) + " must be lowercase hex");
  }
  Bytes raw = from_hex(s);
  Bytes32 out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

void expect_keys(const json& obj, std::initializer_list<const char*> keys, const char* what) {
  if (!obj.is_object()) bad(std::string(what) + " is not an object");
  for (const char* k : keys) {
    if (!obj.contains(k)) bad(std::string(what) + " lacks \"" + k + "\"");
  }
  if (obj.size() != keys.size()) bad(std::string(what) + " has unexpected fields");
}

std::vector<DeploymentDescriptor::Server> server_list(const std::vector<Bytes32>& keys,
                                                      const std::vector<std::string>& addresses) {
  if (keys.size() != addresses.size()) {
    throw Error(Errc::invalid_params, "need one address per server");
  }
  std::vector<DeploymentDescriptor::Server> out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out.push_back({static_cast<std::uint16_t>(i + 1), addresses[i], keys[i]});
  }
  return out;
}

}  // namespace

DeploymentDescriptor DeploymentDescriptor::for_keys(const basic::PublicKey& pk,
                                                    const std::vector<std::string>& addresses) {
  std::vector<Bytes32> keys;
  for (const auto& k : pk.cert_keys) keys.push_back(k.bytes);
  DeploymentDescriptor d;
  d.scheme = Scheme::lrsha;
  d.group = pk.params.group_id;
  d.max_epoch = pk.params.max_signatures;
  d.servers = server_list(keys, addresses);
  d.signer_key = pk.Y;
  return d;
}

DeploymentDescriptor DeploymentDescriptor::for_keys(const forward::VerifierKey& vk,
                                                    const std::vector<std::string>& addresses) {
  std::vector<Bytes32> keys(vk.roots.begin(), vk.roots.end());
  DeploymentDescriptor d;
  d.scheme = Scheme::flrsha;
  d.group = vk.params.group_id;
  d.max_epoch = vk.params.max_signatures;
  d.servers = server_list(keys, addresses);
  return d;
}

SchemeParams DeploymentDescriptor::params() const {
  return {scheme, group, max_epoch, static_cast<std::uint32_t>(servers.size())};
}

basic::PublicKey DeploymentDescriptor::public_key() const {
  if (scheme != Scheme::lrsha || !signer_key) {
    throw Error(Errc::invalid_params, "not an lrsha deployment");
  }
  basic::PublicKey pk;
  pk.params = params();
  pk.Y = *signer_key;
  for (const auto& s : servers) pk.cert_keys.push_back({s.key});
  return pk;
}

forward::VerifierKey DeploymentDescriptor::verifier_key() const {
  if (scheme != Scheme::flrsha) throw Error(Errc::invalid_params, "not an flrsha deployment");
  forward::VerifierKey vk;
  vk.params = params();
  for (const auto& s : servers) vk.roots.push_back(s.key);
  return vk;
}

std::string DeploymentDescriptor::to_json() const {
  const char* key_name = scheme == Scheme::lrsha ? "cert_key" : "root";
  json list = json::array();
  for (const auto& s : servers) {
    list.push_back({{"index", s.index}, {"address", s.address}, {key_name, to_hex(s.key)}});
  }
  json j{{"v", kVersion},
         {"scheme", std::string(to_string(scheme))},
         {"group", std::string(to_string(group))},
         {"max_epoch", max_epoch},
         {"servers", std::move(list)}};
  if (signer_key) j["signer_public_key"] = to_hex(signer_key->bytes);
  return j.dump(2) + "\n";
}

DeploymentDescriptor DeploymentDescriptor::from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) bad("not valid JSON");
  if (!j.is_object() || !j.contains("v") || j["v"] != kVersion) bad("unsupported version");
  if (!j.contains("scheme") || !j["scheme"].is_string()) bad("missing scheme");

  DeploymentDescriptor d;
  try {
    d.scheme = parse_scheme(j["scheme"].get<std::string>());
  } catch (const Error&) {
    bad("unknown scheme");
  }
  if (d.scheme == Scheme::lrsha) {
    expect_keys(j, {"v", "scheme", "group", "max_epoch", "servers", "signer_public_key"}, "descriptor");
  } else {
    expect_keys(j, {"v", "scheme", "group", "max_epoch", "servers"}, "descriptor");
  }
  if (!j["group"].is_string()) bad("group is not a string");
  try {
    d.group = parse_group_id(j["group"].get<std::string>());
  } catch (const Error&) {
    bad("unknown group");
  }
  if (!j["max_epoch"].is_number_unsigned() || j["max_epoch"].get<std::uint64_t>() == 0) {
    bad("max_epoch must be a positive integer");
  }
  d.max_epoch = j["max_epoch"].get<std::uint64_t>();

  const Group& g = group_by_id(d.group);
  const char* key_name = d.scheme == Scheme::lrsha ? "cert_key" : "root";
  const json& list = j["servers"];
  if (!list.is_array() || list.empty() || list.size() > 0xffff) bad("servers must list 1..65535 entries");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& s = list[i];
    expect_keys(s, {"index", "address", key_name}, "server entry");
    if (!s["index"].is_number_unsigned() || s["index"].get<std::uint64_t>() != i + 1) {
      bad("server indices must run 1..L in order");
    }
    if (!s["address"].is_string()) bad("address is not a string");
    Server entry;
    entry.index = static_cast<std::uint16_t>(i + 1);
    entry.address = s["address"].get<std::string>();
    try {
      comc::Address::parse(entry.address);
    } catch (const Error&) {
      bad("malformed address \"" + entry.address + "\"");
    }
    entry.key = key_from_hex(s[key_name], key_name);
    if (d.scheme == Scheme::lrsha && !g.decode_element(entry.key)) bad("cert_key is not a group element");
    d.servers.push_back(std::move(entry));
  }
  if (d.scheme == Scheme::lrsha) {
    Bytes32 y = key_from_hex(j["signer_public_key"], "signer_public_key");
    auto Y = g.decode_element(y);
    if (!Y) bad("signer_public_key is not a group element");
    d.signer_key = *Y;
  }
  return d;
}

}  // namespace lrsha::vclient
