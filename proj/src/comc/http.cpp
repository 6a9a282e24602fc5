#include "lrsha/http.hpp"

#include <charconv>

#include <httplib.h>

#include "lrsha/comc.hpp"
#include "lrsha/error.hpp"
#include "lrsha/wire.hpp"

namespace lrsha::comc {

Address Address::parse(std::string_view text) {
  Address a;
  std::string_view port = text;
  if (auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) a.host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), a.port);
  if (ec != std::errc() || p != port.data() + port.size() || a.port < 0 || a.port > 65535) {
    throw Error(Errc::invalid_params, "bad address \"" + std::string(text) + "\"");
  }
  return a;
}

std::string Address::str() const { return host + ":" + std::to_string(port); }

struct HttpServer::Impl {
  ComcServer& comc;
  httplib::Server http;
};

HttpServer::HttpServer(ComcServer& server) : impl_(new Impl{server, {}}) {
  impl_->http.Post(std::string(wire::kPath), [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(impl_->comc.handle(req.body), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = 0;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
  } else if (impl_->http.bind_to_port(host, port)) {
    bound = port;
  } else {
    bound = -1;
  }
  if (bound <= 0) throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->http.stop();
}

std::string http_post(const Address& to, std::string_view body, std::chrono::milliseconds timeout) {
  httplib::Client cli(to.host, to.port);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  auto res = cli.Post(std::string(wire::kPath), std::string(body), "application/json");
  if (!res) {
    throw Error(Errc::server_unreachable,
                to.str() + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(Errc::server_unreachable, to.str() + ": HTTP " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace lrsha::comc
