#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace lrsha::comc {

class ComcServer;

// "host:port" or ":port" or "port".
struct Address {
  std::string host = "127.0.0.1";
  int port = 0;

  static Address parse(std::string_view text);
  std::string str() const;
};

// HTTP front end: POST /comc with a wire request body.
class HttpServer {
 public:
  explicit HttpServer(ComcServer& server);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks an ephemeral one. Throws io_error.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One request/response exchange. Throws server_unreachable on transport
// failure or a non-200 status.
std::string http_post(const Address& to, std::string_view body,
                      std::chrono::milliseconds timeout = std::chrono::seconds(10));

}  // namespace lrsha::comc
