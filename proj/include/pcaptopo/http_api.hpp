#pragma once

#include "pcaptopo/session.hpp"

#include <memory>
#include <optional>
#include <string>

namespace pcaptopo {

inline constexpr int kDefaultPort = 8080;

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks a free port
  std::optional<std::string> static_dir;
};

/// Port from PCAPTOPO_PORT when set and valid, else `fallback`.
int port_from_env(int fallback = kDefaultPort);

/// HTTP/JSON front end over one Session.
class ApiServer {
 public:
  ApiServer(Session& session, ServerOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the listening socket and returns the bound port. Throws on failure.
  int bind();
  /// Serves until stop(). Binds first if needed.
  void listen();
  /// listen() on a background thread; returns the bound port.
  int start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pcaptopo
