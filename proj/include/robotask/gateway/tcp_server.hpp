#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "robotask/gateway/session_hub.hpp"

namespace robotask::gateway {

/// Port from ROBOTASK_PORT, else 8765.
std::uint16_t default_port();

/// Newline-delimited JSON over TCP, one thread per connection.
class TcpServer {
 public:
  TcpServer(SessionHub& hub, std::string host, std::uint16_t port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and listens. Throws std::system_error when the address is taken.
  void listen();
  /// Actual port (useful after binding port 0).
  std::uint16_t port() const { return port_; }

  /// Accept loop; returns after stop(). Calls hub.tick periodically.
  void run();
  void stop();

 private:
  void serve_connection(int fd);

  SessionHub& hub_;
  std::string host_;
  std::uint16_t port_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex threads_mu_;
  std::vector<std::thread> threads_;
  std::vector<int> client_fds_;
};

}  // namespace robotask::gateway
