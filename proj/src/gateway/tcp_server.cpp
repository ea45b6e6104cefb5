#include "robotask/gateway/tcp_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <system_error>

namespace robotask::gateway {

namespace {

constexpr std::size_t kMaxLine = 1 << 20;

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      return;
    }
    off += static_cast<std::size_t>(n);
  }
}

}  // namespace

std::uint16_t default_port() {
  if (const char* env = std::getenv("ROBOTASK_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 65536) {
      return static_cast<std::uint16_t>(v);
    }
  }
  return 8765;
}

TcpServer::TcpServer(SessionHub& hub, std::string host, std::uint16_t port)
    : hub_(hub), host_(std::move(host)), port_(port) {}

TcpServer::~TcpServer() {
  stop();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(threads_mu_);
    threads.swap(threads_);
  }
  for (auto& t : threads) {
    if (t.joinable()) {
      t.join();
    }
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
  }
}

void TcpServer::listen() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) {
    throw_errno("socket");
  }
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
    throw std::system_error(std::make_error_code(std::errc::invalid_argument), "bad listen address " + host_);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw_errno("bind " + host_ + ":" + std::to_string(port_));
  }
  if (::listen(listen_fd_, 16) != 0) {
    throw_errno("listen");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

void TcpServer::run() {
  if (listen_fd_ < 0) {
    listen();
  }
  while (!stopping_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 200);
    hub_.tick(Clock::now());
    if (ready <= 0 || stopping_) {
      continue;
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      continue;
    }
    std::lock_guard lock(threads_mu_);
    client_fds_.push_back(fd);
    threads_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpServer::stop() {
  stopping_ = true;
  std::lock_guard lock(threads_mu_);
  for (int fd : client_fds_) {
    ::shutdown(fd, SHUT_RDWR);
  }
}

void TcpServer::serve_connection(int fd) {
  const ConnectionId id = hub_.connect([fd](const std::string& line) { write_all(fd, line + "\n"); });
  std::string buffer;
  char chunk[4096];
  bool overflow = false;
  while (!stopping_) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) {
      continue;
    }
    if (n <= 0) {
      break;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(buffer.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
      }
      if (!line.empty()) {
        hub_.receive(id, line);
      }
    }
    buffer.erase(0, start);
    if (buffer.size() > kMaxLine) {
      overflow = true;
      break;
    }
  }
  if (overflow) {
    write_all(fd, R"({"session_id":"","seq":0,"type":"Error","payload":{"code":"MalformedMessage","message":"line too long"}})"
                  "\n");
  }
  hub_.disconnect(id);
  std::lock_guard lock(threads_mu_);
  client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd), client_fds_.end());
  ::close(fd);
}

}  // namespace robotask::gateway
