#include "robotask/gateway/tcp_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace robotask::gateway {
namespace {

using nlohmann::json;

class LineClient {
 public:
  explicit LineClient(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    connected_ = ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0;
    timeval tv{5, 0};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  }
  ~LineClient() { ::close(fd_); }
  bool connected() const { return connected_; }

  void send(const std::string& line) {
    const std::string data = line + "\n";
    ASSERT_EQ(::send(fd_, data.data(), data.size(), 0), static_cast<ssize_t>(data.size()));
  }

  // Reads messages until one of `type` arrives (or timeout).
  std::optional<WireMessage> wait_for(const std::string& type) {
    while (true) {
      auto nl = buffer_.find('\n');
      while (nl != std::string::npos) {
        auto m = decode_envelope(buffer_.substr(0, nl));
        buffer_.erase(0, nl + 1);
        if (m.type == type) return m;
        nl = buffer_.find('\n');
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
      if (n <= 0) return std::nullopt;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_ = -1;
  bool connected_ = false;
  std::string buffer_;
};

HubConfig config() {
  HubConfig c;
  c.world = testing::eng2();
  c.catalog = testing::catalog();
  c.distractors = testing::distractors();
  c.noise = NoiseConfig{2, 42};
  return c;
}

TEST(TcpServer, SubwayOverSocket) {
  SessionHub hub(config());
  TcpServer server(hub, "127.0.0.1", 0);
  server.listen();
  ASSERT_NE(server.port(), 0);
  std::thread loop([&] { server.run(); });

  {
    LineClient c(server.port());
    ASSERT_TRUE(c.connected());
    c.send(R"({"session_id":"s1","seq":1,"type":"NewInstruction","payload":{"text":"Go to the Subway and buy @food@."}})");
    auto plan = c.wait_for("PlanProposed");
    ASSERT_TRUE(plan);
    EXPECT_EQ(plan->payload.at("steps").size(), 2u);

    c.send("this is not json");
    auto err = c.wait_for("Error");
    ASSERT_TRUE(err);
    EXPECT_EQ(err->payload.at("code"), "MalformedMessage");

    c.send(R"({"session_id":"s1","seq":2,"type":"Approve"})");
    auto options = c.wait_for("OptionsQuestion");
    ASSERT_TRUE(options);
    EXPECT_EQ(options->payload.at("options").size(), 4u);
    const auto q = options->payload.at("question_id").get<std::string>();
    c.send(encode(WireMessage{"s1", 3, "Select", json{{"question_id", q}, {"item", "Chili Chicken"}}}));
    auto done = c.wait_for("TaskDone");
    ASSERT_TRUE(done);
  }

  server.stop();
  loop.join();
  EXPECT_EQ(hub.view("s1")->phase, Phase::Done);
}

TEST(TcpServer, PortInUseFailsToBind) {
  SessionHub hub(config());
  TcpServer first(hub, "127.0.0.1", 0);
  first.listen();
  TcpServer second(hub, "127.0.0.1", first.port());
  EXPECT_THROW(second.listen(), std::system_error);
}

TEST(TcpServer, DefaultPortFromEnvironment) {
  ::setenv("ROBOTASK_PORT", "9911", 1);
  EXPECT_EQ(default_port(), 9911);
  ::setenv("ROBOTASK_PORT", "junk", 1);
  EXPECT_EQ(default_port(), 8765);
  ::unsetenv("ROBOTASK_PORT");
  EXPECT_EQ(default_port(), 8765);
}

}  // namespace
}  // namespace robotask::gateway
