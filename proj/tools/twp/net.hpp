#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace twp::cli {

// Thin RAII wrapper over a POSIX socket fd.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
};

struct Endpoint {
  std::string host;
  uint16_t port = 0;

  std::string to_string() const;
  static Endpoint parse(const std::string& text);  // "host:port"
};

Socket tcp_listen(const Endpoint& ep, int backlog = 16);
Socket tcp_accept(Socket& listener);
Socket tcp_connect(const Endpoint& ep);

Socket udp_bind(const Endpoint& ep);
void udp_send(Socket& sock, const Endpoint& to, std::span<const uint8_t> data);
// Returns (payload, sender) or nullopt on transient failure.
std::optional<std::pair<std::vector<uint8_t>, Endpoint>> udp_recv(Socket& sock);

void send_all(Socket& sock, std::span<const uint8_t> data);
void send_line(Socket& sock, const std::string& line_without_newline);

// Incremental line/byte reader over a stream socket.
class StreamReader {
 public:
  explicit StreamReader(Socket& sock) : sock_(sock) {}

  // nullopt means the peer closed; blocks until a full line or EOF.
  std::optional<std::string> read_line();
  // Pull exactly n bytes (line buffer first, then the socket).
  std::vector<uint8_t> read_exact(std::size_t n);
  // Nonblocking feed for poll loops: false once the peer closed.
  bool feed();
  std::optional<std::string> take_line();
  std::vector<uint8_t> take_bytes(std::size_t max_n);
  std::size_t buffered() const { return buf_.size(); }

 private:
  Socket& sock_;
  std::vector<uint8_t> buf_;
  bool eof_ = false;
};

// Milliseconds since the Unix epoch on the system clock.
uint64_t wall_clock_ms();

}  // namespace twp::cli
