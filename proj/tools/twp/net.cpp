#include "net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

namespace twp::cli {

namespace {

[[noreturn]] void die(const std::string& what) {
  throw std::runtime_error(what + ": " + std::strerror(errno));
}

sockaddr_in to_sockaddr(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1)
    throw std::runtime_error("bad IPv4 address: " + ep.host);
  return addr;
}

Endpoint from_sockaddr(const sockaddr_in& addr) {
  char buf[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &addr.sin_addr, buf, sizeof buf);
  return Endpoint{buf, ntohs(addr.sin_port)};
}

}  // namespace

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

Socket::~Socket() { close(); }

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

std::string Endpoint::to_string() const {
  return host + ":" + std::to_string(port);
}

Endpoint Endpoint::parse(const std::string& text) {
  auto colon = text.rfind(':');
  if (colon == std::string::npos)
    throw std::runtime_error("endpoint must be host:port, got '" + text + "'");
  Endpoint ep;
  ep.host = text.substr(0, colon);
  unsigned long port = std::stoul(text.substr(colon + 1));
  if (port == 0 || port > 65535)
    throw std::runtime_error("bad port in '" + text + "'");
  ep.port = static_cast<uint16_t>(port);
  return ep;
}

Socket tcp_listen(const Endpoint& ep, int backlog) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) die("socket");
  Socket sock(fd);
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = to_sockaddr(ep);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    die("bind " + ep.to_string());
  if (::listen(fd, backlog) != 0) die("listen");
  return sock;
}

Socket tcp_accept(Socket& listener) {
  int fd = ::accept(listener.fd(), nullptr, nullptr);
  if (fd < 0) die("accept");
  return Socket(fd);
}

Socket tcp_connect(const Endpoint& ep) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) die("socket");
  Socket sock(fd);
  sockaddr_in addr = to_sockaddr(ep);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    die("connect " + ep.to_string());
  return sock;
}

Socket udp_bind(const Endpoint& ep) {
  int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) die("socket");
  Socket sock(fd);
  sockaddr_in addr = to_sockaddr(ep);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    die("bind " + ep.to_string());
  return sock;
}

void udp_send(Socket& sock, const Endpoint& to, std::span<const uint8_t> data) {
  sockaddr_in addr = to_sockaddr(to);
  ::sendto(sock.fd(), data.data(), data.size(), 0,
           reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  // Probe datagrams are fire-and-forget; a failed send is a lost message.
}

std::optional<std::pair<std::vector<uint8_t>, Endpoint>> udp_recv(Socket& sock) {
  uint8_t buf[2048];
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ssize_t n = ::recvfrom(sock.fd(), buf, sizeof buf, 0,
                         reinterpret_cast<sockaddr*>(&addr), &len);
  if (n < 0) return std::nullopt;
  return std::make_pair(std::vector<uint8_t>(buf, buf + n),
                        from_sockaddr(addr));
}

void send_all(Socket& sock, std::span<const uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(sock.fd(), data.data() + off, data.size() - off, 0);
    if (n <= 0) {
      if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
      die("send");
    }
    off += static_cast<std::size_t>(n);
  }
}

void send_line(Socket& sock, const std::string& line) {
  std::string framed = line + "\n";
  send_all(sock, std::span<const uint8_t>(
                     reinterpret_cast<const uint8_t*>(framed.data()),
                     framed.size()));
}

bool StreamReader::feed() {
  uint8_t buf[4096];
  ssize_t n = ::recv(sock_.fd(), buf, sizeof buf, 0);
  if (n == 0) {
    eof_ = true;
    return false;
  }
  if (n < 0) {
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return true;
    eof_ = true;
    return false;
  }
  buf_.insert(buf_.end(), buf, buf + n);
  return true;
}

std::optional<std::string> StreamReader::take_line() {
  for (std::size_t i = 0; i < buf_.size(); ++i) {
    if (buf_[i] == '\n') {
      std::string line(buf_.begin(), buf_.begin() + static_cast<long>(i));
      buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(i) + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
  }
  return std::nullopt;
}

std::vector<uint8_t> StreamReader::take_bytes(std::size_t max_n) {
  std::size_t n = std::min(max_n, buf_.size());
  std::vector<uint8_t> out(buf_.begin(), buf_.begin() + static_cast<long>(n));
  buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(n));
  return out;
}

std::optional<std::string> StreamReader::read_line() {
  for (;;) {
    if (auto line = take_line()) return line;
    if (eof_) return std::nullopt;
    if (!feed() && buf_.empty()) return std::nullopt;
  }
}

std::vector<uint8_t> StreamReader::read_exact(std::size_t n) {
  while (buf_.size() < n) {
    if (eof_ || !feed())
      throw std::runtime_error("stream closed mid-transfer");
  }
  return take_bytes(n);
}

uint64_t wall_clock_ms() {
  using namespace std::chrono;
  return static_cast<uint64_t>(
      duration_cast<milliseconds>(system_clock::now().time_since_epoch())
          .count());
}

}  // namespace twp::cli
