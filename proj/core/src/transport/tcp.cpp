#include "seafl/transport/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "seafl/common/error.hpp"

namespace seafl::transport {
namespace {

[[noreturn]] void FailErrno(const std::string& what) {
  Fail(ErrorCode::kIoError, what + ": " + std::strerror(errno));
}

sockaddr_in Resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = getaddrinfo(ep.host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr) {
    Fail(ErrorCode::kIoError, "cannot resolve " + ep.host + ": " + gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}

}  // namespace

Endpoint ParseEndpoint(const std::string& text) {
  const size_t colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    Fail(ErrorCode::kInvalidConfig, "endpoint must be host:port, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  unsigned long port = 0;
  try {
    size_t used = 0;
    port = std::stoul(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    Fail(ErrorCode::kInvalidConfig, "bad port in endpoint '" + text + "'");
  }
  if (port > 65535) Fail(ErrorCode::kInvalidConfig, "port out of range in '" + text + "'");
  ep.port = static_cast<uint16_t>(port);
  return ep;
}

TcpStream::~TcpStream() {
  if (fd_ >= 0) ::close(fd_);
}

TcpStream::TcpStream(TcpStream&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
  std::swap(fd_, other.fd_);
  return *this;
}

TcpStream TcpStream::Connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = Resolve(ep);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) FailErrno("socket");
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return TcpStream(fd);
    }
    const int err = errno;
    ::close(fd);
    if (err != ECONNREFUSED && err != ECONNRESET && err != ETIMEDOUT) {
      errno = err;
      FailErrno("connect " + ep.ToString());
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      Fail(ErrorCode::kTimeout, "could not connect to " + ep.ToString());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

void TcpStream::WriteAll(ByteSpan data) {
  size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE || errno == ECONNRESET) Fail(ErrorCode::kConnectionClosed, "peer closed connection");
      FailErrno("send");
    }
    done += static_cast<size_t>(n);
  }
}

size_t TcpStream::ReadSome(std::span<uint8_t> out) {
  for (;;) {
    const ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
    if (n >= 0) return static_cast<size_t>(n);
    if (errno == EINTR) continue;
    if (errno == ECONNRESET) return 0;
    FailErrno("recv");
  }
}

void TcpStream::Shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

TcpListener::TcpListener(const Endpoint& ep) {
  const sockaddr_in addr = Resolve(ep);
  fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) FailErrno("socket");
  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    FailErrno("bind " + ep.ToString());
  }
  if (::listen(fd_, 128) != 0) FailErrno("listen");
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

TcpStream TcpListener::Accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  for (;;) {
    const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) FailErrno("poll");
    if (rc == 0) Fail(ErrorCode::kTimeout, "no connection within " + std::to_string(timeout.count()) + " ms");
    break;
  }
  const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
  if (fd < 0) FailErrno("accept");
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return TcpStream(fd);
}

void Inbox::Push(InboxItem item) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    items_.push_back(std::move(item));
  }
  cv_.notify_one();
}

std::optional<InboxItem> Inbox::PopUntil(std::chrono::steady_clock::time_point deadline) {
  std::unique_lock<std::mutex> lock(mu_);
  if (!cv_.wait_until(lock, deadline, [this] { return !items_.empty(); })) return std::nullopt;
  std::optional<InboxItem> out;
  out.emplace(std::move(items_.front()));
  items_.pop_front();
  return out;
}

Connection::Connection(uint64_t id, TcpStream stream, Inbox& inbox, size_t max_frame_bytes)
    : id_(id), stream_(std::move(stream)) {
  reader_ = std::thread([this, &inbox, max_frame_bytes] { ReadLoop(inbox, max_frame_bytes); });
}

Connection::~Connection() { Close(); }

void Connection::Send(const Frame& frame) {
  std::lock_guard<std::mutex> lock(write_mu_);
  FrameWrite(stream_, frame);
  body_bytes_ += frame.body.size();
}

void Connection::Close() {
  stream_.Shutdown();
  if (reader_.joinable()) reader_.join();
}

void Connection::ReadLoop(Inbox& inbox, size_t max_frame_bytes) {
  for (;;) {
    InboxItem item;
    item.connection = id_;
    try {
      item.frame.emplace(FrameRead(stream_, max_frame_bytes));
      inbox.Push(std::move(item));
    } catch (const Error&) {
      // Closed or corrupt: either way the peer is gone for this session.
      item.frame.reset();
      inbox.Push(std::move(item));
      return;
    }
  }
}

}  // namespace seafl::transport
