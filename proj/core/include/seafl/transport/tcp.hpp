#pragma once

// Blocking TCP transport for the role binaries. One reader thread per
// connection feeds a shared inbox; writes on a connection are serialized by
// a per-connection mutex.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "seafl/transport/frame.hpp"

namespace seafl::transport {

struct Endpoint {
  std::string host = "127.0.0.1";
  uint16_t port = 0;

  std::string ToString() const { return host + ":" + std::to_string(port); }
};

// "host:port"; throws kInvalidConfig.
Endpoint ParseEndpoint(const std::string& text);

class TcpStream final : public ByteStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream() override;
  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  // Retries refused connections until `timeout` elapses. Throws kTimeout or
  // kIoError.
  static TcpStream Connect(const Endpoint& ep, std::chrono::milliseconds timeout);

  void WriteAll(ByteSpan data) override;
  size_t ReadSome(std::span<uint8_t> out) override;
  // Unblocks a concurrent reader.
  void Shutdown();
  bool valid() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

class TcpListener {
 public:
  // Port 0 binds an ephemeral port; see port().
  explicit TcpListener(const Endpoint& ep);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  // Throws kTimeout when no peer connects in time.
  TcpStream Accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// Frames received from any connection, in arrival order. A closed
// connection posts a frame-less item so owners can notice departures.
struct InboxItem {
  uint64_t connection = 0;
  std::optional<Frame> frame;
};

class Inbox {
 public:
  void Push(InboxItem item);
  // Returns nullopt when the deadline passes first.
  std::optional<InboxItem> PopUntil(std::chrono::steady_clock::time_point deadline);

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<InboxItem> items_;
};

class Connection {
 public:
  Connection(uint64_t id, TcpStream stream, Inbox& inbox,
             size_t max_frame_bytes = kDefaultMaxFrameBytes);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  uint64_t id() const { return id_; }
  // Throws kIoError / kConnectionClosed.
  void Send(const Frame& frame);
  void Close();
  const std::atomic<uint64_t>& body_bytes_sent() const { return body_bytes_; }

 private:
  void ReadLoop(Inbox& inbox, size_t max_frame_bytes);

  uint64_t id_;
  TcpStream stream_;
  std::mutex write_mu_;
  std::atomic<uint64_t> body_bytes_{0};
  std::thread reader_;
};

}  // namespace seafl::transport
