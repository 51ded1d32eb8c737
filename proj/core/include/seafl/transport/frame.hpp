#pragma once

// Length-prefixed framing:
//
//   length(4, LE) | msg_type(1) | sender_role(1) | sender_ordinal(4, LE) | body
//
// where length counts everything after itself, i.e. len(body) + 6.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>

#include "seafl/common/bytes.hpp"
#include "seafl/protocol/config.hpp"
#include "seafl/protocol/messages.hpp"

namespace seafl::transport {

inline constexpr size_t kFrameHeaderBytes = 6;
inline constexpr size_t kLengthPrefixBytes = 4;
inline constexpr size_t kDefaultMaxFrameBytes = size_t{256} << 20;

struct Frame {
  protocol::MessageType type = protocol::MessageType::kKeyAnnounce;
  protocol::PartyId sender;
  Bytes body;

  size_t WireSize() const { return kLengthPrefixBytes + kFrameHeaderBytes + body.size(); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

// Byte-oriented duplex stream. ReadSome returns 0 only at end of stream.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual void WriteAll(ByteSpan data) = 0;
  virtual size_t ReadSome(std::span<uint8_t> out) = 0;
};

Bytes EncodeFrame(const Frame& frame);
// Parses one complete encoded frame (with its length prefix). Throws
// kMalformedFrame / kFrameTooLarge.
Frame DecodeFrame(ByteSpan encoded, size_t max_frame_bytes = kDefaultMaxFrameBytes);

void FrameWrite(ByteStream& stream, const Frame& frame);
// Throws kConnectionClosed at end of stream (including mid-frame),
// kFrameTooLarge when the declared length exceeds the limit, and
// kMalformedFrame for an unknown type or role tag.
Frame FrameRead(ByteStream& stream, size_t max_frame_bytes = kDefaultMaxFrameBytes);

// In-memory loopback pipe. `max_chunk` caps every ReadSome so tests exercise
// partial reads.
class MemoryPipe final : public ByteStream {
 public:
  explicit MemoryPipe(size_t max_chunk = SIZE_MAX) : max_chunk_(max_chunk) {}

  void WriteAll(ByteSpan data) override;
  size_t ReadSome(std::span<uint8_t> out) override;
  size_t buffered() const { return buffer_.size(); }

 private:
  std::deque<uint8_t> buffer_;
  size_t max_chunk_;
};

}  // namespace seafl::transport
