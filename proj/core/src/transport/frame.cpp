#include "seafl/transport/frame.hpp"

#include <algorithm>
#include <string>

#include "seafl/common/error.hpp"

namespace seafl::transport {
namespace {

bool IsKnownRole(uint8_t tag) { return tag >= 1 && tag <= 3; }

Frame ParseAfterLength(ByteSpan rest) {
  if (rest.size() < kFrameHeaderBytes) Fail(ErrorCode::kMalformedFrame, "frame shorter than its header");
  if (!protocol::IsKnownMessageType(rest[0])) {
    Fail(ErrorCode::kMalformedFrame, "unknown message type " + std::to_string(rest[0]));
  }
  if (!IsKnownRole(rest[1])) Fail(ErrorCode::kMalformedFrame, "unknown sender role " + std::to_string(rest[1]));
  Frame f;
  f.type = static_cast<protocol::MessageType>(rest[0]);
  f.sender = {static_cast<protocol::Role>(rest[1]), LoadU32Le(rest.data() + 2)};
  f.body.assign(rest.begin() + kFrameHeaderBytes, rest.end());
  return f;
}

void ReadExact(ByteStream& stream, std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    const size_t n = stream.ReadSome(out.subspan(done));
    if (n == 0) Fail(ErrorCode::kConnectionClosed, "stream closed while reading a frame");
    done += n;
  }
}

}  // namespace

Bytes EncodeFrame(const Frame& frame) {
  const size_t len = frame.body.size() + kFrameHeaderBytes;
  if (len > UINT32_MAX) Fail(ErrorCode::kFrameTooLarge, "frame body exceeds 4 GiB");
  Bytes out;
  out.reserve(kLengthPrefixBytes + len);
  AppendU32Le(out, static_cast<uint32_t>(len));
  out.push_back(static_cast<uint8_t>(frame.type));
  out.push_back(static_cast<uint8_t>(frame.sender.role));
  AppendU32Le(out, frame.sender.index);
  Append(out, frame.body);
  return out;
}

Frame DecodeFrame(ByteSpan encoded, size_t max_frame_bytes) {
  if (encoded.size() < kLengthPrefixBytes) Fail(ErrorCode::kMalformedFrame, "missing length prefix");
  const uint32_t len = LoadU32Le(encoded.data());
  if (len > max_frame_bytes) Fail(ErrorCode::kFrameTooLarge, "declared frame length " + std::to_string(len));
  if (encoded.size() - kLengthPrefixBytes != len) {
    Fail(ErrorCode::kMalformedFrame, "frame length prefix does not match buffer");
  }
  return ParseAfterLength(encoded.subspan(kLengthPrefixBytes));
}

void FrameWrite(ByteStream& stream, const Frame& frame) { stream.WriteAll(EncodeFrame(frame)); }

Frame FrameRead(ByteStream& stream, size_t max_frame_bytes) {
  uint8_t prefix[kLengthPrefixBytes];
  ReadExact(stream, prefix);
  const uint32_t len = LoadU32Le(prefix);
  if (len > max_frame_bytes) Fail(ErrorCode::kFrameTooLarge, "declared frame length " + std::to_string(len));
  if (len < kFrameHeaderBytes) Fail(ErrorCode::kMalformedFrame, "frame shorter than its header");
  Bytes rest(len);
  ReadExact(stream, rest);
  return ParseAfterLength(rest);
}

void MemoryPipe::WriteAll(ByteSpan data) { buffer_.insert(buffer_.end(), data.begin(), data.end()); }

size_t MemoryPipe::ReadSome(std::span<uint8_t> out) {
  const size_t n = std::min({out.size(), buffer_.size(), max_chunk_});
  std::copy_n(buffer_.begin(), n, out.begin());
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(n));
  return n;
}

}  // namespace seafl::transport
