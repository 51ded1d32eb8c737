#include "seafl/protocol/messages.hpp"

namespace seafl::protocol {

bool IsKnownMessageType(uint8_t tag) { return tag >= 0x01 && tag <= 0x07; }

crypto::Digest ListDigest(const std::vector<uint32_t>& sorted_users) {
  Bytes buf;
  buf.reserve(4 + 4 * sorted_users.size());
  AppendU32Le(buf, static_cast<uint32_t>(sorted_users.size()));
  for (uint32_t u : sorted_users) AppendU32Le(buf, u);
  return crypto::Sha256({AsBytes("seafl-user-list"), buf});
}

}  // namespace seafl::protocol
