#pragma once

#include <array>

#include "seafl/common/bytes.hpp"
#include "seafl/crypto/group.hpp"
#include "seafl/crypto/rng.hpp"

namespace seafl::crypto {

inline constexpr size_t kSignatureBytes = 64;
// Raw r || s, each 32 bytes big-endian.
using Signature = std::array<uint8_t, kSignatureBytes>;

struct SigKeyPair {
  Scalar secret;
  PointBytes public_key{};

  static SigKeyPair Generate(Rng& rng);
  static SigKeyPair FromSecret(const Scalar& secret);
};

// ECDSA over secp256k1 with SHA-256.
Signature Sign(const Scalar& secret, ByteSpan message);
// Never throws; malformed keys or signatures verify as false.
bool Verify(ByteSpan public_key, ByteSpan message, ByteSpan signature) noexcept;

}  // namespace seafl::crypto
