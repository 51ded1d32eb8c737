#pragma once

#include <array>

#include "seafl/common/bytes.hpp"
#include "seafl/crypto/group.hpp"
#include "seafl/crypto/rng.hpp"

namespace seafl::crypto {

// 32-byte secret shared by one user and one assisting node.
struct SharedSeed {
  std::array<uint8_t, 32> bytes{};
  friend bool operator==(const SharedSeed&, const SharedSeed&) = default;
};

struct KxKeyPair {
  Scalar secret;
  PointBytes public_key{};

  static KxKeyPair Generate(Rng& rng);
  static KxKeyPair FromSecret(const Scalar& secret);
};

// ECDH on secp256k1; the seed is SHA-256 over a label and the shared
// point's compressed encoding. Throws kInvalidPoint for undecodable or
// identity public keys.
SharedSeed KxDerive(const Scalar& my_secret, ByteSpan their_public);

}  // namespace seafl::crypto
