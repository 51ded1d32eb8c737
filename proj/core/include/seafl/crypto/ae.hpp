#pragma once

#include <array>

#include "seafl/common/bytes.hpp"
#include "seafl/crypto/kx.hpp"

namespace seafl::crypto {

using Nonce = std::array<uint8_t, 12>;

inline constexpr size_t kAeTagBytes = 16;

// Each seed encrypts at most one message per purpose, so nonces are fixed
// purpose labels.
inline constexpr Nonce kRhoNonce = {'r', 'h', 'o', '-', 'd', 'i', 's', 't', 0, 0, 0, 0};
inline constexpr Nonce kSeedNonce = {'s', 'e', 'e', 'd', '-', 'd', 'i', 's', 't', 0, 0, 0};

// AES-256-GCM. Output is ciphertext || 16-byte tag.
Bytes AeEncrypt(const SharedSeed& seed, ByteSpan plaintext, const Nonce& nonce);
// Throws Error(kAuthFailure) if the tag does not verify.
Bytes AeDecrypt(const SharedSeed& seed, ByteSpan ciphertext, const Nonce& nonce);

}  // namespace seafl::crypto
