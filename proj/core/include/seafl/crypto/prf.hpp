#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seafl/crypto/group.hpp"
#include "seafl/crypto/kx.hpp"

namespace seafl::crypto {

// Mask expansion: AES-128-CTR keyed by SHA-256(seed || "mask")[0..16). The
// counter block for lane L of iteration t is
//   t (4 B big-endian) || 0x00000000 || L (8 B big-endian)
// and each 16-byte block yields four little-endian 32-bit ring elements, so
// the output for d is a prefix of the output for any larger d.
std::vector<uint32_t> PrfExpandMasks(const SharedSeed& seed, uint32_t t, size_t d);

// acc[i] += PrfExpandMasks(seed, t, acc.size())[i]  (mod 2^32)
void PrfAccumulateMasks(const SharedSeed& seed, uint32_t t, std::span<uint32_t> acc);

// SHA-256(seed || "rho-lane" || t_be32) reduced mod p.
Scalar PrfDeriveScalar(const SharedSeed& seed, uint32_t t);

}  // namespace seafl::crypto
