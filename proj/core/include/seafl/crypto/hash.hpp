#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "seafl/common/bytes.hpp"

namespace seafl::crypto {

using Digest = std::array<uint8_t, 32>;

// SHA-256 over the concatenation of the given pieces.
Digest Sha256(std::initializer_list<ByteSpan> pieces);

inline Digest Sha256(ByteSpan data) { return Sha256({data}); }

}  // namespace seafl::crypto
