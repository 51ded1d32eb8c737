#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace seafl::protocol {

using Beacon = std::array<uint8_t, 32>;

// Picks k distinct indices out of [0, pool) with a partial Fisher-Yates
// shuffle driven by a PRG seeded from the public beacon, returned sorted.
// Uniform over k-subsets. Throws kInvalidK unless 1 <= k <= pool.
std::vector<uint32_t> SelectAssistingNodes(uint32_t pool, uint32_t k, const Beacon& beacon);

// Per-round beacon derived from a long-lived public seed.
Beacon RoundBeacon(const Beacon& base, uint32_t t);

}  // namespace seafl::protocol
