#pragma once

#include <cstdint>
#include <span>

#include "seafl/masking/masking.hpp"
#include "seafl/protocol/config.hpp"
#include "seafl/protocol/party.hpp"

namespace seafl::protocol {

// Reconstructs a dropped node's master secret from cfg.RecoveryThreshold()
// shares, re-derives its per-user seeds and recomputes its aggregate mask
// over `user_list`. Requires master-derived seeds.
// Throws kInsufficientShares, kDuplicateIndex, kEmptyList, kInvalidConfig.
masking::MaskVector RecoverOfflineNodeMask(std::span<const MasterShare> shares,
                                           std::span<const uint32_t> user_list, uint32_t t,
                                           const ProtocolConfig& cfg);

}  // namespace seafl::protocol
