#include "seafl/protocol/recovery.hpp"

#include <vector>

#include "seafl/common/error.hpp"
#include "seafl/crypto/shamir.hpp"

namespace seafl::protocol {

masking::MaskVector RecoverOfflineNodeMask(std::span<const MasterShare> shares,
                                           std::span<const uint32_t> user_list, uint32_t t,
                                           const ProtocolConfig& cfg) {
  if (cfg.seed_source != SeedSource::kMasterDerived) {
    Fail(ErrorCode::kInvalidConfig, "node recovery requires master-derived seeds");
  }
  const crypto::Scalar master = crypto::ShamirReconstruct(shares, cfg.RecoveryThreshold());
  std::vector<crypto::SharedSeed> seeds;
  seeds.reserve(user_list.size());
  for (uint32_t u : user_list) {
    if (u >= cfg.n) Fail(ErrorCode::kUnknownUser, "recovery list names an unknown user");
    seeds.push_back(SeedFromMaster(master, u));
  }
  return masking::NodeAggregateMask(seeds, t, cfg.d, cfg.integrity);
}

}  // namespace seafl::protocol
