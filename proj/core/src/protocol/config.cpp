#include "seafl/protocol/config.hpp"

#include <cmath>
#include <numeric>

#include "seafl/common/error.hpp"
#include "seafl/protocol/selection.hpp"

namespace seafl::protocol {

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kUser: return "user";
    case Role::kNode: return "node";
    case Role::kServer: return "server";
  }
  return "unknown";
}

std::string ToString(const PartyId& id) {
  return std::string(RoleName(id.role)) + "#" + std::to_string(id.index);
}

void ProtocolConfig::Validate() const {
  auto bad = [](const std::string& why) { Fail(ErrorCode::kInvalidConfig, why); };
  if (n < 1) bad("n must be >= 1");
  if (k < 1) bad("k must be >= 1");
  if (d < 1) bad("d must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) bad("alpha must lie in (0, 1]");
  if (!(delta >= 0.0 && delta < 1.0)) bad("delta must lie in [0, 1)");
  // Small tolerance so that e.g. alpha=0.7, delta=0.3 is accepted.
  if (1.0 - delta < alpha - 1e-12) bad("need (1 - delta) >= alpha");
  if (PoolSize() < k) bad("node_pool must be >= k");
  quant.Validate();
  if (n > quant.max_contributors) bad("n exceeds quantization max_contributors");
  if (seed_source == SeedSource::kMasterDerived) {
    const uint32_t th = RecoveryThreshold();
    if (th < 1 || th > PoolSize()) bad("recovery_threshold must lie in [1, node_pool]");
  }
}

uint32_t ProtocolConfig::RecoveryThreshold() const {
  if (recovery_threshold != 0) return recovery_threshold;
  return PoolSize() > 1 ? PoolSize() - 1 : 1;
}

uint32_t ProtocolConfig::Threshold() const {
  // Guard against alpha*n landing a hair above an integer from rounding.
  const double exact = alpha * static_cast<double>(n);
  const double rounded = std::nearbyint(exact);
  if (std::fabs(exact - rounded) < 1e-9) return static_cast<uint32_t>(rounded);
  return static_cast<uint32_t>(std::ceil(exact));
}

WireFormat ProtocolConfig::wire() const {
  return {d, malicious(), integrity, list_check == ListCheck::kDigest};
}

std::vector<uint32_t> ActiveNodes(const ProtocolConfig& cfg, uint32_t t) {
  if (cfg.PoolSize() == cfg.k) {
    std::vector<uint32_t> all(cfg.k);
    std::iota(all.begin(), all.end(), 0u);
    return all;
  }
  return SelectAssistingNodes(cfg.PoolSize(), cfg.k, RoundBeacon(cfg.beacon, t));
}

}  // namespace seafl::protocol
