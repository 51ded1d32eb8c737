#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "seafl/masking/masking.hpp"

namespace seafl::protocol {

enum class Mode : uint8_t { kSemiHonest, kMalicious };

// How the server compares its user list with each assisting node's list.
// kSizeOnly is the wire format with |L| alone; kDigest adds a 32-byte
// SHA-256 of the sorted list to every node aggregate.
enum class ListCheck : uint8_t { kSizeOnly, kDigest };

// kKeyExchange: seeds are the raw ECDH outputs. kMasterDerived: each node
// derives its per-user seeds from one master scalar, delivers them to users
// under the ECDH seed, and Shamir-shares the master with the other nodes so
// a dropped node's aggregate can be recomputed.
enum class SeedSource : uint8_t { kKeyExchange, kMasterDerived };

enum class Role : uint8_t { kUser = 1, kNode = 2, kServer = 3 };

struct PartyId {
  Role role = Role::kUser;
  uint32_t index = 0;

  friend auto operator<=>(const PartyId&, const PartyId&) = default;
};

inline PartyId UserId(uint32_t i) { return {Role::kUser, i}; }
inline PartyId NodeId(uint32_t j) { return {Role::kNode, j}; }
inline PartyId ServerId() { return {Role::kServer, 0}; }

std::string_view RoleName(Role role);
std::string ToString(const PartyId& id);

// Which optional fields a frame body carries, and the vector length.
struct WireFormat {
  uint32_t d = 1;
  bool malicious = false;
  bool integrity = false;
  bool list_digest = false;
};

struct ProtocolConfig {
  uint32_t n = 1;           // registered users
  uint32_t k = 2;           // assisting nodes active per round
  uint32_t d = 1;           // vector length
  double alpha = 0.5;       // participation threshold fraction
  double delta = 0.3;       // tolerated dropout fraction
  uint32_t iterations = 1;  // T
  Mode mode = Mode::kSemiHonest;
  bool integrity = false;
  masking::QuantizationConfig quant;
  std::chrono::milliseconds round_deadline{5000};
  ListCheck list_check = ListCheck::kSizeOnly;
  SeedSource seed_source = SeedSource::kKeyExchange;
  uint32_t node_pool = 0;           // y >= k nodes set up; 0 means y = k
  uint32_t recovery_threshold = 0;  // 0 means max(1, y - 1)
  bool reconcile = false;           // one star-topology re-forward pass on list mismatch
  std::array<uint8_t, 32> beacon{}; // public randomness for node selection

  // Throws Error(kInvalidConfig) describing the first violated constraint.
  void Validate() const;

  bool malicious() const { return mode == Mode::kMalicious; }
  uint32_t PoolSize() const { return node_pool == 0 ? k : node_pool; }
  uint32_t RecoveryThreshold() const;
  // ceil(alpha * n): minimum list size for a round to produce a sum.
  uint32_t Threshold() const;
  WireFormat wire() const;
};

// Canonical list of assisting nodes active in round t (sorted). With
// PoolSize() == k this is every node.
std::vector<uint32_t> ActiveNodes(const ProtocolConfig& cfg, uint32_t t);

}  // namespace seafl::protocol
