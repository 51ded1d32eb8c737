#pragma once

// In-process deployment: one server, the node pool and n users exchanging
// real encoded frames over a SimNetwork. Setup runs in the constructor; each
// RunRound drives one iteration to completion and reports the outcome next
// to a plaintext-sum oracle.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "seafl/common/error.hpp"
#include "seafl/protocol/node.hpp"
#include "seafl/protocol/server.hpp"
#include "seafl/protocol/user.hpp"
#include "seafl/transport/sim.hpp"

namespace seafl::harness {

using masking::GradientVector;

enum class Phase { kSetup, kAggregation };
std::string_view PhaseName(Phase phase);

struct PartyCost {
  double compute_ms = 0.0;
  uint64_t body_bytes = 0;
  uint64_t frame_bytes = 0;
};

struct PhaseCosts {
  std::vector<PartyCost> users;
  std::vector<PartyCost> nodes;  // indexed by pool ordinal
  PartyCost server;
};

struct RoundFaults {
  std::set<uint32_t> offline_users;  // send nothing this round
  std::set<uint32_t> late_users;     // every message arrives after the deadline
  // user -> nodes that never receive that user's participation message
  std::map<uint32_t, std::set<uint32_t>> lost_participations;
  // Crash after setup; rebuilt from master shares when seeds are master-derived.
  std::set<uint32_t> offline_nodes;
  bool tamper_result = false;  // server adds 1 to w[0] before broadcasting
};

struct RoundReport {
  uint32_t t = 0;
  std::optional<protocol::RoundResult> result;  // as broadcast
  std::optional<ErrorCode> error;
  std::string error_message;
  std::vector<uint32_t> online;      // L_{S,t}
  GradientVector expected;           // plaintext modular sum over `online`
  bool oracle_match = false;
  std::vector<uint32_t> recovered_nodes;
  bool reconciled = false;
  // Integrity mode: each user's verdict on the result it received.
  std::vector<std::optional<bool>> user_accepts;
  PhaseCosts costs;

  bool ok() const { return result.has_value(); }
};

// Sum mod 2^32 of the selected inputs.
GradientVector PlaintextSum(std::span<const GradientVector> inputs, std::span<const uint32_t> which);

class LocalDeployment {
 public:
  LocalDeployment(const protocol::ProtocolConfig& cfg, uint64_t seed, transport::SimPolicy policy = {});

  const protocol::ProtocolConfig& config() const { return cfg_; }
  const PhaseCosts& setup_costs() const { return setup_costs_; }

  // inputs[i] belongs to user i; entries of offline users are ignored.
  RoundReport RunRound(uint32_t t, std::span<const GradientVector> inputs, const RoundFaults& faults = {});
  // Real-valued inputs; quantization runs inside each user's timed span.
  RoundReport RunRound(uint32_t t, std::span<const std::vector<double>> inputs,
                       const RoundFaults& faults = {});

  protocol::UserState& user(uint32_t i) { return users_.at(i); }
  protocol::NodeState& node(uint32_t j) { return nodes_.at(j); }
  protocol::ServerState& server() { return server_; }

 private:
  struct PartyKeysView {
    std::vector<protocol::PartyKeys> users;
    std::vector<protocol::PartyKeys> nodes;
    std::optional<crypto::PointBytes> server_sig;
  };

  void Setup();
  void DeliverAll(transport::SimTime until, PhaseCosts& costs);
  void Dispatch(const transport::Delivery& d, PhaseCosts& costs);
  PartyCost& CostOf(PhaseCosts& costs, const protocol::PartyId& who);
  void Send(const protocol::PartyId& to, protocol::MessageType type, const protocol::PartyId& from, Bytes body);
  void CollectTraffic(PhaseCosts& costs) const;
  RoundReport RunRoundImpl(uint32_t t, const std::vector<GradientVector>& expected_inputs,
                           const std::function<protocol::UserRoundOutput(uint32_t)>& make,
                           const RoundFaults& faults);

  protocol::ProtocolConfig cfg_;
  protocol::WireFormat wf_;
  crypto::DeterministicRng rng_;
  transport::SimNetwork net_;
  protocol::ServerState server_;
  std::vector<protocol::NodeState> nodes_;
  std::vector<protocol::UserState> users_;
  std::vector<PartyKeysView> user_views_;  // what each user learned
  std::vector<PartyKeysView> node_views_;
  PartyKeysView server_view_;
  PhaseCosts setup_costs_;

  // Per-round scratch read by the network policy and the dispatcher.
  const RoundFaults* faults_ = nullptr;
  uint32_t round_t_ = 0;
  transport::SimTime deadline_ = 0;
  std::vector<protocol::NodeContribution> inbound_aggregates_;
  std::vector<std::optional<protocol::RoundResult>> received_results_;
};

}  // namespace seafl::harness
