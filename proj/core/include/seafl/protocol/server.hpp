#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "seafl/commit/apvc.hpp"
#include "seafl/crypto/sig.hpp"
#include "seafl/protocol/config.hpp"
#include "seafl/protocol/messages.hpp"
#include "seafl/protocol/party.hpp"

namespace seafl::protocol {

// One assisting node's input to finalization. `recovered` marks a substitute
// the server rebuilt from Shamir shares; it carries no node signature.
struct NodeContribution {
  uint32_t node = 0;
  AggregatedMaskMsg msg;
  bool recovered = false;
};

// The aggregation server. Buffers masked updates into L_{S,t}, then
// finalizes once the active nodes' aggregates are in.
class ServerState {
 public:
  static ServerState Generate(const ProtocolConfig& cfg, crypto::Rng& rng);
  static ServerState FromKeys(const ProtocolConfig& cfg, std::optional<crypto::SigKeyPair> sig);

  // Semi-honest servers hold no keys and announce nothing.
  std::optional<KeyAnnounce> Announcement() const;
  void RegisterUsers(std::span<const PartyKeys> users);
  void RegisterNodes(std::span<const PartyKeys> nodes);

  Verdict IngestUpdate(const PartyId& from, const MaskedUpdate& msg);
  // Star topology: a copy of a user's participation message, kept so it can
  // be re-forwarded during reconciliation.
  Verdict IngestRelayedParticipation(const PartyId& from, const ParticipationMsg& msg);

  std::vector<uint32_t> OnlineUsers(uint32_t t) const;

  // Unmasks the sum over L_{S,t}. Errors: kReplayedIteration,
  // kBelowThreshold, kMissingNodeMessage, kBadNodeSignature,
  // kLengthMismatch, kListMismatch. On error the round stays open.
  RoundResult FinalizeRound(uint32_t t, std::span<const NodeContribution> node_msgs);

  ReconcileRequest BuildReconcileRequest(uint32_t t) const;

  // Rebuilds a dropped node's aggregate over L_{S,t} from shares of its
  // master secret. Throws kInsufficientShares.
  NodeContribution RecoverNodeContribution(uint32_t t, uint32_t dropped_node,
                                           std::span<const MasterShare> shares) const;

  const std::optional<crypto::SigKeyPair>& sig() const { return sig_; }

 private:
  ServerState(const ProtocolConfig& cfg, std::optional<crypto::SigKeyPair> sig);

  struct RoundBuffer {
    std::map<uint32_t, MaskedUpdate> updates;
    std::map<uint32_t, ParticipationMsg> participations;
  };

  ProtocolConfig cfg_;
  std::optional<crypto::SigKeyPair> sig_;
  std::vector<std::optional<crypto::PointBytes>> user_sig_;
  std::vector<std::optional<crypto::PointBytes>> node_sig_;
  std::shared_ptr<const commit::ApvcParams> params_;
  std::map<uint32_t, RoundBuffer> rounds_;
  std::optional<uint32_t> last_finalized_;
};

}  // namespace seafl::protocol
