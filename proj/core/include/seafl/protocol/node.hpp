#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "seafl/commit/apvc.hpp"
#include "seafl/crypto/kx.hpp"
#include "seafl/crypto/sig.hpp"
#include "seafl/protocol/config.hpp"
#include "seafl/protocol/messages.hpp"
#include "seafl/protocol/party.hpp"

namespace seafl::protocol {

// An assisting node. Collects participation messages for each iteration into
// L_{j,t} and, at the round deadline, returns the sum of its PRF expansions
// over that list.
class NodeState {
 public:
  // The lowest-indexed node of the pool deals rho in integrity mode.
  static NodeState Generate(const ProtocolConfig& cfg, uint32_t index, crypto::Rng& rng);
  static NodeState FromKeys(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
                            std::optional<crypto::SigKeyPair> sig, crypto::Rng& rng);

  PartyId id() const { return NodeId(index_); }
  uint32_t index() const { return index_; }
  bool IsRhoDealer() const { return index_ == 0; }
  KeyAnnounce Announcement() const;

  // Derives per-user seeds and returns the setup ciphertexts to send: one
  // per user when this node deals rho or seeds are master-derived, otherwise
  // none. `users` is indexed by user ordinal. Throws kInvalidPoint.
  std::vector<SetupCiphertext> RegisterUsers(std::span<const PartyKeys> users, crypto::Rng& rng);
  void InstallServerKey(const crypto::PointBytes& server_sig);

  // Master-derived mode: Shamir shares of this node's master secret, share
  // i+1 destined for pool node i.
  std::vector<MasterShare> DealMasterShares(crypto::Rng& rng) const;
  void StorePeerShare(uint32_t owner_node, const MasterShare& share);
  std::optional<MasterShare> PeerShare(uint32_t owner_node) const;

  Verdict HandleParticipation(const PartyId& from, const ParticipationMsg& msg);
  // Throws kBelowThreshold if |L_{j,t}| < ceil(alpha n) and
  // kReplayedIteration if round t was already emitted or passed.
  AggregatedMaskMsg EmitAggregate(uint32_t t);
  // Recomputes the last emitted round over the server's list, adding any
  // forwarded participation messages that verify. Throws kBadSignature for
  // an unauthenticated request in malicious mode.
  AggregatedMaskMsg HandleReconcile(const ReconcileRequest& req);

  std::vector<uint32_t> ListFor(uint32_t t) const;
  const std::vector<crypto::SharedSeed>& seeds() const { return seeds_; }
  const std::optional<commit::ApvcKey>& rho() const { return rho_; }
  const crypto::KxKeyPair& kx() const { return kx_; }
  const std::optional<crypto::SigKeyPair>& sig() const { return sig_; }

 private:
  NodeState(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
            std::optional<crypto::SigKeyPair> sig, crypto::Rng& rng);

  bool VerifyParticipation(uint32_t user, const ParticipationMsg& msg) const;
  AggregatedMaskMsg BuildAggregate(uint32_t t, const std::vector<uint32_t>& list) const;

  ProtocolConfig cfg_;
  uint32_t index_;
  crypto::KxKeyPair kx_;
  std::optional<crypto::SigKeyPair> sig_;
  std::optional<crypto::Scalar> master_;
  std::optional<commit::ApvcKey> rho_;
  std::vector<crypto::SharedSeed> seeds_;  // indexed by user ordinal
  std::vector<std::optional<crypto::PointBytes>> user_sig_;
  std::optional<crypto::PointBytes> server_sig_;
  std::map<uint32_t, MasterShare> peer_shares_;
  std::map<uint32_t, std::set<uint32_t>> lists_;  // t -> L_{j,t}
  std::optional<uint32_t> last_emitted_;
  std::vector<uint32_t> last_list_;
};

}  // namespace seafl::protocol
