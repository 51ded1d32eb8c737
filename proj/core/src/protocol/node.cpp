#include "seafl/protocol/node.hpp"

#include <algorithm>
#include <string>

#include "seafl/common/error.hpp"
#include "seafl/crypto/ae.hpp"
#include "seafl/crypto/shamir.hpp"
#include "seafl/masking/masking.hpp"
#include "seafl/transport/codec.hpp"

namespace seafl::protocol {

NodeState::NodeState(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
                     std::optional<crypto::SigKeyPair> sig, crypto::Rng& rng)
    : cfg_(cfg), index_(index), kx_(std::move(kx)), sig_(std::move(sig)) {
  cfg_.Validate();
  if (index_ >= cfg_.PoolSize()) Fail(ErrorCode::kUnknownNode, "node index out of range");
  if (cfg_.malicious() && !sig_) Fail(ErrorCode::kInvalidConfig, "malicious mode needs a signing key");
  if (cfg_.seed_source == SeedSource::kMasterDerived) master_ = crypto::Scalar::Random(rng);
  if (cfg_.integrity && IsRhoDealer()) rho_ = commit::ApvcKey::Generate(rng);
}

NodeState NodeState::Generate(const ProtocolConfig& cfg, uint32_t index, crypto::Rng& rng) {
  auto kx = crypto::KxKeyPair::Generate(rng);
  std::optional<crypto::SigKeyPair> sig;
  if (cfg.malicious()) sig = crypto::SigKeyPair::Generate(rng);
  return NodeState(cfg, index, std::move(kx), std::move(sig), rng);
}

NodeState NodeState::FromKeys(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
                              std::optional<crypto::SigKeyPair> sig, crypto::Rng& rng) {
  return NodeState(cfg, index, std::move(kx), std::move(sig), rng);
}

KeyAnnounce NodeState::Announcement() const {
  KeyAnnounce a;
  a.kx_public = kx_.public_key;
  if (sig_) a.sig_public = sig_->public_key;
  return a;
}

std::vector<SetupCiphertext> NodeState::RegisterUsers(std::span<const PartyKeys> users, crypto::Rng&) {
  if (users.size() != cfg_.n) {
    Fail(ErrorCode::kInvalidConfig, "expected keys for " + std::to_string(cfg_.n) + " users");
  }
  seeds_.clear();
  user_sig_.clear();
  std::vector<SetupCiphertext> out;
  for (uint32_t i = 0; i < users.size(); ++i) {
    if (cfg_.malicious() && !users[i].sig) Fail(ErrorCode::kInvalidConfig, "malicious mode needs user signing keys");
    const crypto::SharedSeed kx_seed = crypto::KxDerive(kx_.secret, users[i].kx);
    user_sig_.push_back(users[i].sig);

    SetupCiphertext ct;
    ct.user = i;
    if (rho_) ct.rho_ct = crypto::AeEncrypt(kx_seed, rho_->rho().bytes(), crypto::kRhoNonce);
    if (master_) {
      const crypto::SharedSeed derived = SeedFromMaster(*master_, i);
      ct.seed_ct = crypto::AeEncrypt(kx_seed, derived.bytes, crypto::kSeedNonce);
      seeds_.push_back(derived);
    } else {
      seeds_.push_back(kx_seed);
    }
    if (!ct.rho_ct.empty() || !ct.seed_ct.empty()) out.push_back(std::move(ct));
  }
  return out;
}

void NodeState::InstallServerKey(const crypto::PointBytes& server_sig) { server_sig_ = server_sig; }

std::vector<MasterShare> NodeState::DealMasterShares(crypto::Rng& rng) const {
  if (!master_) Fail(ErrorCode::kInvalidConfig, "master shares require master-derived seeds");
  return crypto::ShamirSplit(*master_, cfg_.RecoveryThreshold(), cfg_.PoolSize(), rng);
}

void NodeState::StorePeerShare(uint32_t owner_node, const MasterShare& share) {
  if (owner_node >= cfg_.PoolSize()) Fail(ErrorCode::kUnknownNode, "share for unknown node");
  peer_shares_[owner_node] = share;
}

std::optional<MasterShare> NodeState::PeerShare(uint32_t owner_node) const {
  auto it = peer_shares_.find(owner_node);
  if (it == peer_shares_.end()) return std::nullopt;
  return it->second;
}

bool NodeState::VerifyParticipation(uint32_t user, const ParticipationMsg& msg) const {
  if (!cfg_.malicious()) return true;
  if (!msg.sigma || !user_sig_[user]) return false;
  const Bytes body = transport::EncodeParticipationUnsigned(msg, cfg_.wire());
  return crypto::Verify(*user_sig_[user],
                        transport::SigningInput(MessageType::kParticipation, UserId(user), body), *msg.sigma);
}

Verdict NodeState::HandleParticipation(const PartyId& from, const ParticipationMsg& msg) {
  if (from.role != Role::kUser || from.index >= seeds_.size()) return Verdict::Reject(ErrorCode::kUnknownUser);
  if (last_emitted_ && msg.t <= *last_emitted_) return Verdict::Reject(ErrorCode::kReplayedIteration);
  if (!VerifyParticipation(from.index, msg)) return Verdict::Reject(ErrorCode::kBadSignature);
  lists_[msg.t].insert(from.index);
  return Verdict::Accept();
}

AggregatedMaskMsg NodeState::BuildAggregate(uint32_t t, const std::vector<uint32_t>& list) const {
  std::vector<crypto::SharedSeed> listed;
  listed.reserve(list.size());
  for (uint32_t u : list) listed.push_back(seeds_[u]);

  AggregatedMaskMsg msg;
  msg.t = t;
  msg.list_len = static_cast<uint32_t>(list.size());
  if (cfg_.list_check == ListCheck::kDigest) msg.list_digest = ListDigest(list);
  msg.a = masking::NodeAggregateMask(listed, t, cfg_.d, cfg_.integrity);
  if (cfg_.malicious()) {
    const Bytes body = transport::EncodeNodeAggregateUnsigned(msg, cfg_.wire());
    msg.sigma = crypto::Sign(sig_->secret, transport::SigningInput(MessageType::kNodeAggregate, id(), body));
  }
  return msg;
}

AggregatedMaskMsg NodeState::EmitAggregate(uint32_t t) {
  if (seeds_.empty()) Fail(ErrorCode::kInvalidConfig, "node setup incomplete");
  if (last_emitted_ && t <= *last_emitted_) {
    Fail(ErrorCode::kReplayedIteration, "round " + std::to_string(t) + " already emitted");
  }
  const auto it = lists_.find(t);
  std::vector<uint32_t> list;
  if (it != lists_.end()) list.assign(it->second.begin(), it->second.end());
  if (list.size() < cfg_.Threshold()) {
    Fail(ErrorCode::kBelowThreshold, "node " + std::to_string(index_) + ": " + std::to_string(list.size()) +
                                         " participants, need " + std::to_string(cfg_.Threshold()));
  }
  AggregatedMaskMsg msg = BuildAggregate(t, list);
  last_emitted_ = t;
  last_list_ = std::move(list);
  lists_.erase(lists_.begin(), lists_.upper_bound(t));
  return msg;
}

AggregatedMaskMsg NodeState::HandleReconcile(const ReconcileRequest& req) {
  if (!last_emitted_ || req.t != *last_emitted_) {
    Fail(ErrorCode::kReplayedIteration, "reconcile for a round this node did not just emit");
  }
  if (cfg_.malicious()) {
    if (!server_sig_ || !req.sigma) Fail(ErrorCode::kBadSignature, "unsigned reconcile request");
    const Bytes body = transport::EncodeReconcileRequestUnsigned(req, cfg_.wire());
    if (!crypto::Verify(*server_sig_, transport::SigningInput(MessageType::kReconcileRequest, ServerId(), body),
                        *req.sigma)) {
      Fail(ErrorCode::kBadSignature, "reconcile request signature invalid");
    }
  }
  std::set<uint32_t> known(last_list_.begin(), last_list_.end());
  for (const auto& f : req.forwarded) {
    if (f.user < seeds_.size() && f.msg.t == req.t && VerifyParticipation(f.user, f.msg)) known.insert(f.user);
  }
  // Only users the server also holds can be unmasked.
  std::vector<uint32_t> list;
  for (uint32_t u : req.user_list) {
    if (known.count(u) != 0) list.push_back(u);
  }
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());
  if (list.size() < cfg_.Threshold()) {
    Fail(ErrorCode::kBelowThreshold, "reconciled list below threshold");
  }
  last_list_ = list;
  return BuildAggregate(req.t, list);
}

std::vector<uint32_t> NodeState::ListFor(uint32_t t) const {
  if (last_emitted_ && t == *last_emitted_) return last_list_;
  const auto it = lists_.find(t);
  if (it == lists_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

}  // namespace seafl::protocol
