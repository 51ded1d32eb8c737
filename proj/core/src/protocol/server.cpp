#include "seafl/protocol/server.hpp"

#include <algorithm>
#include <string>

#include "seafl/common/error.hpp"
#include "seafl/masking/masking.hpp"
#include "seafl/protocol/recovery.hpp"
#include "seafl/transport/codec.hpp"

namespace seafl::protocol {

ServerState::ServerState(const ProtocolConfig& cfg, std::optional<crypto::SigKeyPair> sig)
    : cfg_(cfg), sig_(std::move(sig)) {
  cfg_.Validate();
  if (cfg_.malicious() && !sig_) Fail(ErrorCode::kInvalidConfig, "malicious mode needs a signing key");
  if (!cfg_.malicious()) sig_.reset();
  if (cfg_.integrity) params_ = commit::SharedApvcParams(cfg_.d);
  user_sig_.assign(cfg_.n, std::nullopt);
  node_sig_.assign(cfg_.PoolSize(), std::nullopt);
}

ServerState ServerState::Generate(const ProtocolConfig& cfg, crypto::Rng& rng) {
  std::optional<crypto::SigKeyPair> sig;
  if (cfg.malicious()) sig = crypto::SigKeyPair::Generate(rng);
  return ServerState(cfg, std::move(sig));
}

ServerState ServerState::FromKeys(const ProtocolConfig& cfg, std::optional<crypto::SigKeyPair> sig) {
  return ServerState(cfg, std::move(sig));
}

std::optional<KeyAnnounce> ServerState::Announcement() const {
  if (!sig_) return std::nullopt;
  KeyAnnounce a;
  a.sig_public = sig_->public_key;
  return a;
}

void ServerState::RegisterUsers(std::span<const PartyKeys> users) {
  if (users.size() != cfg_.n) {
    Fail(ErrorCode::kInvalidConfig, "expected keys for " + std::to_string(cfg_.n) + " users");
  }
  for (size_t i = 0; i < users.size(); ++i) {
    if (cfg_.malicious() && !users[i].sig) Fail(ErrorCode::kInvalidConfig, "malicious mode needs user signing keys");
    user_sig_[i] = users[i].sig;
  }
}

void ServerState::RegisterNodes(std::span<const PartyKeys> nodes) {
  if (nodes.size() != cfg_.PoolSize()) {
    Fail(ErrorCode::kInvalidConfig, "expected keys for " + std::to_string(cfg_.PoolSize()) + " nodes");
  }
  for (size_t j = 0; j < nodes.size(); ++j) {
    if (cfg_.malicious() && !nodes[j].sig) Fail(ErrorCode::kInvalidConfig, "malicious mode needs node signing keys");
    node_sig_[j] = nodes[j].sig;
  }
}

Verdict ServerState::IngestUpdate(const PartyId& from, const MaskedUpdate& msg) {
  if (from.role != Role::kUser || from.index >= cfg_.n) return Verdict::Reject(ErrorCode::kUnknownUser);
  if (last_finalized_ && msg.t <= *last_finalized_) return Verdict::Reject(ErrorCode::kReplayedIteration);
  if (msg.y.size() != cfg_.d) return Verdict::Reject(ErrorCode::kLengthMismatch);
  if (cfg_.integrity != msg.cm.has_value()) return Verdict::Reject(ErrorCode::kMalformedFrame);
  if (cfg_.malicious()) {
    const auto& pk = user_sig_[from.index];
    if (!pk || !msg.sigma) return Verdict::Reject(ErrorCode::kBadSignature);
    const Bytes body = transport::EncodeMaskedUpdateUnsigned(msg, cfg_.wire());
    if (!crypto::Verify(*pk, transport::SigningInput(MessageType::kMaskedUpdate, from, body), *msg.sigma)) {
      return Verdict::Reject(ErrorCode::kBadSignature);
    }
  }
  auto& updates = rounds_[msg.t].updates;
  const auto [it, inserted] = updates.try_emplace(from.index, msg);
  if (!inserted && !(it->second == msg)) return Verdict::Reject(ErrorCode::kConflictingUpdate);
  return Verdict::Accept();
}

Verdict ServerState::IngestRelayedParticipation(const PartyId& from, const ParticipationMsg& msg) {
  if (from.role != Role::kUser || from.index >= cfg_.n) return Verdict::Reject(ErrorCode::kUnknownUser);
  if (last_finalized_ && msg.t <= *last_finalized_) return Verdict::Reject(ErrorCode::kReplayedIteration);
  if (cfg_.malicious()) {
    const auto& pk = user_sig_[from.index];
    if (!pk || !msg.sigma) return Verdict::Reject(ErrorCode::kBadSignature);
    const Bytes body = transport::EncodeParticipationUnsigned(msg, cfg_.wire());
    if (!crypto::Verify(*pk, transport::SigningInput(MessageType::kParticipation, from, body), *msg.sigma)) {
      return Verdict::Reject(ErrorCode::kBadSignature);
    }
  }
  rounds_[msg.t].participations.try_emplace(from.index, msg);
  return Verdict::Accept();
}

std::vector<uint32_t> ServerState::OnlineUsers(uint32_t t) const {
  std::vector<uint32_t> out;
  const auto it = rounds_.find(t);
  if (it == rounds_.end()) return out;
  for (const auto& [user, update] : it->second.updates) out.push_back(user);
  return out;  // std::map keeps ordinals sorted
}

RoundResult ServerState::FinalizeRound(uint32_t t, std::span<const NodeContribution> node_msgs) {
  if (last_finalized_ && t <= *last_finalized_) {
    Fail(ErrorCode::kReplayedIteration, "round " + std::to_string(t) + " already finalized");
  }
  const std::vector<uint32_t> list = OnlineUsers(t);
  if (list.size() < cfg_.Threshold()) {
    Fail(ErrorCode::kBelowThreshold, "server holds " + std::to_string(list.size()) + " updates, need " +
                                         std::to_string(cfg_.Threshold()));
  }

  const std::vector<uint32_t> active = ActiveNodes(cfg_, t);
  std::vector<const NodeContribution*> ordered;
  ordered.reserve(active.size());
  for (uint32_t j : active) {
    const auto it = std::find_if(node_msgs.begin(), node_msgs.end(),
                                 [j](const NodeContribution& c) { return c.node == j; });
    if (it == node_msgs.end()) {
      Fail(ErrorCode::kMissingNodeMessage, "no aggregate from active node " + std::to_string(j));
    }
    ordered.push_back(&*it);
  }
  for (const NodeContribution& c : node_msgs) {
    if (!std::binary_search(active.begin(), active.end(), c.node)) {
      Fail(ErrorCode::kUnknownNode, "aggregate from node " + std::to_string(c.node) + " not active in round");
    }
  }

  const WireFormat wf = cfg_.wire();
  const std::optional<crypto::Digest> digest =
      cfg_.list_check == ListCheck::kDigest ? std::optional(ListDigest(list)) : std::nullopt;
  for (const NodeContribution* c : ordered) {
    const AggregatedMaskMsg& m = c->msg;
    if (cfg_.malicious() && !c->recovered) {
      const auto& pk = node_sig_[c->node];
      const Bytes body = transport::EncodeNodeAggregateUnsigned(m, wf);
      if (!pk || !m.sigma ||
          !crypto::Verify(*pk, transport::SigningInput(MessageType::kNodeAggregate, NodeId(c->node), body),
                          *m.sigma)) {
        Fail(ErrorCode::kBadNodeSignature, "node " + std::to_string(c->node) + " aggregate signature invalid");
      }
    }
    if (m.t != t) Fail(ErrorCode::kReplayedIteration, "node aggregate for a different round");
    if (m.a.size() != cfg_.d) Fail(ErrorCode::kLengthMismatch, "node aggregate length differs from d");
    if (cfg_.integrity && !m.a.r_lane) Fail(ErrorCode::kMalformedFrame, "node aggregate lacks r-lane sum");
    if (m.list_len != list.size() || (digest && m.list_digest != digest)) {
      Fail(ErrorCode::kListMismatch, "node " + std::to_string(c->node) + " reports |L| = " +
                                         std::to_string(m.list_len) + ", server holds " +
                                         std::to_string(list.size()));
    }
  }

  RoundBuffer& buf = rounds_.at(t);
  std::vector<GradientVector> ys;
  std::vector<commit::Commitment> cms;
  ys.reserve(list.size());
  for (const auto& [user, update] : buf.updates) {
    ys.push_back(update.y);
    if (cfg_.integrity) cms.push_back(*update.cm);
  }
  std::vector<MaskVector> masks;
  std::vector<crypto::Scalar> r_lanes;
  masks.reserve(ordered.size());
  for (const NodeContribution* c : ordered) {
    masks.push_back(c->msg.a);
    if (cfg_.integrity) r_lanes.push_back(*c->msg.a.r_lane);
  }

  RoundResult result;
  result.t = t;
  result.contributor_count = static_cast<uint32_t>(list.size());
  result.w = masking::UnmaskSum(ys, masks);
  if (cfg_.integrity) result.proof = commit::ComputeProof(*params_, cms, r_lanes, t);

  last_finalized_ = t;
  rounds_.erase(rounds_.begin(), rounds_.upper_bound(t));
  return result;
}

ReconcileRequest ServerState::BuildReconcileRequest(uint32_t t) const {
  ReconcileRequest req;
  req.t = t;
  req.user_list = OnlineUsers(t);
  const auto it = rounds_.find(t);
  if (it != rounds_.end()) {
    for (uint32_t u : req.user_list) {
      const auto p = it->second.participations.find(u);
      if (p != it->second.participations.end()) req.forwarded.push_back({u, p->second});
    }
  }
  if (sig_) {
    const Bytes body = transport::EncodeReconcileRequestUnsigned(req, cfg_.wire());
    req.sigma = crypto::Sign(sig_->secret, transport::SigningInput(MessageType::kReconcileRequest, ServerId(), body));
  }
  return req;
}

NodeContribution ServerState::RecoverNodeContribution(uint32_t t, uint32_t dropped_node,
                                                      std::span<const MasterShare> shares) const {
  if (dropped_node >= cfg_.PoolSize()) Fail(ErrorCode::kUnknownNode, "recovery for unknown node");
  const std::vector<uint32_t> list = OnlineUsers(t);
  NodeContribution c;
  c.node = dropped_node;
  c.recovered = true;
  c.msg.t = t;
  c.msg.list_len = static_cast<uint32_t>(list.size());
  if (cfg_.list_check == ListCheck::kDigest) c.msg.list_digest = ListDigest(list);
  c.msg.a = RecoverOfflineNodeMask(shares, list, t, cfg_);
  return c;
}

}  // namespace seafl::protocol
