#include "seafl/harness/deployment.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "seafl/masking/masking.hpp"
#include "seafl/transport/codec.hpp"

namespace seafl::harness {

using protocol::MessageType;
using protocol::NodeId;
using protocol::PartyId;
using protocol::Role;
using protocol::ServerId;
using protocol::UserId;
using transport::SimTime;

namespace {

constexpr SimTime kForever = std::numeric_limits<SimTime>::max();

template <typename F>
void Timed(double& acc_ms, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  acc_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

PhaseCosts EmptyCosts(const protocol::ProtocolConfig& cfg) {
  PhaseCosts c;
  c.users.resize(cfg.n);
  c.nodes.resize(cfg.PoolSize());
  return c;
}

}  // namespace

std::string_view PhaseName(Phase phase) { return phase == Phase::kSetup ? "setup" : "aggregation"; }

GradientVector PlaintextSum(std::span<const GradientVector> inputs, std::span<const uint32_t> which) {
  GradientVector sum(inputs.empty() ? 0 : inputs[0].size());
  for (uint32_t i : which) {
    const GradientVector& x = inputs[i];
    if (x.size() != sum.size()) Fail(ErrorCode::kLengthMismatch, "inputs differ in length");
    for (size_t e = 0; e < sum.size(); ++e) sum[e] += x[e];
  }
  return sum;
}

LocalDeployment::LocalDeployment(const protocol::ProtocolConfig& cfg, uint64_t seed, transport::SimPolicy policy)
    : cfg_(cfg),
      wf_(cfg.wire()),
      rng_(seed),
      net_([this, policy]() mutable {
        auto user_drop = policy.drop_if;
        auto user_delay = policy.extra_delay;
        policy.drop_if = [this, user_drop](const PartyId& from, const PartyId& to, const transport::Frame& f) {
          if (faults_ != nullptr && from.role == Role::kUser && to.role == Role::kNode &&
              f.type == MessageType::kParticipation) {
            const auto it = faults_->lost_participations.find(from.index);
            if (it != faults_->lost_participations.end() && it->second.count(to.index) != 0) return true;
          }
          return user_drop && user_drop(from, to, f);
        };
        policy.extra_delay = [this, user_delay](const PartyId& from, const PartyId& to, const transport::Frame& f) {
          SimTime extra = user_delay ? user_delay(from, to, f) : 0;
          if (faults_ != nullptr && from.role == Role::kUser && faults_->late_users.count(from.index) != 0) {
            extra += 2 * static_cast<SimTime>(std::chrono::microseconds(cfg_.round_deadline).count()) + 1;
          }
          return extra;
        };
        return policy;
      }()),
      server_(protocol::ServerState::Generate(cfg, rng_)) {
  Setup();
}

PartyCost& LocalDeployment::CostOf(PhaseCosts& costs, const PartyId& who) {
  switch (who.role) {
    case Role::kUser: return costs.users.at(who.index);
    case Role::kNode: return costs.nodes.at(who.index);
    case Role::kServer: return costs.server;
  }
  return costs.server;
}

void LocalDeployment::Send(const PartyId& to, MessageType type, const PartyId& from, Bytes body) {
  net_.Send(to, transport::Frame{type, from, std::move(body)});
}

void LocalDeployment::CollectTraffic(PhaseCosts& costs) const {
  auto fill = [this](PartyCost& c, const PartyId& who) {
    const transport::TrafficCounters& t = net_.Outbound(who);
    c.body_bytes = t.body_bytes;
    c.frame_bytes = t.frame_bytes;
  };
  for (uint32_t i = 0; i < costs.users.size(); ++i) fill(costs.users[i], UserId(i));
  for (uint32_t j = 0; j < costs.nodes.size(); ++j) fill(costs.nodes[j], NodeId(j));
  fill(costs.server, ServerId());
}

void LocalDeployment::Setup() {
  const uint32_t pool = cfg_.PoolSize();
  setup_costs_ = EmptyCosts(cfg_);
  PhaseCosts& costs = setup_costs_;
  net_.ResetCounters();

  for (uint32_t j = 0; j < pool; ++j) {
    Timed(costs.nodes[j].compute_ms, [&] { nodes_.push_back(protocol::NodeState::Generate(cfg_, j, rng_)); });
  }
  for (uint32_t i = 0; i < cfg_.n; ++i) {
    Timed(costs.users[i].compute_ms, [&] { users_.push_back(protocol::UserState::Generate(cfg_, i, rng_)); });
  }
  const PartyKeysView blank{std::vector<protocol::PartyKeys>(cfg_.n), std::vector<protocol::PartyKeys>(pool),
                            std::nullopt};
  user_views_.assign(cfg_.n, blank);
  node_views_.assign(pool, blank);
  server_view_ = blank;

  if (auto a = server_.Announcement()) {
    const Bytes body = transport::EncodeKeyAnnounce(*a);
    for (uint32_t i = 0; i < cfg_.n; ++i) Send(UserId(i), MessageType::kKeyAnnounce, ServerId(), body);
    for (uint32_t j = 0; j < pool; ++j) Send(NodeId(j), MessageType::kKeyAnnounce, ServerId(), body);
  }
  for (uint32_t j = 0; j < pool; ++j) {
    const Bytes body = transport::EncodeKeyAnnounce(nodes_[j].Announcement());
    for (uint32_t i = 0; i < cfg_.n; ++i) Send(UserId(i), MessageType::kKeyAnnounce, NodeId(j), body);
    Send(ServerId(), MessageType::kKeyAnnounce, NodeId(j), body);
  }
  for (uint32_t i = 0; i < cfg_.n; ++i) {
    const Bytes body = transport::EncodeKeyAnnounce(users_[i].Announcement());
    for (uint32_t j = 0; j < pool; ++j) Send(NodeId(j), MessageType::kKeyAnnounce, UserId(i), body);
    Send(ServerId(), MessageType::kKeyAnnounce, UserId(i), body);
  }
  DeliverAll(kForever, costs);

  for (uint32_t i = 0; i < cfg_.n; ++i) {
    Timed(costs.users[i].compute_ms,
          [&] { users_[i].InstallNodeKeys(user_views_[i].nodes, user_views_[i].server_sig); });
  }
  for (uint32_t j = 0; j < pool; ++j) {
    Timed(costs.nodes[j].compute_ms, [&] {
      if (node_views_[j].server_sig) nodes_[j].InstallServerKey(*node_views_[j].server_sig);
      for (const auto& ct : nodes_[j].RegisterUsers(node_views_[j].users, rng_)) {
        Send(UserId(ct.user), MessageType::kSetupCiphertext, NodeId(j), transport::EncodeSetupCiphertext(ct));
      }
    });
  }
  Timed(costs.server.compute_ms, [&] {
    server_.RegisterUsers(server_view_.users);
    server_.RegisterNodes(server_view_.nodes);
  });
  if (cfg_.seed_source == protocol::SeedSource::kMasterDerived) {
    // Master shares travel out of band; see README.
    for (uint32_t j = 0; j < pool; ++j) {
      std::vector<protocol::MasterShare> shares;
      Timed(costs.nodes[j].compute_ms, [&] { shares = nodes_[j].DealMasterShares(rng_); });
      for (uint32_t holder = 0; holder < pool; ++holder) nodes_[holder].StorePeerShare(j, shares[holder]);
    }
  }
  DeliverAll(kForever, costs);

  for (uint32_t i = 0; i < cfg_.n; ++i) {
    if (!users_[i].Ready()) Fail(ErrorCode::kInternal, "user " + std::to_string(i) + " incomplete after setup");
  }
  CollectTraffic(costs);
}

void LocalDeployment::DeliverAll(SimTime until, PhaseCosts& costs) {
  while (auto d = net_.Next(until)) Dispatch(*d, costs);
}

void LocalDeployment::Dispatch(const transport::Delivery& d, PhaseCosts& costs) {
  const PartyId& from = d.frame.sender;
  const ByteSpan body = d.frame.body;
  PartyCost& cost = CostOf(costs, d.to);
  try {
    switch (d.to.role) {
      case Role::kServer:
        switch (d.frame.type) {
          case MessageType::kKeyAnnounce: {
            const auto a = transport::DecodeKeyAnnounce(body, from.role, wf_);
            auto& slot = from.role == Role::kUser ? server_view_.users.at(from.index) : server_view_.nodes.at(from.index);
            slot = {a.kx_public.value_or(crypto::PointBytes{}), a.sig_public};
            break;
          }
          case MessageType::kMaskedUpdate:
            if (d.at > deadline_) break;  // L_{S,t} is closed
            Timed(cost.compute_ms,
                  [&] { server_.IngestUpdate(from, transport::DecodeMaskedUpdate(body, wf_)); });
            break;
          case MessageType::kParticipation:
            if (d.at > deadline_) break;
            Timed(cost.compute_ms, [&] {
              server_.IngestRelayedParticipation(from, transport::DecodeParticipation(body, wf_));
            });
            break;
          case MessageType::kNodeAggregate: {
            protocol::NodeContribution c;
            Timed(cost.compute_ms, [&] { c = {from.index, transport::DecodeNodeAggregate(body, wf_), false}; });
            std::erase_if(inbound_aggregates_, [&](const auto& x) { return x.node == c.node; });
            inbound_aggregates_.push_back(std::move(c));
            break;
          }
          default:
            break;
        }
        break;

      case Role::kNode: {
        protocol::NodeState& node = nodes_.at(d.to.index);
        switch (d.frame.type) {
          case MessageType::kKeyAnnounce: {
            const auto a = transport::DecodeKeyAnnounce(body, from.role, wf_);
            if (from.role == Role::kServer) {
              node_views_[d.to.index].server_sig = a.sig_public;
            } else if (from.role == Role::kUser) {
              node_views_[d.to.index].users.at(from.index) = {*a.kx_public, a.sig_public};
            }
            break;
          }
          case MessageType::kParticipation:
            Timed(cost.compute_ms,
                  [&] { node.HandleParticipation(from, transport::DecodeParticipation(body, wf_)); });
            break;
          case MessageType::kReconcileRequest: {
            Bytes out;
            Timed(cost.compute_ms, [&] {
              const auto msg = node.HandleReconcile(transport::DecodeReconcileRequest(body, wf_));
              out = transport::EncodeNodeAggregate(msg, wf_);
            });
            Send(ServerId(), MessageType::kNodeAggregate, node.id(), std::move(out));
            break;
          }
          default:
            break;
        }
        break;
      }

      case Role::kUser: {
        protocol::UserState& user = users_.at(d.to.index);
        switch (d.frame.type) {
          case MessageType::kKeyAnnounce: {
            const auto a = transport::DecodeKeyAnnounce(body, from.role, wf_);
            if (from.role == Role::kServer) {
              user_views_[d.to.index].server_sig = a.sig_public;
            } else if (from.role == Role::kNode) {
              user_views_[d.to.index].nodes.at(from.index) = {*a.kx_public, a.sig_public};
            }
            break;
          }
          case MessageType::kSetupCiphertext:
            Timed(cost.compute_ms,
                  [&] { user.InstallSetupCiphertext(from.index, transport::DecodeSetupCiphertext(body)); });
            break;
          case MessageType::kRoundResult:
            Timed(cost.compute_ms,
                  [&] { received_results_.at(d.to.index) = transport::DecodeRoundResult(body, wf_); });
            break;
          default:
            break;
        }
        break;
      }
    }
  } catch (const Error&) {
    // A rejected or undecodable message is dropped, as on a real link.
  }
}

RoundReport LocalDeployment::RunRound(uint32_t t, std::span<const GradientVector> inputs,
                                      const RoundFaults& faults) {
  if (inputs.size() != cfg_.n) Fail(ErrorCode::kLengthMismatch, "need one input per user");
  std::vector<GradientVector> expected(inputs.begin(), inputs.end());
  return RunRoundImpl(t, expected, [&](uint32_t i) { return users_[i].RoundQuantized(t, inputs[i]); }, faults);
}

RoundReport LocalDeployment::RunRound(uint32_t t, std::span<const std::vector<double>> inputs,
                                      const RoundFaults& faults) {
  if (inputs.size() != cfg_.n) Fail(ErrorCode::kLengthMismatch, "need one input per user");
  std::vector<GradientVector> expected;
  expected.reserve(inputs.size());
  for (const auto& x : inputs) expected.push_back(masking::Quantize(x, cfg_.quant));
  return RunRoundImpl(t, expected, [&](uint32_t i) { return users_[i].Round(t, inputs[i]); }, faults);
}

RoundReport LocalDeployment::RunRoundImpl(uint32_t t, const std::vector<GradientVector>& expected_inputs,
                                          const std::function<protocol::UserRoundOutput(uint32_t)>& make,
                                          const RoundFaults& faults) {
  RoundReport rep;
  rep.t = t;
  rep.costs = EmptyCosts(cfg_);
  rep.user_accepts.assign(cfg_.n, std::nullopt);
  PhaseCosts& costs = rep.costs;

  faults_ = &faults;
  round_t_ = t;
  inbound_aggregates_.clear();
  received_results_.assign(cfg_.n, std::nullopt);
  net_.ResetCounters();
  for (uint32_t j : faults.offline_nodes) net_.SetOnline(NodeId(j), false);
  for (uint32_t i : faults.offline_users) net_.SetOnline(UserId(i), false);

  const SimTime start = net_.now();
  deadline_ = start + static_cast<SimTime>(std::chrono::microseconds(cfg_.round_deadline).count());
  const std::vector<uint32_t> active = protocol::ActiveNodes(cfg_, t);

  // Phase 1: users mask and send.
  for (uint32_t i = 0; i < cfg_.n; ++i) {
    if (faults.offline_users.count(i) != 0) continue;
    Bytes update;
    std::vector<std::pair<uint32_t, Bytes>> parts;
    Timed(costs.users[i].compute_ms, [&] {
      const protocol::UserRoundOutput out = make(i);
      update = transport::EncodeMaskedUpdate(out.update, wf_);
      for (const auto& [j, p] : out.participations) parts.emplace_back(j, transport::EncodeParticipation(p, wf_));
    });
    Send(ServerId(), MessageType::kMaskedUpdate, UserId(i), std::move(update));
    // Star-topology copy kept by the server for reconciliation.
    if (cfg_.reconcile && !parts.empty()) Send(ServerId(), MessageType::kParticipation, UserId(i), parts.front().second);
    for (auto& [j, body] : parts) Send(NodeId(j), MessageType::kParticipation, UserId(i), std::move(body));
  }
  DeliverAll(deadline_, costs);
  net_.AdvanceTo(deadline_);

  // Phase 2: nodes aggregate at the deadline.
  for (uint32_t j : active) {
    if (faults.offline_nodes.count(j) != 0) continue;
    Bytes body;
    bool emitted = false;
    Timed(costs.nodes[j].compute_ms, [&] {
      try {
        body = transport::EncodeNodeAggregate(nodes_[j].EmitAggregate(t), wf_);
        emitted = true;
      } catch (const Error&) {
        // Below threshold: the node withholds its aggregate.
      }
    });
    if (emitted) Send(ServerId(), MessageType::kNodeAggregate, NodeId(j), std::move(body));
  }
  DeliverAll(kForever, costs);

  rep.online = server_.OnlineUsers(t);
  auto fail = [&](const Error& e) {
    rep.error = e.code();
    rep.error_message = e.what();
  };

  for (uint32_t j : active) {
    if (faults.offline_nodes.count(j) == 0 || cfg_.seed_source != protocol::SeedSource::kMasterDerived) continue;
    std::vector<protocol::MasterShare> shares;
    for (uint32_t s = 0; s < cfg_.PoolSize(); ++s) {
      if (faults.offline_nodes.count(s) != 0) continue;
      if (auto share = nodes_[s].PeerShare(j)) shares.push_back(*share);
    }
    try {
      Timed(costs.server.compute_ms,
            [&] { inbound_aggregates_.push_back(server_.RecoverNodeContribution(t, j, shares)); });
      rep.recovered_nodes.push_back(j);
    } catch (const Error& e) {
      fail(e);
    }
  }

  std::optional<protocol::RoundResult> result;
  if (!rep.error) {
    try {
      Timed(costs.server.compute_ms, [&] { result = server_.FinalizeRound(t, inbound_aggregates_); });
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kListMismatch && cfg_.reconcile) {
        protocol::ReconcileRequest req;
        Bytes body;
        Timed(costs.server.compute_ms, [&] {
          req = server_.BuildReconcileRequest(t);
          body = transport::EncodeReconcileRequest(req, wf_);
        });
        for (uint32_t j : active) {
          if (faults.offline_nodes.count(j) == 0) Send(NodeId(j), MessageType::kReconcileRequest, ServerId(), body);
        }
        DeliverAll(kForever, costs);
        rep.reconciled = true;
        try {
          Timed(costs.server.compute_ms, [&] { result = server_.FinalizeRound(t, inbound_aggregates_); });
        } catch (const Error& e2) {
          fail(e2);
        }
      } else {
        fail(e);
      }
    }
  }

  if (result) {
    if (faults.tamper_result && !result->w.elems.empty()) result->w[0] += 1;
    Bytes body;
    Timed(costs.server.compute_ms, [&] { body = transport::EncodeRoundResult(*result, wf_); });
    for (uint32_t i : rep.online) Send(UserId(i), MessageType::kRoundResult, ServerId(), body);
    DeliverAll(kForever, costs);
    if (cfg_.integrity) {
      for (uint32_t i = 0; i < cfg_.n; ++i) {
        if (!received_results_[i]) continue;
        Timed(costs.users[i].compute_ms, [&] { rep.user_accepts[i] = users_[i].VerifyResult(*received_results_[i]); });
      }
    }
    rep.expected = PlaintextSum(expected_inputs, rep.online);
    rep.oracle_match = result->w == rep.expected;
    rep.result = std::move(result);
  }

  net_.Clear();
  for (uint32_t j : faults.offline_nodes) net_.SetOnline(NodeId(j), true);
  for (uint32_t i : faults.offline_users) net_.SetOnline(UserId(i), true);
  CollectTraffic(costs);
  faults_ = nullptr;
  return rep;
}

}  // namespace seafl::harness
