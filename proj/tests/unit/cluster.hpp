#pragma once

#include <optional>
#include <stdexcept>
#include <set>
#include <vector>

#include "seafl/protocol/node.hpp"
#include "seafl/protocol/selection.hpp"
#include "seafl/protocol/server.hpp"
#include "seafl/protocol/user.hpp"

namespace seafl::testing {

using namespace seafl::protocol;

// Every party of one deployment, wired together by direct calls.
struct Cluster {
  ProtocolConfig cfg;
  crypto::DeterministicRng rng;
  ServerState server;
  std::vector<NodeState> nodes;
  std::vector<UserState> users;
  std::vector<PartyKeys> user_keys;
  std::vector<PartyKeys> node_keys;
  std::vector<std::vector<SetupCiphertext>> setup_cts;  // by node

  Cluster(const ProtocolConfig& c, uint64_t seed) : cfg(c), rng(seed), server(ServerState::Generate(c, rng)) {
    for (uint32_t j = 0; j < cfg.PoolSize(); ++j) nodes.push_back(NodeState::Generate(cfg, j, rng));
    for (uint32_t i = 0; i < cfg.n; ++i) users.push_back(UserState::Generate(cfg, i, rng));
    for (const auto& nd : nodes) node_keys.push_back({*nd.Announcement().kx_public, nd.Announcement().sig_public});
    for (const auto& u : users) user_keys.push_back({*u.Announcement().kx_public, u.Announcement().sig_public});
    std::optional<crypto::PointBytes> server_sig;
    if (auto a = server.Announcement()) server_sig = a->sig_public;

    for (auto& u : users) u.InstallNodeKeys(node_keys, server_sig);
    for (auto& nd : nodes) {
      setup_cts.push_back(nd.RegisterUsers(user_keys, rng));
      for (const auto& ct : setup_cts.back()) users[ct.user].InstallSetupCiphertext(nd.index(), ct);
      if (server_sig) nd.InstallServerKey(*server_sig);
    }
    server.RegisterUsers(user_keys);
    server.RegisterNodes(node_keys);
    if (cfg.seed_source == SeedSource::kMasterDerived) {
      for (auto& owner : nodes) {
        const auto shares = owner.DealMasterShares(rng);
        for (uint32_t j = 0; j < nodes.size(); ++j) nodes[j].StorePeerShare(owner.index(), shares[j]);
      }
    }
  }

  // Users in `online` send to the server and every active node.
  void Send(uint32_t t, const std::vector<masking::GradientVector>& inputs, const std::set<uint32_t>& online) {
    for (uint32_t i : online) {
      const UserRoundOutput out = users[i].RoundQuantized(t, inputs[i]);
      if (!server.IngestUpdate(users[i].id(), out.update)) throw std::runtime_error("honest update rejected");
      for (const auto& [j, msg] : out.participations) {
        if (!nodes[j].HandleParticipation(users[i].id(), msg)) throw std::runtime_error("honest participation rejected");
      }
    }
  }

  std::vector<NodeContribution> Emit(uint32_t t) {
    std::vector<NodeContribution> out;
    for (uint32_t j : ActiveNodes(cfg, t)) out.push_back({j, nodes[j].EmitAggregate(t), false});
    return out;
  }

  RoundResult Round(uint32_t t, const std::vector<masking::GradientVector>& inputs, const std::set<uint32_t>& online) {
    Send(t, inputs, online);
    const auto contributions = Emit(t);
    return server.FinalizeRound(t, contributions);
  }
};

}  // namespace seafl::testing
