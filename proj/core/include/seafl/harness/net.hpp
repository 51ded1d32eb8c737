#pragma once

// Networked role loops over TCP. Topology: nodes connect to the server;
// users connect to the server and to every pool node. The first frame on
// every connection is the sender's key announcement, which must match the
// roster. Seeds are the raw key-exchange outputs (no node recovery).

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "seafl/crypto/rng.hpp"
#include "seafl/harness/deployment.hpp"
#include "seafl/harness/roster.hpp"
#include "seafl/transport/tcp.hpp"

namespace seafl::harness {

struct NetOptions {
  protocol::ProtocolConfig cfg;
  Roster roster;
  transport::Endpoint server;
  std::vector<transport::Endpoint> nodes;  // indexed by pool ordinal
  std::chrono::milliseconds connect_timeout{30000};
  std::ostream* log = nullptr;  // one JSON object per line
};

struct ServerRoundOutcome {
  uint32_t t = 0;
  std::optional<protocol::RoundResult> result;
  std::optional<ErrorCode> error;
  std::string error_message;
  std::vector<uint32_t> online;
  bool reconciled = false;
  double compute_ms = 0.0;
  uint64_t body_bytes = 0;
};

struct UserRoundOutcome {
  uint32_t t = 0;
  std::optional<protocol::RoundResult> result;
  std::optional<bool> verified;  // integrity mode only
  double compute_ms = 0.0;
  uint64_t body_bytes = 0;
};

struct NodeRoundOutcome {
  uint32_t t = 0;
  bool emitted = false;
  uint32_t list_len = 0;
  double compute_ms = 0.0;
  uint64_t body_bytes = 0;
};

// Each loop runs cfg.iterations rounds (t = 1..T). The listener must already
// be bound; pass one created from the role's endpoint.
std::vector<ServerRoundOutcome> RunServer(const NetOptions& opts, const Secrets& secrets,
                                          transport::TcpListener& listener);
std::vector<NodeRoundOutcome> RunNode(const NetOptions& opts, uint32_t index, const Secrets& secrets,
                                      transport::TcpListener& listener, crypto::Rng& rng);
std::vector<UserRoundOutcome> RunUser(const NetOptions& opts, uint32_t index, const Secrets& secrets,
                                      const std::function<GradientVector(uint32_t t)>& input);

// Deterministic per-(seed, user, t) input with elements below B.
GradientVector SyntheticInput(uint64_t seed, uint32_t user, uint32_t t, const protocol::ProtocolConfig& cfg);

// One round over 127.0.0.1 with every role on its own thread. Users listed
// in `offline_users` never start. Reports the server's outcome and the
// oracle comparison.
RoundReport RunTcpRoundTrip(const protocol::ProtocolConfig& cfg, std::span<const GradientVector> inputs,
                            uint64_t seed, const std::set<uint32_t>& offline_users = {});

}  // namespace seafl::harness
