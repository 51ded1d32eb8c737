#include "seafl/harness/net.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "seafl/crypto/kx.hpp"
#include "seafl/crypto/sig.hpp"
#include "seafl/harness/config.hpp"
#include "seafl/transport/codec.hpp"

namespace seafl::harness {

using protocol::MessageType;
using protocol::NodeId;
using protocol::PartyId;
using protocol::Role;
using protocol::ServerId;
using protocol::UserId;
using transport::Frame;
using transport::InboxItem;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
void Timed(double& acc_ms, F&& f) {
  const auto start = Clock::now();
  f();
  acc_ms += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void Log(const NetOptions& opts, const Json& j) {
  if (opts.log != nullptr) *opts.log << j.dump() << std::endl;
}

void RequireKxSeeds(const protocol::ProtocolConfig& cfg) {
  if (cfg.seed_source != protocol::SeedSource::kKeyExchange) {
    Fail(ErrorCode::kInvalidConfig, "networked roles support seed_source=kx only");
  }
}

// Connections of one party, keyed by a local id and, once the peer has
// authenticated, by its PartyId.
class Hub {
 public:
  explicit Hub(const NetOptions& opts) : opts_(opts) {}
  ~Hub() { CloseAll(); }

  transport::Inbox inbox;

  uint64_t Add(transport::TcpStream stream) {
    std::lock_guard<std::mutex> lock(mu_);
    const uint64_t id = next_id_++;
    conns_.emplace(id, std::make_unique<transport::Connection>(id, std::move(stream), inbox));
    return id;
  }

  void Bind(uint64_t conn, const PartyId& peer) {
    std::lock_guard<std::mutex> lock(mu_);
    peer_of_[conn] = peer;
    conn_of_[peer] = conn;
  }

  std::optional<PartyId> PeerOf(uint64_t conn) const {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = peer_of_.find(conn);
    if (it == peer_of_.end()) return std::nullopt;
    return it->second;
  }

  void Drop(uint64_t conn) {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = peer_of_.find(conn);
    if (it != peer_of_.end()) {
      if (conn_of_[it->second] == conn) conn_of_.erase(it->second);
      peer_of_.erase(it);
    }
  }

  // False when the peer is not connected or the write fails.
  bool Send(const PartyId& to, MessageType type, const PartyId& from, Bytes body) {
    transport::Connection* c = nullptr;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto it = conn_of_.find(to);
      if (it == conn_of_.end()) return false;
      c = conns_.at(it->second).get();
    }
    try {
      c->Send(Frame{type, from, std::move(body)});
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  void SendRaw(uint64_t conn, const Frame& frame) {
    transport::Connection* c = nullptr;
    {
      std::lock_guard<std::mutex> lock(mu_);
      c = conns_.at(conn).get();
    }
    c->Send(frame);
  }

  uint64_t BodyBytes() const {
    std::lock_guard<std::mutex> lock(mu_);
    uint64_t total = 0;
    for (const auto& [id, c] : conns_) total += c->body_bytes_sent();
    return total;
  }

  // Checks a first frame against the roster; binds the peer on success.
  bool Authenticate(uint64_t conn, const Frame& f, const protocol::WireFormat& wf) {
    if (f.type != MessageType::kKeyAnnounce) return false;
    try {
      const auto a = transport::DecodeKeyAnnounce(f.body, f.sender.role, wf);
      const RosterEntry& e = opts_.roster.Find(f.sender);
      if (a.kx_public != e.kx || a.sig_public != e.sig) return false;
    } catch (const Error&) {
      return false;
    }
    Bind(conn, f.sender);
    return true;
  }

  void StartAccepting(transport::TcpListener& listener) {
    acceptor_ = std::thread([this, &listener] {
      while (!stop_) {
        try {
          Add(listener.Accept(std::chrono::milliseconds(100)));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kTimeout) return;
        }
      }
    });
  }

  void CloseAll() {
    stop_ = true;
    if (acceptor_.joinable()) acceptor_.join();
    std::map<uint64_t, std::unique_ptr<transport::Connection>> conns;
    {
      std::lock_guard<std::mutex> lock(mu_);
      conns.swap(conns_);
      peer_of_.clear();
      conn_of_.clear();
    }
    conns.clear();  // joins reader threads outside the lock
  }

 private:
  const NetOptions& opts_;
  mutable std::mutex mu_;
  uint64_t next_id_ = 1;
  std::map<uint64_t, std::unique_ptr<transport::Connection>> conns_;
  std::map<uint64_t, PartyId> peer_of_;
  std::map<PartyId, uint64_t> conn_of_;
  std::atomic<bool> stop_{false};
  std::thread acceptor_;
};

const SecretEntry& OwnSecrets(const Secrets& secrets, const PartyId& id, bool malicious, bool need_kx) {
  const SecretEntry& e = secrets.Find(id);
  if (need_kx && !e.kx) Fail(ErrorCode::kInvalidConfig, protocol::ToString(id) + " has no kx secret");
  if (malicious && !e.sig) Fail(ErrorCode::kInvalidConfig, protocol::ToString(id) + " has no signing secret");
  return e;
}

std::optional<crypto::SigKeyPair> SigFrom(const SecretEntry& e, bool malicious) {
  if (!malicious) return std::nullopt;
  return crypto::SigKeyPair::FromSecret(*e.sig);
}

}  // namespace

GradientVector SyntheticInput(uint64_t seed, uint32_t user, uint32_t t, const protocol::ProtocolConfig& cfg) {
  uint8_t material[16];
  StoreU64Be(material, seed);
  StoreU32Be(material + 8, user);
  StoreU32Be(material + 12, t);
  crypto::DeterministicRng rng(std::span<const uint8_t>(material, sizeof(material)));
  GradientVector g(cfg.d);
  for (auto& e : g.elems) e = static_cast<uint32_t>(rng.UniformBelow(cfg.quant.element_bound));
  return g;
}

std::vector<ServerRoundOutcome> RunServer(const NetOptions& opts, const Secrets& secrets,
                                          transport::TcpListener& listener) {
  const protocol::ProtocolConfig& cfg = opts.cfg;
  cfg.Validate();
  RequireKxSeeds(cfg);
  const protocol::WireFormat wf = cfg.wire();
  std::optional<crypto::SigKeyPair> sig;
  if (cfg.malicious()) sig = SigFrom(OwnSecrets(secrets, ServerId(), true, false), true);
  protocol::ServerState server = protocol::ServerState::FromKeys(cfg, sig);
  server.RegisterUsers(opts.roster.Users(cfg.n));
  server.RegisterNodes(opts.roster.Nodes(cfg.PoolSize()));

  Hub hub(opts);
  hub.StartAccepting(listener);
  Log(opts, {{"role", "server"}, {"event", "listening"}, {"port", listener.port()}});

  std::map<uint32_t, Clock::time_point> first_seen;
  std::map<uint32_t, std::vector<protocol::NodeContribution>> aggs;
  uint32_t closed_through = 0;  // updates for t <= this are ignored
  double compute_ms = 0.0;

  auto handle = [&](const InboxItem& item) {
    if (!item.frame) {
      hub.Drop(item.connection);
      return;
    }
    const Frame& f = *item.frame;
    const auto peer = hub.PeerOf(item.connection);
    if (!peer) {
      hub.Authenticate(item.connection, f, wf);
      return;
    }
    if (f.sender != *peer) return;  // spoofed sender field
    try {
      switch (f.type) {
        case MessageType::kMaskedUpdate:
          Timed(compute_ms, [&] {
            const auto msg = transport::DecodeMaskedUpdate(f.body, wf);
            if (msg.t <= closed_through) return;
            if (server.IngestUpdate(f.sender, msg)) first_seen.try_emplace(msg.t, Clock::now());
          });
          break;
        case MessageType::kParticipation:
          Timed(compute_ms, [&] {
            const auto msg = transport::DecodeParticipation(f.body, wf);
            if (msg.t <= closed_through) return;
            server.IngestRelayedParticipation(f.sender, msg);
          });
          break;
        case MessageType::kNodeAggregate:
          if (f.sender.role != Role::kNode) break;
          Timed(compute_ms, [&] {
            auto msg = transport::DecodeNodeAggregate(f.body, wf);
            auto& v = aggs[msg.t];
            std::erase_if(v, [&](const auto& c) { return c.node == f.sender.index; });
            v.push_back({f.sender.index, std::move(msg), false});
          });
          break;
        default:
          break;
      }
    } catch (const Error&) {
      // Undecodable frames are dropped.
    }
  };

  auto pump_until = [&](Clock::time_point deadline, const std::function<bool()>& done) {
    while (!done()) {
      auto item = hub.inbox.PopUntil(deadline);
      if (!item) return;
      handle(*item);
    }
  };

  std::vector<ServerRoundOutcome> outcomes;
  for (uint32_t t = 1; t <= cfg.iterations; ++t) {
    ServerRoundOutcome out;
    out.t = t;
    compute_ms = 0.0;
    const uint64_t bytes_before = hub.BodyBytes();
    const auto wait_start = Clock::now() + opts.connect_timeout;

    // L_{S,t} closes when every user has reported or the deadline passes.
    while (server.OnlineUsers(t).size() < cfg.n) {
      const auto it = first_seen.find(t);
      const auto deadline = it == first_seen.end() ? wait_start : it->second + cfg.round_deadline;
      auto item = hub.inbox.PopUntil(deadline);
      if (!item) break;
      handle(*item);
    }
    closed_through = t;
    out.online = server.OnlineUsers(t);

    const std::vector<uint32_t> active = protocol::ActiveNodes(cfg, t);
    auto have_all_aggs = [&] { return aggs[t].size() >= active.size(); };
    pump_until(Clock::now() + cfg.round_deadline, have_all_aggs);

    std::optional<protocol::RoundResult> result;
    try {
      Timed(compute_ms, [&] { result = server.FinalizeRound(t, aggs[t]); });
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kListMismatch && cfg.reconcile) {
        Bytes body;
        Timed(compute_ms, [&] { body = transport::EncodeReconcileRequest(server.BuildReconcileRequest(t), wf); });
        aggs[t].clear();
        for (uint32_t j : active) hub.Send(NodeId(j), MessageType::kReconcileRequest, ServerId(), body);
        pump_until(Clock::now() + cfg.round_deadline, have_all_aggs);
        out.reconciled = true;
        try {
          Timed(compute_ms, [&] { result = server.FinalizeRound(t, aggs[t]); });
        } catch (const Error& e2) {
          out.error = e2.code();
          out.error_message = e2.what();
        }
      } else {
        out.error = e.code();
        out.error_message = e.what();
      }
    }
    aggs.erase(t);

    if (result) {
      Bytes body;
      Timed(compute_ms, [&] { body = transport::EncodeRoundResult(*result, wf); });
      for (uint32_t i : out.online) hub.Send(UserId(i), MessageType::kRoundResult, ServerId(), body);
      out.result = std::move(result);
    }
    out.compute_ms = compute_ms;
    out.body_bytes = hub.BodyBytes() - bytes_before;
    Json line = {{"role", "server"}, {"t", t}, {"online", out.online.size()}, {"reconciled", out.reconciled},
                 {"compute_ms", out.compute_ms}};
    if (out.error) {
      line["error"] = std::string(ErrorCodeName(*out.error));
      line["message"] = out.error_message;
    }
    Log(opts, line);
    const bool failed = out.error.has_value();
    outcomes.push_back(std::move(out));
    if (failed) break;  // users are waiting on a result that will not come
  }
  hub.CloseAll();
  return outcomes;
}

std::vector<NodeRoundOutcome> RunNode(const NetOptions& opts, uint32_t index, const Secrets& secrets,
                                      transport::TcpListener& listener, crypto::Rng& rng) {
  const protocol::ProtocolConfig& cfg = opts.cfg;
  cfg.Validate();
  RequireKxSeeds(cfg);
  const protocol::WireFormat wf = cfg.wire();
  const SecretEntry& own = OwnSecrets(secrets, NodeId(index), cfg.malicious(), true);
  protocol::NodeState node = protocol::NodeState::FromKeys(cfg, index, crypto::KxKeyPair::FromSecret(*own.kx),
                                                           SigFrom(own, cfg.malicious()), rng);
  std::map<uint32_t, protocol::SetupCiphertext> setup_cts;
  for (auto& ct : node.RegisterUsers(opts.roster.Users(cfg.n), rng)) setup_cts.emplace(ct.user, std::move(ct));
  if (cfg.malicious()) {
    const auto server_sig = opts.roster.ServerSig();
    if (!server_sig) Fail(ErrorCode::kInvalidConfig, "roster lacks the server signing key");
    node.InstallServerKey(*server_sig);
  }

  Hub hub(opts);
  hub.StartAccepting(listener);
  const uint64_t server_conn = hub.Add(transport::TcpStream::Connect(opts.server, opts.connect_timeout));
  hub.Bind(server_conn, ServerId());
  hub.SendRaw(server_conn, Frame{MessageType::kKeyAnnounce, node.id(), transport::EncodeKeyAnnounce(node.Announcement())});
  Log(opts, {{"role", "node"}, {"index", index}, {"event", "connected"}, {"port", listener.port()}});

  std::map<uint32_t, Clock::time_point> first_seen;
  bool server_gone = false;
  double compute_ms = 0.0;

  auto handle = [&](const InboxItem& item) {
    if (!item.frame) {
      if (item.connection == server_conn) server_gone = true;
      hub.Drop(item.connection);
      return;
    }
    const Frame& f = *item.frame;
    const auto peer = hub.PeerOf(item.connection);
    if (!peer) {
      if (f.sender.role == Role::kUser && hub.Authenticate(item.connection, f, wf)) {
        const auto it = setup_cts.find(f.sender.index);
        if (it != setup_cts.end()) {
          hub.Send(f.sender, MessageType::kSetupCiphertext, node.id(), transport::EncodeSetupCiphertext(it->second));
        }
      }
      return;
    }
    if (f.sender != *peer) return;
    try {
      if (f.type == MessageType::kParticipation && f.sender.role == Role::kUser) {
        Timed(compute_ms, [&] {
          const auto msg = transport::DecodeParticipation(f.body, wf);
          if (node.HandleParticipation(f.sender, msg)) first_seen.try_emplace(msg.t, Clock::now());
        });
      } else if (f.type == MessageType::kReconcileRequest && f.sender.role == Role::kServer) {
        Bytes body;
        Timed(compute_ms, [&] {
          body = transport::EncodeNodeAggregate(node.HandleReconcile(transport::DecodeReconcileRequest(f.body, wf)), wf);
        });
        hub.Send(ServerId(), MessageType::kNodeAggregate, node.id(), std::move(body));
      }
    } catch (const Error& e) {
      Log(opts, {{"role", "node"}, {"index", index}, {"rejected", std::string(ErrorCodeName(e.code()))}});
    }
  };

  std::vector<NodeRoundOutcome> outcomes;
  for (uint32_t t = 1; t <= cfg.iterations && !server_gone; ++t) {
    const auto active = protocol::ActiveNodes(cfg, t);
    if (!std::binary_search(active.begin(), active.end(), index)) continue;
    NodeRoundOutcome out;
    out.t = t;
    compute_ms = 0.0;
    const uint64_t bytes_before = hub.BodyBytes();
    const auto wait_start = Clock::now() + opts.connect_timeout;
    while (!server_gone && node.ListFor(t).size() < cfg.n) {
      const auto it = first_seen.find(t);
      const auto deadline = it == first_seen.end() ? wait_start : it->second + cfg.round_deadline;
      auto item = hub.inbox.PopUntil(deadline);
      if (!item) break;
      handle(*item);
    }
    if (server_gone) break;
    Bytes body;
    Timed(compute_ms, [&] {
      try {
        const auto msg = node.EmitAggregate(t);
        out.list_len = msg.list_len;
        body = transport::EncodeNodeAggregate(msg, wf);
        out.emitted = true;
      } catch (const Error& e) {
        Log(opts, {{"role", "node"}, {"index", index}, {"t", t}, {"error", std::string(ErrorCodeName(e.code()))}});
      }
    });
    if (out.emitted) hub.Send(ServerId(), MessageType::kNodeAggregate, node.id(), std::move(body));
    out.compute_ms = compute_ms;
    out.body_bytes = hub.BodyBytes() - bytes_before;
    Log(opts, {{"role", "node"}, {"index", index}, {"t", t}, {"list_len", out.list_len}, {"emitted", out.emitted}});
    outcomes.push_back(out);
  }
  // Serve reconcile requests until the server hangs up.
  while (!server_gone) {
    auto item = hub.inbox.PopUntil(Clock::now() + opts.connect_timeout);
    if (!item) break;
    const uint64_t before = hub.BodyBytes();
    handle(*item);
    if (!outcomes.empty()) outcomes.back().body_bytes += hub.BodyBytes() - before;
  }
  hub.CloseAll();
  return outcomes;
}

std::vector<UserRoundOutcome> RunUser(const NetOptions& opts, uint32_t index, const Secrets& secrets,
                                      const std::function<GradientVector(uint32_t t)>& input) {
  const protocol::ProtocolConfig& cfg = opts.cfg;
  cfg.Validate();
  RequireKxSeeds(cfg);
  const protocol::WireFormat wf = cfg.wire();
  if (opts.nodes.size() != cfg.PoolSize()) {
    Fail(ErrorCode::kInvalidConfig, "need one endpoint per pool node");
  }
  const SecretEntry& own = OwnSecrets(secrets, UserId(index), cfg.malicious(), true);
  protocol::UserState user =
      protocol::UserState::FromKeys(cfg, index, crypto::KxKeyPair::FromSecret(*own.kx), SigFrom(own, cfg.malicious()));
  user.InstallNodeKeys(opts.roster.Nodes(cfg.PoolSize()), opts.roster.ServerSig());

  Hub hub(opts);
  const Bytes announce = transport::EncodeKeyAnnounce(user.Announcement());
  auto connect = [&](const transport::Endpoint& ep, const PartyId& peer) {
    const uint64_t c = hub.Add(transport::TcpStream::Connect(ep, opts.connect_timeout));
    hub.Bind(c, peer);
    hub.SendRaw(c, Frame{MessageType::kKeyAnnounce, user.id(), announce});
    return c;
  };
  const uint64_t server_conn = connect(opts.server, ServerId());
  for (uint32_t j = 0; j < cfg.PoolSize(); ++j) connect(opts.nodes[j], NodeId(j));

  std::map<uint32_t, protocol::RoundResult> results;
  bool server_gone = false;
  auto handle = [&](const InboxItem& item) {
    if (!item.frame) {
      if (item.connection == server_conn) server_gone = true;
      return;
    }
    const Frame& f = *item.frame;
    const auto peer = hub.PeerOf(item.connection);
    if (!peer || f.sender != *peer) return;
    try {
      if (f.type == MessageType::kSetupCiphertext && f.sender.role == Role::kNode) {
        user.InstallSetupCiphertext(f.sender.index, transport::DecodeSetupCiphertext(f.body));
      } else if (f.type == MessageType::kRoundResult && f.sender.role == Role::kServer) {
        auto r = transport::DecodeRoundResult(f.body, wf);
        results.insert_or_assign(r.t, std::move(r));
      }
    } catch (const Error& e) {
      Log(opts, {{"role", "user"}, {"index", index}, {"rejected", std::string(ErrorCodeName(e.code()))}});
    }
  };

  const auto setup_deadline = Clock::now() + opts.connect_timeout;
  while (!user.Ready()) {
    auto item = hub.inbox.PopUntil(setup_deadline);
    if (!item) Fail(ErrorCode::kTimeout, "setup ciphertexts did not arrive");
    handle(*item);
    if (server_gone) Fail(ErrorCode::kConnectionClosed, "server closed during setup");
  }

  std::vector<UserRoundOutcome> outcomes;
  for (uint32_t t = 1; t <= cfg.iterations; ++t) {
    UserRoundOutcome out;
    out.t = t;
    const uint64_t bytes_before = hub.BodyBytes();
    const GradientVector w = input(t);
    Bytes update;
    std::vector<std::pair<uint32_t, Bytes>> parts;
    Timed(out.compute_ms, [&] {
      const auto msgs = user.RoundQuantized(t, w);
      update = transport::EncodeMaskedUpdate(msgs.update, wf);
      for (const auto& [j, p] : msgs.participations) parts.emplace_back(j, transport::EncodeParticipation(p, wf));
    });
    hub.Send(ServerId(), MessageType::kMaskedUpdate, user.id(), std::move(update));
    if (cfg.reconcile && !parts.empty()) {
      hub.Send(ServerId(), MessageType::kParticipation, user.id(), parts.front().second);
    }
    for (auto& [j, body] : parts) hub.Send(NodeId(j), MessageType::kParticipation, user.id(), std::move(body));
    out.body_bytes = hub.BodyBytes() - bytes_before;

    const auto deadline = Clock::now() + 4 * cfg.round_deadline + opts.connect_timeout;
    while (results.count(t) == 0 && !server_gone) {
      auto item = hub.inbox.PopUntil(deadline);
      if (!item) break;
      handle(*item);
    }
    const auto it = results.find(t);
    if (it == results.end()) {
      Fail(server_gone ? ErrorCode::kConnectionClosed : ErrorCode::kTimeout,
           "no result for round " + std::to_string(t));
    }
    out.result = it->second;
    if (cfg.integrity) Timed(out.compute_ms, [&] { out.verified = user.VerifyResult(*out.result); });
    Json line = {{"role", "user"}, {"index", index}, {"t", t}, {"count", out.result->contributor_count}};
    if (out.verified) line["verified"] = *out.verified;
    Log(opts, line);
    outcomes.push_back(std::move(out));
  }
  hub.CloseAll();
  return outcomes;
}

RoundReport RunTcpRoundTrip(const protocol::ProtocolConfig& cfg_in, std::span<const GradientVector> inputs,
                            uint64_t seed, const std::set<uint32_t>& offline_users) {
  protocol::ProtocolConfig cfg = cfg_in;
  cfg.iterations = 1;
  cfg.Validate();
  if (inputs.size() != cfg.n) Fail(ErrorCode::kLengthMismatch, "need one input per user");
  crypto::DeterministicRng rng(seed);
  auto [roster, secrets] = GenerateRoster(cfg, rng);

  const transport::Endpoint loopback{"127.0.0.1", 0};
  transport::TcpListener server_listener(loopback);
  std::vector<std::unique_ptr<transport::TcpListener>> node_listeners;
  NetOptions opts;
  opts.cfg = cfg;
  opts.roster = roster;
  opts.server = {"127.0.0.1", server_listener.port()};
  opts.connect_timeout = std::chrono::milliseconds(10000);
  for (uint32_t j = 0; j < cfg.PoolSize(); ++j) {
    node_listeners.push_back(std::make_unique<transport::TcpListener>(loopback));
    opts.nodes.push_back({"127.0.0.1", node_listeners.back()->port()});
  }

  std::mutex err_mu;
  std::exception_ptr first_error;
  auto guard = [&](auto&& fn) {
    return [&, fn]() mutable {
      try {
        fn();
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    };
  };

  std::vector<ServerRoundOutcome> server_out;
  std::vector<std::vector<NodeRoundOutcome>> node_out(cfg.PoolSize());
  std::vector<std::vector<UserRoundOutcome>> user_out(cfg.n);
  std::vector<std::thread> threads;
  threads.emplace_back(guard([&] { server_out = RunServer(opts, secrets, server_listener); }));
  for (uint32_t j = 0; j < cfg.PoolSize(); ++j) {
    threads.emplace_back(guard([&, j] {
      crypto::DeterministicRng node_rng(seed * 1000003 + j);
      node_out[j] = RunNode(opts, j, secrets, *node_listeners[j], node_rng);
    }));
  }
  for (uint32_t i = 0; i < cfg.n; ++i) {
    if (offline_users.count(i) != 0) continue;
    threads.emplace_back(guard([&, i] { user_out[i] = RunUser(opts, i, secrets, [&, i](uint32_t) { return inputs[i]; }); }));
  }
  for (auto& th : threads) th.join();

  RoundReport rep;
  rep.t = 1;
  rep.costs.users.resize(cfg.n);
  rep.costs.nodes.resize(cfg.PoolSize());
  rep.user_accepts.assign(cfg.n, std::nullopt);
  if (server_out.empty()) {
    if (first_error) std::rethrow_exception(first_error);
    Fail(ErrorCode::kInternal, "server produced no outcome");
  }
  const ServerRoundOutcome& s = server_out.front();
  rep.online = s.online;
  rep.reconciled = s.reconciled;
  rep.error = s.error;
  rep.error_message = s.error_message;
  rep.costs.server = {s.compute_ms, s.body_bytes, 0};
  for (uint32_t j = 0; j < cfg.PoolSize(); ++j) {
    if (!node_out[j].empty()) rep.costs.nodes[j] = {node_out[j].front().compute_ms, node_out[j].front().body_bytes, 0};
  }
  for (uint32_t i = 0; i < cfg.n; ++i) {
    if (user_out[i].empty()) continue;
    rep.costs.users[i] = {user_out[i].front().compute_ms, user_out[i].front().body_bytes, 0};
    rep.user_accepts[i] = user_out[i].front().verified;
  }
  if (s.result) {
    rep.result = s.result;
    rep.expected = PlaintextSum(inputs, rep.online);
    rep.oracle_match = rep.result->w == rep.expected;
  } else if (!rep.error && first_error) {
    std::rethrow_exception(first_error);
  }
  return rep;
}

}  // namespace seafl::harness
