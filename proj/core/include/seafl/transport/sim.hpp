#pragma once

// Deterministic in-process network. Every send is encoded to wire bytes,
// scheduled on a (time, sequence) ordered queue and decoded on delivery, so
// tests exercise the real framing and byte accounting. Per-link FIFO order
// holds even under jitter.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <vector>

#include "seafl/crypto/rng.hpp"
#include "seafl/transport/frame.hpp"

namespace seafl::transport {

using SimTime = uint64_t;  // microseconds

struct SimPolicy {
  uint64_t seed = 0;
  SimTime base_delay_us = 100;
  SimTime jitter_us = 0;
  double drop_probability = 0.0;
  // Return true to drop one specific message. Consulted before the random
  // drop draw.
  std::function<bool(const protocol::PartyId& from, const protocol::PartyId& to, const Frame&)> drop_if;
  // Extra delay for one specific message, on top of base and jitter.
  std::function<SimTime(const protocol::PartyId& from, const protocol::PartyId& to, const Frame&)> extra_delay;
};

struct Delivery {
  SimTime at = 0;
  protocol::PartyId to;
  Frame frame;
};

struct TrafficCounters {
  uint64_t body_bytes = 0;
  uint64_t frame_bytes = 0;
  uint64_t frames = 0;
};

class SimNetwork {
 public:
  explicit SimNetwork(SimPolicy policy = {});

  // Offline parties neither send nor receive; their sends are not counted.
  void SetOnline(const protocol::PartyId& party, bool online);
  bool IsOnline(const protocol::PartyId& party) const;

  // Returns false when the message was not scheduled (sender or receiver
  // offline, or dropped by policy). Bytes are counted whenever an online
  // sender writes the frame, dropped or not.
  bool Send(const protocol::PartyId& to, const Frame& frame);

  // Earliest pending delivery time, if any.
  std::optional<SimTime> NextTime() const;
  // Pops the next delivery no later than `until` and advances the clock.
  std::optional<Delivery> Next(SimTime until);
  // Discards every pending delivery.
  void Clear();
  SimTime now() const { return now_; }
  void AdvanceTo(SimTime t);

  const TrafficCounters& Outbound(const protocol::PartyId& party) const;
  void ResetCounters();

 private:
  struct Event {
    SimTime at;
    uint64_t seq;
    protocol::PartyId to;
    Bytes wire;
    bool operator>(const Event& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };

  SimPolicy policy_;
  crypto::DeterministicRng rng_;
  SimTime now_ = 0;
  uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::set<protocol::PartyId> offline_;
  std::map<std::pair<protocol::PartyId, protocol::PartyId>, SimTime> link_tail_;
  std::map<protocol::PartyId, TrafficCounters> counters_;
};

}  // namespace seafl::transport
