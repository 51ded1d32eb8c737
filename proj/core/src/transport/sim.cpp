#include "seafl/transport/sim.hpp"

#include <algorithm>

namespace seafl::transport {

SimNetwork::SimNetwork(SimPolicy policy) : policy_(std::move(policy)), rng_(policy_.seed) {}

void SimNetwork::SetOnline(const protocol::PartyId& party, bool online) {
  if (online) {
    offline_.erase(party);
  } else {
    offline_.insert(party);
  }
}

bool SimNetwork::IsOnline(const protocol::PartyId& party) const { return offline_.count(party) == 0; }

bool SimNetwork::Send(const protocol::PartyId& to, const Frame& frame) {
  const protocol::PartyId& from = frame.sender;
  if (!IsOnline(from)) return false;
  Bytes wire = EncodeFrame(frame);
  TrafficCounters& c = counters_[from];
  c.body_bytes += frame.body.size();
  c.frame_bytes += wire.size();
  c.frames += 1;

  if (!IsOnline(to)) return false;
  if (policy_.drop_if && policy_.drop_if(from, to, frame)) return false;
  if (policy_.drop_probability > 0.0) {
    const double u = static_cast<double>(rng_.NextU64() >> 11) * 0x1.0p-53;
    if (u < policy_.drop_probability) return false;
  }
  SimTime delay = policy_.base_delay_us;
  if (policy_.jitter_us > 0) delay += rng_.UniformBelow(policy_.jitter_us + 1);
  if (policy_.extra_delay) delay += policy_.extra_delay(from, to, frame);

  SimTime& tail = link_tail_[{from, to}];
  const SimTime at = std::max(now_ + delay, tail);
  tail = at;
  queue_.push(Event{at, seq_++, to, std::move(wire)});
  return true;
}

std::optional<SimTime> SimNetwork::NextTime() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().at;
}

std::optional<Delivery> SimNetwork::Next(SimTime until) {
  while (!queue_.empty() && queue_.top().at <= until) {
    Event ev = std::move(const_cast<Event&>(queue_.top()));  // popped immediately
    queue_.pop();
    now_ = std::max(now_, ev.at);
    // A party that went offline after the send never sees the message.
    if (!IsOnline(ev.to)) continue;
    return Delivery{ev.at, ev.to, DecodeFrame(ev.wire)};
  }
  return std::nullopt;
}

void SimNetwork::Clear() {
  queue_ = {};
  link_tail_.clear();
}

void SimNetwork::AdvanceTo(SimTime t) { now_ = std::max(now_, t); }

const TrafficCounters& SimNetwork::Outbound(const protocol::PartyId& party) const {
  static const TrafficCounters kZero;
  const auto it = counters_.find(party);
  return it == counters_.end() ? kZero : it->second;
}

void SimNetwork::ResetCounters() { counters_.clear(); }

}  // namespace seafl::transport
