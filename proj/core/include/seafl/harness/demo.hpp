#pragma once

// Synthetic FedAvg: d-dimensional linear regression, standard-normal
// features, noise sigma 0.1, one full-batch gradient per user per round.
// The secure run aggregates gradients through the protocol; a plaintext
// twin applies the exact mean gradient so the two trajectories can be
// compared round by round.

#include <cstdint>
#include <string>
#include <vector>

#include "seafl/protocol/config.hpp"

namespace seafl::harness {

struct DemoSpec {
  uint32_t n = 8;
  uint32_t k = 3;
  uint32_t d = 16;
  uint32_t rounds = 20;
  uint32_t samples_per_user = 32;
  double learning_rate = 0.5;
  double noise_sigma = 0.1;
  protocol::Mode mode = protocol::Mode::kSemiHonest;
  bool integrity = false;
  bool tamper = false;  // server corrupts every broadcast result
  uint64_t seed = 1;
};

struct DemoRound {
  uint32_t t = 0;
  double secure_loss = 0.0;  // after applying the round's update
  double plain_loss = 0.0;
  double update_gap = 0.0;  // L-inf, secure vs exact mean gradient at the same model
  double model_gap = 0.0;   // L-inf, secure vs plaintext trajectory
  uint32_t accepted = 0;    // users whose integrity check passed
  uint32_t rejected = 0;
  bool applied = false;     // secure update applied to the model
};

struct DemoReport {
  double initial_loss = 0.0;
  std::vector<DemoRound> rounds;

  double MaxUpdateGap() const;
  double MaxModelGap() const;
  // Strictly decreasing secure loss over the first `count` rounds.
  bool LossDecreasing(size_t count) const;
};

DemoReport RunDemo(const DemoSpec& spec);
std::string FormatDemoTable(const DemoReport& report);

}  // namespace seafl::harness
