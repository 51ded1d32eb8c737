#pragma once

#include <cstdint>
#include <optional>

#include "seafl/common/error.hpp"
#include "seafl/crypto/group.hpp"
#include "seafl/crypto/kx.hpp"
#include "seafl/crypto/shamir.hpp"

namespace seafl::protocol {

// Public keys of one user or assisting node as learned during setup.
struct PartyKeys {
  crypto::PointBytes kx{};
  std::optional<crypto::PointBytes> sig;
};

// Outcome of handling one inbound message. Rejections are not fatal: the
// message is dropped and the reason recorded.
struct Verdict {
  bool accepted = false;
  std::optional<ErrorCode> reason;

  static Verdict Accept() { return {true, std::nullopt}; }
  static Verdict Reject(ErrorCode why) { return {false, why}; }
  explicit operator bool() const { return accepted; }
};

using MasterShare = crypto::ShamirShare<crypto::Scalar>;

// Per-user seed of an assisting node in master-derived mode.
crypto::SharedSeed SeedFromMaster(const crypto::Scalar& master, uint32_t user);

}  // namespace seafl::protocol
