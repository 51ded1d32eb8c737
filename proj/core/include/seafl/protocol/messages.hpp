#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seafl/commit/apvc.hpp"
#include "seafl/common/bytes.hpp"
#include "seafl/crypto/group.hpp"
#include "seafl/crypto/hash.hpp"
#include "seafl/crypto/sig.hpp"
#include "seafl/masking/masking.hpp"

namespace seafl::protocol {

using crypto::PointBytes;
using crypto::Signature;
using masking::GradientVector;
using masking::MaskVector;

enum class MessageType : uint8_t {
  kKeyAnnounce = 0x01,
  kSetupCiphertext = 0x02,  // rho (and master-derived seed) ciphertexts
  kParticipation = 0x03,
  kMaskedUpdate = 0x04,
  kNodeAggregate = 0x05,
  kRoundResult = 0x06,
  kReconcileRequest = 0x07,
};

bool IsKnownMessageType(uint8_t tag);

// Setup-time public keys. Users and nodes always carry kx_public; sig_public
// is present in malicious mode. The server announces only sig_public.
struct KeyAnnounce {
  std::optional<PointBytes> kx_public;
  std::optional<PointBytes> sig_public;
  friend bool operator==(const KeyAnnounce&, const KeyAnnounce&) = default;
};

// From an assisting node to one user, encrypted under their shared seed.
struct SetupCiphertext {
  uint32_t user = 0;
  Bytes rho_ct;   // empty unless sent by the rho dealer in integrity mode
  Bytes seed_ct;  // empty unless seeds are master-derived
  friend bool operator==(const SetupCiphertext&, const SetupCiphertext&) = default;
};

// m' = (t)
struct ParticipationMsg {
  uint32_t t = 0;
  std::optional<Signature> sigma;
  friend bool operator==(const ParticipationMsg&, const ParticipationMsg&) = default;
};

// m = (t, y, cm)
struct MaskedUpdate {
  uint32_t t = 0;
  GradientVector y;
  std::optional<commit::Commitment> cm;
  std::optional<Signature> sigma;
  friend bool operator==(const MaskedUpdate&, const MaskedUpdate&) = default;
};

// m'' = (t, |L|, a). a.r_lane carries the node's randomness-lane sum in
// integrity mode.
struct AggregatedMaskMsg {
  uint32_t t = 0;
  uint32_t list_len = 0;
  std::optional<crypto::Digest> list_digest;
  MaskVector a;
  std::optional<Signature> sigma;
  friend bool operator==(const AggregatedMaskMsg&, const AggregatedMaskMsg&) = default;
};

struct RoundResult {
  uint32_t t = 0;
  uint32_t contributor_count = 0;
  GradientVector w;
  std::optional<commit::AggregationProof> proof;
  friend bool operator==(const RoundResult&, const RoundResult&) = default;
};

struct RelayedParticipation {
  uint32_t user = 0;
  ParticipationMsg msg;
  friend bool operator==(const RelayedParticipation&, const RelayedParticipation&) = default;
};

// Server -> node after a list mismatch: the server's list for round t plus
// the participation messages it holds for those users.
struct ReconcileRequest {
  uint32_t t = 0;
  std::vector<uint32_t> user_list;
  std::vector<RelayedParticipation> forwarded;
  std::optional<Signature> sigma;
  friend bool operator==(const ReconcileRequest&, const ReconcileRequest&) = default;
};

// SHA-256 over the sorted, duplicate-free ordinal list.
crypto::Digest ListDigest(const std::vector<uint32_t>& sorted_users);

}  // namespace seafl::protocol
