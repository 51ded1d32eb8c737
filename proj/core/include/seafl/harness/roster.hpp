#pragma once

// Pre-distributed public keys, the authenticity root for networked runs.
// One line per party:
//
//   role,index,kx_pk_hex,sig_pk_hex
//
// Empty fields mean "no such key" (the server has no kx key; semi-honest
// parties have no signing key). The secrets file has the same shape with
// secret scalars in place of public keys. Blank lines and lines starting
// with '#' are ignored.

#include <optional>
#include <string>
#include <vector>

#include "seafl/crypto/rng.hpp"
#include "seafl/protocol/config.hpp"
#include "seafl/protocol/party.hpp"

namespace seafl::harness {

struct RosterEntry {
  protocol::PartyId id;
  std::optional<crypto::PointBytes> kx;
  std::optional<crypto::PointBytes> sig;
};

struct SecretEntry {
  protocol::PartyId id;
  std::optional<crypto::Scalar> kx;
  std::optional<crypto::Scalar> sig;
};

class Roster {
 public:
  std::vector<RosterEntry> entries;

  // Throws kUnknownUser / kUnknownNode when the party is absent.
  const RosterEntry& Find(const protocol::PartyId& id) const;
  std::vector<protocol::PartyKeys> Users(uint32_t n) const;
  std::vector<protocol::PartyKeys> Nodes(uint32_t pool) const;
  std::optional<crypto::PointBytes> ServerSig() const;
};

struct Secrets {
  std::vector<SecretEntry> entries;

  const SecretEntry& Find(const protocol::PartyId& id) const;
};

// Fresh keys for the server, the node pool and n users.
std::pair<Roster, Secrets> GenerateRoster(const protocol::ProtocolConfig& cfg, crypto::Rng& rng);

std::string FormatRoster(const Roster& roster);
std::string FormatSecrets(const Secrets& secrets);
// Throw kInvalidConfig with the offending line number.
Roster ParseRoster(const std::string& text);
Secrets ParseSecrets(const std::string& text);

Roster ReadRosterFile(const std::string& path);
Secrets ReadSecretsFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace seafl::harness
