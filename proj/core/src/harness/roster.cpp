#include "seafl/harness/roster.hpp"

#include <fstream>
#include <sstream>

#include "seafl/common/bytes.hpp"
#include "seafl/common/error.hpp"
#include "seafl/crypto/kx.hpp"
#include "seafl/crypto/sig.hpp"

namespace seafl::harness {

using protocol::PartyId;
using protocol::Role;

namespace {

Role ParseRole(const std::string& s, size_t line) {
  if (s == "user") return Role::kUser;
  if (s == "node") return Role::kNode;
  if (s == "server") return Role::kServer;
  Fail(ErrorCode::kInvalidConfig, "line " + std::to_string(line) + ": unknown role '" + s + "'");
}

// Splits "a,b,c,d" into exactly four fields.
std::vector<std::string> Fields(const std::string& line, size_t lineno) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  if (out.size() != 4) {
    Fail(ErrorCode::kInvalidConfig, "line " + std::to_string(lineno) + ": expected 4 comma-separated fields");
  }
  return out;
}

template <typename Entry, typename ParseKey>
std::vector<Entry> ParseLines(const std::string& text, ParseKey parse_key) {
  std::vector<Entry> entries;
  std::stringstream ss(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = Fields(line, lineno);
    Entry e;
    e.id.role = ParseRole(f[0], lineno);
    try {
      size_t used = 0;
      const unsigned long idx = std::stoul(f[1], &used);
      if (used != f[1].size() || idx > UINT32_MAX) throw std::out_of_range(f[1]);
      e.id.index = static_cast<uint32_t>(idx);
      if (!f[2].empty()) e.kx = parse_key(f[2]);
      if (!f[3].empty()) e.sig = parse_key(f[3]);
    } catch (const std::exception& ex) {
      Fail(ErrorCode::kInvalidConfig, "line " + std::to_string(lineno) + ": " + ex.what());
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

crypto::PointBytes ParsePoint(const std::string& hex) {
  const Bytes b = FromHex(hex);
  crypto::Point::Decode(b);  // validates
  crypto::PointBytes out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

crypto::Scalar ParseScalar(const std::string& hex) { return crypto::Scalar::FromCanonical(FromHex(hex)); }

template <typename Entries>
const auto& FindIn(const Entries& entries, const PartyId& id) {
  for (const auto& e : entries) {
    if (e.id == id) return e;
  }
  Fail(id.role == Role::kNode ? ErrorCode::kUnknownNode : ErrorCode::kUnknownUser,
       protocol::ToString(id) + " not in roster");
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const RosterEntry& Roster::Find(const PartyId& id) const { return FindIn(entries, id); }

std::vector<protocol::PartyKeys> Roster::Users(uint32_t n) const {
  std::vector<protocol::PartyKeys> out;
  for (uint32_t i = 0; i < n; ++i) {
    const RosterEntry& e = Find(protocol::UserId(i));
    if (!e.kx) Fail(ErrorCode::kInvalidConfig, "user " + std::to_string(i) + " has no kx key in roster");
    out.push_back({*e.kx, e.sig});
  }
  return out;
}

std::vector<protocol::PartyKeys> Roster::Nodes(uint32_t pool) const {
  std::vector<protocol::PartyKeys> out;
  for (uint32_t j = 0; j < pool; ++j) {
    const RosterEntry& e = Find(protocol::NodeId(j));
    if (!e.kx) Fail(ErrorCode::kInvalidConfig, "node " + std::to_string(j) + " has no kx key in roster");
    out.push_back({*e.kx, e.sig});
  }
  return out;
}

std::optional<crypto::PointBytes> Roster::ServerSig() const {
  for (const auto& e : entries) {
    if (e.id.role == Role::kServer) return e.sig;
  }
  return std::nullopt;
}

const SecretEntry& Secrets::Find(const PartyId& id) const { return FindIn(entries, id); }

std::pair<Roster, Secrets> GenerateRoster(const protocol::ProtocolConfig& cfg, crypto::Rng& rng) {
  Roster roster;
  Secrets secrets;
  auto add = [&](const PartyId& id, bool with_kx) {
    RosterEntry pub{id, std::nullopt, std::nullopt};
    SecretEntry sec{id, std::nullopt, std::nullopt};
    if (with_kx) {
      const auto kx = crypto::KxKeyPair::Generate(rng);
      pub.kx = kx.public_key;
      sec.kx = kx.secret;
    }
    if (cfg.malicious()) {
      const auto sig = crypto::SigKeyPair::Generate(rng);
      pub.sig = sig.public_key;
      sec.sig = sig.secret;
    }
    roster.entries.push_back(pub);
    secrets.entries.push_back(sec);
  };
  add(protocol::ServerId(), false);
  for (uint32_t j = 0; j < cfg.PoolSize(); ++j) add(protocol::NodeId(j), true);
  for (uint32_t i = 0; i < cfg.n; ++i) add(protocol::UserId(i), true);
  return {std::move(roster), std::move(secrets)};
}

std::string FormatRoster(const Roster& roster) {
  std::string out;
  for (const auto& e : roster.entries) {
    out += std::string(protocol::RoleName(e.id.role)) + "," + std::to_string(e.id.index) + ",";
    if (e.kx) out += ToHex(*e.kx);
    out += ",";
    if (e.sig) out += ToHex(*e.sig);
    out += "\n";
  }
  return out;
}

std::string FormatSecrets(const Secrets& secrets) {
  std::string out;
  for (const auto& e : secrets.entries) {
    out += std::string(protocol::RoleName(e.id.role)) + "," + std::to_string(e.id.index) + ",";
    if (e.kx) out += ToHex(e.kx->bytes());
    out += ",";
    if (e.sig) out += ToHex(e.sig->bytes());
    out += "\n";
  }
  return out;
}

Roster ParseRoster(const std::string& text) { return Roster{ParseLines<RosterEntry>(text, ParsePoint)}; }

Secrets ParseSecrets(const std::string& text) { return Secrets{ParseLines<SecretEntry>(text, ParseScalar)}; }

Roster ReadRosterFile(const std::string& path) { return ParseRoster(ReadFile(path)); }

Secrets ReadSecretsFile(const std::string& path) { return ParseSecrets(ReadFile(path)); }

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path);
  out << text;
  if (!out) Fail(ErrorCode::kIoError, "write failed for " + path);
}

}  // namespace seafl::harness
