#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "seafl/commit/apvc.hpp"
#include "seafl/crypto/kx.hpp"
#include "seafl/crypto/sig.hpp"
#include "seafl/protocol/config.hpp"
#include "seafl/protocol/messages.hpp"
#include "seafl/protocol/party.hpp"

namespace seafl::protocol {

struct UserRoundOutput {
  MaskedUpdate update;                                          // to the server
  std::vector<std::pair<uint32_t, ParticipationMsg>> participations;  // per active node
};

// One federated-learning client. Holds a seed with every assisting node in
// the pool; once Round() returns, the user has nothing left to do for that
// iteration except (optionally) checking the result proof.
class UserState {
 public:
  static UserState Generate(const ProtocolConfig& cfg, uint32_t index, crypto::Rng& rng);
  static UserState FromKeys(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
                            std::optional<crypto::SigKeyPair> sig);

  PartyId id() const { return UserId(index_); }
  uint32_t index() const { return index_; }
  KeyAnnounce Announcement() const;

  // Derives one seed per pool node from the nodes' key-exchange keys.
  // `nodes` is indexed by node ordinal. Throws kInvalidPoint.
  void InstallNodeKeys(std::span<const PartyKeys> nodes, std::optional<crypto::PointBytes> server_sig);
  // Decrypts rho (from the dealer) and/or a master-derived seed. Throws
  // kAuthFailure on a tampered ciphertext.
  void InstallSetupCiphertext(uint32_t node, const SetupCiphertext& msg);
  bool Ready() const;

  // Quantizes w, masks it, commits (integrity), signs (malicious). Throws
  // kReplayedIteration if t is not above every previously used iteration.
  UserRoundOutput Round(uint32_t t, std::span<const double> w);
  UserRoundOutput RoundQuantized(uint32_t t, const GradientVector& w);

  // Checks the server's proof of honest aggregation. Throws kInvalidConfig
  // outside integrity mode.
  bool VerifyResult(const RoundResult& result) const;

  const std::vector<crypto::SharedSeed>& seeds() const { return seeds_; }
  const std::optional<commit::ApvcKey>& rho() const { return rho_; }
  const crypto::KxKeyPair& kx() const { return kx_; }
  const std::optional<crypto::SigKeyPair>& sig() const { return sig_; }

 private:
  UserState(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
            std::optional<crypto::SigKeyPair> sig);

  ProtocolConfig cfg_;
  uint32_t index_;
  crypto::KxKeyPair kx_;
  std::optional<crypto::SigKeyPair> sig_;
  std::vector<crypto::SharedSeed> kx_seeds_;  // ECDH seed per pool node
  std::vector<crypto::SharedSeed> seeds_;     // mask seed per pool node
  std::vector<bool> seed_ready_;
  std::optional<crypto::PointBytes> server_sig_;
  std::vector<std::optional<crypto::PointBytes>> node_sig_;
  std::optional<commit::ApvcKey> rho_;
  std::shared_ptr<const commit::ApvcParams> params_;
  std::optional<uint32_t> last_t_;
};

// Key generation plus seed derivation in one step, for callers that already
// hold every node key.
std::pair<UserState, KeyAnnounce> UserSetup(const ProtocolConfig& cfg, uint32_t index, crypto::Rng& rng,
                                            std::span<const PartyKeys> nodes,
                                            std::optional<crypto::PointBytes> server_sig);

}  // namespace seafl::protocol
