#include "seafl/protocol/user.hpp"

#include <string>

#include "seafl/common/error.hpp"
#include "seafl/crypto/ae.hpp"
#include "seafl/crypto/prf.hpp"
#include "seafl/masking/masking.hpp"
#include "seafl/transport/codec.hpp"

namespace seafl::protocol {

crypto::SharedSeed SeedFromMaster(const crypto::Scalar& master, uint32_t user) {
  uint8_t ub[4];
  StoreU32Be(ub, user);
  crypto::SharedSeed seed;
  seed.bytes = crypto::Sha256({master.bytes(), AsBytes("user-seed"), ByteSpan(ub, 4)});
  return seed;
}

UserState::UserState(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
                     std::optional<crypto::SigKeyPair> sig)
    : cfg_(cfg), index_(index), kx_(std::move(kx)), sig_(std::move(sig)) {
  cfg_.Validate();
  if (index_ >= cfg_.n) Fail(ErrorCode::kUnknownUser, "user index out of range");
  if (cfg_.malicious() && !sig_) Fail(ErrorCode::kInvalidConfig, "malicious mode needs a signing key");
  if (cfg_.integrity) params_ = commit::SharedApvcParams(cfg_.d);
}

UserState UserState::Generate(const ProtocolConfig& cfg, uint32_t index, crypto::Rng& rng) {
  auto kx = crypto::KxKeyPair::Generate(rng);
  std::optional<crypto::SigKeyPair> sig;
  if (cfg.malicious()) sig = crypto::SigKeyPair::Generate(rng);
  return UserState(cfg, index, std::move(kx), std::move(sig));
}

UserState UserState::FromKeys(const ProtocolConfig& cfg, uint32_t index, crypto::KxKeyPair kx,
                              std::optional<crypto::SigKeyPair> sig) {
  return UserState(cfg, index, std::move(kx), std::move(sig));
}

KeyAnnounce UserState::Announcement() const {
  KeyAnnounce a;
  a.kx_public = kx_.public_key;
  if (sig_) a.sig_public = sig_->public_key;
  return a;
}

void UserState::InstallNodeKeys(std::span<const PartyKeys> nodes,
                                std::optional<crypto::PointBytes> server_sig) {
  if (nodes.size() != cfg_.PoolSize()) {
    Fail(ErrorCode::kInvalidConfig, "expected keys for " + std::to_string(cfg_.PoolSize()) + " nodes");
  }
  if (cfg_.malicious() && !server_sig) Fail(ErrorCode::kInvalidConfig, "malicious mode needs the server key");
  kx_seeds_.clear();
  node_sig_.clear();
  for (const PartyKeys& node : nodes) {
    kx_seeds_.push_back(crypto::KxDerive(kx_.secret, node.kx));
    node_sig_.push_back(node.sig);
  }
  seeds_ = kx_seeds_;
  // In master-derived mode the real mask seed arrives in a setup ciphertext.
  seed_ready_.assign(nodes.size(), cfg_.seed_source == SeedSource::kKeyExchange);
  server_sig_ = server_sig;
}

void UserState::InstallSetupCiphertext(uint32_t node, const SetupCiphertext& msg) {
  if (node >= kx_seeds_.size()) Fail(ErrorCode::kUnknownNode, "setup ciphertext from unknown node");
  if (msg.user != index_) Fail(ErrorCode::kAuthFailure, "setup ciphertext addressed to another user");
  const crypto::SharedSeed& key = kx_seeds_[node];
  if (!msg.rho_ct.empty()) {
    const Bytes rho = crypto::AeDecrypt(key, msg.rho_ct, crypto::kRhoNonce);
    rho_ = commit::ApvcKey(crypto::Scalar::FromCanonical(rho));
  }
  if (!msg.seed_ct.empty()) {
    const Bytes seed = crypto::AeDecrypt(key, msg.seed_ct, crypto::kSeedNonce);
    if (seed.size() != 32) Fail(ErrorCode::kAuthFailure, "seed ciphertext has wrong length");
    std::copy(seed.begin(), seed.end(), seeds_[node].bytes.begin());
    seed_ready_[node] = true;
  }
}

bool UserState::Ready() const {
  if (seeds_.size() != cfg_.PoolSize()) return false;
  for (bool r : seed_ready_) {
    if (!r) return false;
  }
  return !cfg_.integrity || rho_.has_value();
}

UserRoundOutput UserState::Round(uint32_t t, std::span<const double> w) {
  if (w.size() != cfg_.d) Fail(ErrorCode::kLengthMismatch, "local update length differs from d");
  return RoundQuantized(t, masking::Quantize(w, cfg_.quant));
}

UserRoundOutput UserState::RoundQuantized(uint32_t t, const GradientVector& w) {
  if (!Ready()) Fail(ErrorCode::kInvalidConfig, "user setup incomplete");
  if (w.size() != cfg_.d) Fail(ErrorCode::kLengthMismatch, "local update length differs from d");
  if (last_t_ && t <= *last_t_) {
    Fail(ErrorCode::kReplayedIteration, "iteration " + std::to_string(t) + " already used");
  }

  const std::vector<uint32_t> active = ActiveNodes(cfg_, t);
  std::vector<crypto::SharedSeed> round_seeds;
  round_seeds.reserve(active.size());
  for (uint32_t j : active) round_seeds.push_back(seeds_[j]);
  const masking::MaskVector a = masking::DeriveUserMask(round_seeds, t, cfg_.d, cfg_.integrity);

  const WireFormat wf = cfg_.wire();
  UserRoundOutput out;
  out.update.t = t;
  out.update.y = masking::ApplyMask(w, a);
  if (cfg_.integrity) out.update.cm = commit::Commit(*params_, *rho_, w.view(), *a.r_lane);
  if (cfg_.malicious()) {
    const Bytes body = transport::EncodeMaskedUpdateUnsigned(out.update, wf);
    out.update.sigma = crypto::Sign(sig_->secret, transport::SigningInput(MessageType::kMaskedUpdate, id(), body));
  }

  ParticipationMsg part{t, std::nullopt};
  if (cfg_.malicious()) {
    const Bytes body = transport::EncodeParticipationUnsigned(part, wf);
    part.sigma = crypto::Sign(sig_->secret, transport::SigningInput(MessageType::kParticipation, id(), body));
  }
  for (uint32_t j : active) out.participations.emplace_back(j, part);

  last_t_ = t;
  return out;
}

bool UserState::VerifyResult(const RoundResult& result) const {
  if (!cfg_.integrity) Fail(ErrorCode::kInvalidConfig, "result verification requires integrity mode");
  if (!rho_ || !result.proof) return false;
  if (result.w.size() != cfg_.d || result.proof->t != result.t) return false;
  return commit::VerifyProof(*params_, *rho_, result.w.view(), *result.proof);
}

std::pair<UserState, KeyAnnounce> UserSetup(const ProtocolConfig& cfg, uint32_t index, crypto::Rng& rng,
                                            std::span<const PartyKeys> nodes,
                                            std::optional<crypto::PointBytes> server_sig) {
  UserState user = UserState::Generate(cfg, index, rng);
  user.InstallNodeKeys(nodes, server_sig);
  KeyAnnounce announce = user.Announcement();
  return {std::move(user), std::move(announce)};
}

}  // namespace seafl::protocol
