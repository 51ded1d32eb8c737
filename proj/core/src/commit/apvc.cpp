#include "seafl/commit/apvc.hpp"

#include <map>
#include <mutex>

#include "seafl/common/error.hpp"

namespace seafl::commit {
namespace {

void CheckLength(const ApvcParams& params, size_t len) {
  if (len != params.d()) {
    Fail(ErrorCode::kLengthMismatch, "apvc: vector length " + std::to_string(len) +
                                         " does not match d=" + std::to_string(params.d()));
  }
}

}  // namespace

ApvcParams ApvcParams::Setup(size_t d, std::string_view label) {
  if (d == 0) Fail(ErrorCode::kInvalidConfig, "apvc: d must be >= 1");
  ApvcParams params;
  const ByteSpan l = AsBytes(label);
  params.h = Point::HashToCurve(l, 0);
  params.g.reserve(d);
  for (size_t i = 1; i <= d; ++i) params.g.push_back(Point::HashToCurve(l, static_cast<uint32_t>(i)));
  return params;
}

std::shared_ptr<const ApvcParams> SharedApvcParams(size_t d) {
  static std::mutex mu;
  static std::map<size_t, std::shared_ptr<const ApvcParams>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[d];
  if (!slot) slot = std::make_shared<const ApvcParams>(ApvcParams::Setup(d));
  return slot;
}

ApvcKey::ApvcKey(const Scalar& rho) : rho_(rho) {
  if (rho.IsZero()) Fail(ErrorCode::kInvalidScalar, "apvc: rho must be nonzero");
}

ApvcKey ApvcKey::Generate(crypto::Rng& rng) { return ApvcKey(Scalar::RandomNonZero(rng)); }

// sum g_i*(rho*x_i) is computed as (sum g_i*x_i)*rho: one multi-exponentiation
// with the raw exponents and a single scalar multiplication.
Commitment Commit(const ApvcParams& params, const ApvcKey& key, std::span<const Scalar> x,
                  const Scalar& r) {
  CheckLength(params, x.size());
  const Point body = Point::MultiExp(params.g, x) * key.rho();
  return {params.h * r + body};
}

Commitment Commit(const ApvcParams& params, const ApvcKey& key, std::span<const uint32_t> x,
                  const Scalar& r) {
  CheckLength(params, x.size());
  const Point body = Point::MultiExp(params.g, x) * key.rho();
  return {params.h * r + body};
}

Commitment AggregateCommitments(std::span<const Commitment> cms) {
  if (cms.empty()) Fail(ErrorCode::kEmptyList, "apvc: no commitments to aggregate");
  Point acc = cms.front().point;
  for (size_t i = 1; i < cms.size(); ++i) acc += cms[i].point;
  return {acc};
}

AggregationProof ComputeProof(const ApvcParams& params, std::span<const Commitment> cms,
                              std::span<const Scalar> node_r_lane_sums, uint32_t t) {
  if (node_r_lane_sums.empty()) Fail(ErrorCode::kEmptyList, "apvc: no assisting-node lanes");
  const Commitment total = AggregateCommitments(cms);
  Scalar r_total;
  for (const Scalar& s : node_r_lane_sums) r_total += s;
  return {total.point - params.h * r_total, t};
}

bool VerifyProof(const ApvcParams& params, const ApvcKey& key, std::span<const uint32_t> w,
                 const AggregationProof& proof) {
  CheckLength(params, w.size());
  return Point::MultiExp(params.g, w) * key.rho() == proof.x;
}

bool VerifyProof(const ApvcParams& params, const ApvcKey& key, std::span<const Scalar> w,
                 const AggregationProof& proof) {
  CheckLength(params, w.size());
  return Point::MultiExp(params.g, w) * key.rho() == proof.x;
}

}  // namespace seafl::commit
