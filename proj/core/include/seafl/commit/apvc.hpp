#pragma once

// Authenticated Pedersen vector commitments (APVC) and the server's proof
// of honest aggregation.
//
//   Comm(rho, x, r) = h*r + sum_i g_i * (rho * x_i)        (additive notation)
//
// The scheme is homomorphic in (x, r) for a fixed rho, which is what lets the
// server fold every online user's commitment into a single point x_t that a
// key holder checks against the broadcast sum w_t.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "seafl/crypto/group.hpp"
#include "seafl/crypto/rng.hpp"

namespace seafl::commit {

using crypto::Point;
using crypto::Scalar;

inline constexpr std::string_view kDefaultLabel = "e-seafl-apvc-v1";

// Public parameters. h is HashToCurve(label, 0) and g_i is
// HashToCurve(label, i) for i = 1..d, so the parameters for a shorter vector
// are a prefix of those for a longer one under the same label.
struct ApvcParams {
  std::vector<Point> g;
  Point h;

  size_t d() const { return g.size(); }

  static ApvcParams Setup(size_t d, std::string_view label = kDefaultLabel);
};

// Process-wide cache of Setup(d, kDefaultLabel). Hash-to-curve dominates
// setup cost for large d, and the parameters are public and immutable.
std::shared_ptr<const ApvcParams> SharedApvcParams(size_t d);

// The authentication key rho. Zero is rejected: with rho = 0 every vector
// opens every commitment.
class ApvcKey {
 public:
  explicit ApvcKey(const Scalar& rho);
  static ApvcKey Generate(crypto::Rng& rng);

  const Scalar& rho() const { return rho_; }

 private:
  Scalar rho_;
};

struct Commitment {
  Point point;
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

struct AggregationProof {
  Point x;
  uint32_t t = 0;
  friend bool operator==(const AggregationProof&, const AggregationProof&) = default;
};

Commitment Commit(const ApvcParams& params, const ApvcKey& key, std::span<const Scalar> x,
                  const Scalar& r);
// Ring-element overload: each x_i is taken as the integer exponent x_i.
Commitment Commit(const ApvcParams& params, const ApvcKey& key, std::span<const uint32_t> x,
                  const Scalar& r);

// Group sum of all commitments. Throws kEmptyList.
Commitment AggregateCommitments(std::span<const Commitment> cms);

// x_t = sum(cms) - h * sum_j node_r_lane_sums[j]. Throws kEmptyList when
// either list is empty.
AggregationProof ComputeProof(const ApvcParams& params, std::span<const Commitment> cms,
                              std::span<const Scalar> node_r_lane_sums, uint32_t t);

// Accepts iff sum_i g_i * (rho * w_i) == proof.x. Throws kLengthMismatch when
// w does not have d elements.
bool VerifyProof(const ApvcParams& params, const ApvcKey& key, std::span<const uint32_t> w,
                 const AggregationProof& proof);
bool VerifyProof(const ApvcParams& params, const ApvcKey& key, std::span<const Scalar> w,
                 const AggregationProof& proof);

}  // namespace seafl::commit
