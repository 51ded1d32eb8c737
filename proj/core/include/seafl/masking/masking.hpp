#pragma once

// Fixed-point quantization and mask arithmetic over the ring Z_{2^32}.
//
// A user's mask is the sum of one PRF expansion per assisting node; a node's
// aggregate mask is the sum of one PRF expansion per listed user. Because
// both sides expand the same (user, node) seeds, summing all node aggregates
// reproduces the sum of all user masks and the server can unmask the total
// without seeing any individual update.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "seafl/crypto/group.hpp"
#include "seafl/crypto/kx.hpp"

namespace seafl::masking {

using crypto::Scalar;
using crypto::SharedSeed;

struct QuantizationConfig {
  uint32_t frac_bits = 16;
  uint32_t element_bound = 1u << 20;  // B; plaintext elements lie in [0, B)
  uint32_t max_contributors = 4096;   // n_max with n_max * B <= 2^32

  // Throws kInvalidConfig when n_max * B overflows the ring.
  void Validate() const;
};

// Length-d vector of ring elements mod 2^32.
struct GradientVector {
  std::vector<uint32_t> elems;

  GradientVector() = default;
  explicit GradientVector(std::vector<uint32_t> e) : elems(std::move(e)) {}
  explicit GradientVector(size_t d) : elems(d, 0) {}

  size_t size() const { return elems.size(); }
  uint32_t operator[](size_t i) const { return elems[i]; }
  uint32_t& operator[](size_t i) { return elems[i]; }
  std::span<const uint32_t> view() const { return elems; }

  friend bool operator==(const GradientVector&, const GradientVector&) = default;
};

struct MaskVector {
  std::vector<uint32_t> elems;
  std::optional<Scalar> r_lane;  // integrity mode only

  size_t size() const { return elems.size(); }
  friend bool operator==(const MaskVector&, const MaskVector&) = default;
};

// elems[i] = clamp(round(x[i] * 2^f) + B/2, 0, B-1)
GradientVector Quantize(std::span<const double> x, const QuantizationConfig& cfg);

// (sum[i] - n*B/2) / (n * 2^f): the mean of the n encoded inputs.
std::vector<double> Dequantize(const GradientVector& sum, size_t n_contributors,
                               const QuantizationConfig& cfg);

// sum_j PRF(seeds[j], t) elementwise; r_lane = sum_j PrfDeriveScalar when
// `integrity` is set. Throws kEmptyList for k = 0.
MaskVector DeriveUserMask(std::span<const SharedSeed> seeds, uint32_t t, size_t d, bool integrity);

// Same arithmetic from the node side, one seed per listed user.
MaskVector NodeAggregateMask(std::span<const SharedSeed> seeds, uint32_t t, size_t d, bool integrity);

// (w + a) mod 2^32. Throws kLengthMismatch.
GradientVector ApplyMask(const GradientVector& w, const MaskVector& a);

// (sum ys - sum node_masks) mod 2^32. Throws kEmptyList / kLengthMismatch.
GradientVector UnmaskSum(std::span<const GradientVector> ys, std::span<const MaskVector> node_masks);

}  // namespace seafl::masking
