#include "seafl/masking/masking.hpp"

#include <algorithm>
#include <cmath>

#include "seafl/common/error.hpp"
#include "seafl/crypto/prf.hpp"

namespace seafl::masking {
namespace {

MaskVector ExpandSum(std::span<const SharedSeed> seeds, uint32_t t, size_t d, bool integrity) {
  MaskVector out;
  out.elems.assign(d, 0);
  for (const SharedSeed& s : seeds) crypto::PrfAccumulateMasks(s, t, out.elems);
  if (integrity) {
    Scalar r;
    for (const SharedSeed& s : seeds) r += crypto::PrfDeriveScalar(s, t);
    out.r_lane = r;
  }
  return out;
}

}  // namespace

void QuantizationConfig::Validate() const {
  if (element_bound < 2 || element_bound % 2 != 0) {
    Fail(ErrorCode::kInvalidConfig, "element_bound must be an even number >= 2");
  }
  if (frac_bits > 30) Fail(ErrorCode::kInvalidConfig, "frac_bits must be <= 30");
  if (max_contributors == 0 ||
      static_cast<uint64_t>(max_contributors) * element_bound > (uint64_t{1} << 32)) {
    Fail(ErrorCode::kInvalidConfig, "max_contributors * element_bound exceeds 2^32");
  }
}

GradientVector Quantize(std::span<const double> x, const QuantizationConfig& cfg) {
  const double scale = std::ldexp(1.0, static_cast<int>(cfg.frac_bits));
  const double bias = cfg.element_bound / 2;
  const double top = cfg.element_bound - 1;
  GradientVector out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double v = std::nearbyint(x[i] * scale) + bias;
    if (std::isnan(v)) v = bias;
    v = std::clamp(v, 0.0, top);
    out[i] = static_cast<uint32_t>(v);
  }
  return out;
}

std::vector<double> Dequantize(const GradientVector& sum, size_t n_contributors,
                               const QuantizationConfig& cfg) {
  std::vector<double> out(sum.size());
  if (n_contributors == 0) return out;
  const double scale = std::ldexp(1.0, static_cast<int>(cfg.frac_bits));
  const double offset = static_cast<double>(n_contributors) * (cfg.element_bound / 2);
  const double denom = static_cast<double>(n_contributors) * scale;
  for (size_t i = 0; i < sum.size(); ++i) {
    out[i] = (static_cast<double>(sum[i]) - offset) / denom;
  }
  return out;
}

MaskVector DeriveUserMask(std::span<const SharedSeed> seeds, uint32_t t, size_t d, bool integrity) {
  if (seeds.empty()) Fail(ErrorCode::kEmptyList, "user mask needs at least one node seed");
  return ExpandSum(seeds, t, d, integrity);
}

MaskVector NodeAggregateMask(std::span<const SharedSeed> seeds, uint32_t t, size_t d, bool integrity) {
  if (seeds.empty()) Fail(ErrorCode::kEmptyList, "node aggregate over an empty user list");
  return ExpandSum(seeds, t, d, integrity);
}

GradientVector ApplyMask(const GradientVector& w, const MaskVector& a) {
  if (w.size() != a.size()) {
    Fail(ErrorCode::kLengthMismatch, "apply_mask: vector lengths differ");
  }
  GradientVector y(w.size());
  for (size_t i = 0; i < w.size(); ++i) y[i] = w[i] + a.elems[i];
  return y;
}

GradientVector UnmaskSum(std::span<const GradientVector> ys, std::span<const MaskVector> node_masks) {
  if (ys.empty() || node_masks.empty()) Fail(ErrorCode::kEmptyList, "unmask_sum: empty input list");
  const size_t d = ys.front().size();
  GradientVector acc(d);
  for (const auto& y : ys) {
    if (y.size() != d) Fail(ErrorCode::kLengthMismatch, "unmask_sum: masked update length differs");
    for (size_t i = 0; i < d; ++i) acc[i] += y[i];
  }
  for (const auto& a : node_masks) {
    if (a.size() != d) Fail(ErrorCode::kLengthMismatch, "unmask_sum: node mask length differs");
    for (size_t i = 0; i < d; ++i) acc[i] -= a.elems[i];
  }
  return acc;
}

}  // namespace seafl::masking
