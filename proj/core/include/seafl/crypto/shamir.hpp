#pragma once

// t-out-of-n Shamir secret sharing over any prime field. The protocol
// instantiates it with crypto::Scalar (Z_p, p the group order); tests also
// run it over tiny fields where failure probabilities are observable.

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "seafl/common/error.hpp"
#include "seafl/crypto/rng.hpp"

namespace seafl::crypto {

template <typename F>
concept PrimeField = std::equality_comparable<F> && requires(const F a, const F b, Rng& rng,
                                                             uint64_t v) {
  { a + b } -> std::same_as<F>;
  { a - b } -> std::same_as<F>;
  { a * b } -> std::same_as<F>;
  { a.Inverse() } -> std::same_as<F>;
  { a.IsZero() } -> std::same_as<bool>;
  { F::FromU64(v) } -> std::same_as<F>;
  { F::Random(rng) } -> std::same_as<F>;
};

template <PrimeField F>
struct ShamirShare {
  uint32_t index = 0;  // evaluation point, nonzero in F
  F value{};

  friend bool operator==(const ShamirShare&, const ShamirShare&) = default;
};

// Shares are the evaluations f(1..shares) of a random polynomial of degree
// threshold-1 with f(0) = secret.
template <PrimeField F>
std::vector<ShamirShare<F>> ShamirSplit(const F& secret, size_t threshold, size_t shares,
                                        Rng& rng) {
  if (threshold < 1 || threshold > shares) {
    Fail(ErrorCode::kInvalidThreshold, "shamir: need 1 <= threshold <= shares, got threshold=" +
                                           std::to_string(threshold) +
                                           " shares=" + std::to_string(shares));
  }
  if (shares > UINT32_MAX || F::FromU64(shares).IsZero()) {
    Fail(ErrorCode::kInvalidThreshold, "shamir: share count exceeds field size");
  }
  std::vector<F> coeffs;
  coeffs.reserve(threshold);
  coeffs.push_back(secret);
  for (size_t i = 1; i < threshold; ++i) coeffs.push_back(F::Random(rng));

  std::vector<ShamirShare<F>> out;
  out.reserve(shares);
  for (uint32_t x = 1; x <= shares; ++x) {
    const F fx = F::FromU64(x);
    // Horner
    F acc = coeffs.back();
    for (size_t c = coeffs.size() - 1; c-- > 0;) acc = acc * fx + coeffs[c];
    out.push_back({x, acc});
  }
  return out;
}

// Lagrange interpolation at zero over the first `threshold` shares. Every
// supplied share is checked for index uniqueness.
template <PrimeField F>
F ShamirReconstruct(std::span<const ShamirShare<F>> shares, size_t threshold) {
  if (threshold < 1) Fail(ErrorCode::kInvalidThreshold, "shamir: threshold must be >= 1");
  if (shares.size() < threshold) {
    Fail(ErrorCode::kInsufficientShares, "shamir: have " + std::to_string(shares.size()) +
                                             " shares, need " + std::to_string(threshold));
  }
  std::unordered_set<uint32_t> seen;
  for (const auto& s : shares) {
    if (s.index == 0 || F::FromU64(s.index).IsZero()) {
      Fail(ErrorCode::kDuplicateIndex, "shamir: share index must be nonzero");
    }
    if (!seen.insert(s.index).second) {
      Fail(ErrorCode::kDuplicateIndex, "shamir: duplicate share index " + std::to_string(s.index));
    }
  }

  const auto used = shares.first(threshold);
  F secret = F::FromU64(0);
  for (size_t i = 0; i < used.size(); ++i) {
    const F xi = F::FromU64(used[i].index);
    F num = F::FromU64(1);
    F den = F::FromU64(1);
    for (size_t j = 0; j < used.size(); ++j) {
      if (j == i) continue;
      const F xj = F::FromU64(used[j].index);
      num = num * xj;         // (0 - xj) sign folded into den
      den = den * (xj - xi);  // basis l_i(0) = prod xj / (xj - xi)
    }
    secret = secret + used[i].value * num * den.Inverse();
  }
  return secret;
}

template <PrimeField F>
F ShamirReconstruct(const std::vector<ShamirShare<F>>& shares, size_t threshold) {
  return ShamirReconstruct(std::span<const ShamirShare<F>>(shares), threshold);
}

}  // namespace seafl::crypto
