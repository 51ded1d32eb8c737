#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace seafl::crypto {

// Injectable entropy source. Also models UniformRandomBitGenerator so it can
// drive <random> distributions and std::shuffle in the harness.
class Rng {
 public:
  using result_type = uint64_t;

  virtual ~Rng() = default;
  virtual void Fill(std::span<uint8_t> out) = 0;

  uint64_t NextU64();
  // Uniform in [0, bound) by rejection; bound must be nonzero.
  uint64_t UniformBelow(uint64_t bound);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return NextU64(); }
};

// Operating-system CSPRNG.
class SystemRng final : public Rng {
 public:
  void Fill(std::span<uint8_t> out) override;
};

// AES-CTR keystream over a fixed seed. Reproducible across runs and
// platforms; used for tests, benches, and public-randomness expansion.
class DeterministicRng final : public Rng {
 public:
  explicit DeterministicRng(uint64_t seed);
  explicit DeterministicRng(std::span<const uint8_t> seed);

  void Fill(std::span<uint8_t> out) override;

 private:
  void Refill();

  std::array<uint8_t, 16> key_{};
  uint64_t block_counter_ = 0;
  std::vector<uint8_t> buffer_;
  size_t offset_ = 0;
};

}  // namespace seafl::crypto
