#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>

#include "seafl/common/bytes.hpp"
#include "seafl/crypto/rng.hpp"

struct ec_point_st;

namespace seafl::crypto {

inline constexpr size_t kScalarBytes = 32;
inline constexpr size_t kPointBytes = 33;

using PointBytes = std::array<uint8_t, kPointBytes>;
using ScalarBytes = std::array<uint8_t, kScalarBytes>;

// Element of Z_p, p the order of the secp256k1 group. Stored as a canonical
// 32-byte big-endian integer strictly below p.
class Scalar {
 public:
  Scalar() = default;

  static Scalar FromU64(uint64_t v);
  // Interprets `data` as a big-endian integer of any length and reduces mod p.
  static Scalar FromBytesReduce(ByteSpan data);
  // Requires exactly 32 bytes encoding a value < p; throws kInvalidScalar.
  static Scalar FromCanonical(ByteSpan data);
  static Scalar Random(Rng& rng);
  static Scalar RandomNonZero(Rng& rng);
  // p as big-endian bytes.
  static const ScalarBytes& OrderBytes();

  const ScalarBytes& bytes() const { return bytes_; }
  bool IsZero() const;

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  // Throws kInvalidScalar on zero.
  Scalar Inverse() const;

  friend bool operator==(const Scalar&, const Scalar&) = default;

 private:
  explicit Scalar(const ScalarBytes& b) : bytes_(b) {}
  ScalarBytes bytes_{};
};

// Element of the secp256k1 group, written additively. The identity is a
// valid value and encodes as 33 zero bytes.
class Point {
 public:
  Point();
  ~Point();
  Point(const Point& other);
  Point(Point&& other) noexcept;
  Point& operator=(const Point& other);
  Point& operator=(Point&& other) noexcept;

  static Point Generator();
  static Point BaseMul(const Scalar& s);
  // Throws kInvalidPoint if `data` is not a 33-byte compressed point or the
  // all-zero identity encoding.
  static Point Decode(ByteSpan data);
  static std::optional<Point> TryDecode(ByteSpan data);
  // Try-and-increment: SHA-256(label || index || counter) as an x-coordinate
  // until it lands on the curve. Deterministic, no known discrete log.
  static Point HashToCurve(ByteSpan label, uint32_t index);

  // sum_i points[i] * scalars[i].
  static Point MultiExp(std::span<const Point> points, std::span<const Scalar> scalars);
  // Same with small nonnegative exponents, avoiding Scalar conversions.
  static Point MultiExp(std::span<const Point> points, std::span<const uint32_t> exponents);

  PointBytes Encode() const;
  bool IsIdentity() const;

  Point operator+(const Point& o) const;
  Point operator-(const Point& o) const;
  Point operator-() const;
  Point operator*(const Scalar& s) const;
  Point& operator+=(const Point& o) { return *this = *this + o; }

  friend bool operator==(const Point& a, const Point& b);

  const ec_point_st* native() const { return point_; }

 private:
  explicit Point(ec_point_st* raw) : point_(raw) {}
  ec_point_st* point_ = nullptr;
};

}  // namespace seafl::crypto
