#define OPENSSL_SUPPRESS_DEPRECATED  // EC_POINTs_mul has no non-deprecated multi-point equivalent

#include "seafl/crypto/group.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <algorithm>
#include <cstring>
#include <vector>

#include "seafl/common/error.hpp"
#include "seafl/crypto/hash.hpp"
#include "ossl_util.hpp"

namespace seafl::crypto {
namespace detail {

const EC_GROUP* Curve() {
  static const EC_GROUP* group = [] {
    EC_GROUP* g = EC_GROUP_new_by_curve_name(NID_secp256k1);
    if (g == nullptr) Fail(ErrorCode::kInternal, "secp256k1 unavailable in libcrypto");
    // Generator table speeds up BaseMul considerably.
    EC_GROUP_precompute_mult(g, Ctx());
    return g;
  }();
  return group;
}

BN_CTX* Ctx() {
  thread_local std::unique_ptr<BN_CTX, decltype(&BN_CTX_free)> ctx(BN_CTX_new(), &BN_CTX_free);
  return ctx.get();
}

const BIGNUM* Order() { return EC_GROUP_get0_order(Curve()); }

BnPtr ToBn(const ScalarBytes& b) {
  BnPtr bn(BN_bin2bn(b.data(), static_cast<int>(b.size()), nullptr));
  if (!bn) Fail(ErrorCode::kInternal, "BN_bin2bn failed");
  return bn;
}

ScalarBytes FromBn(const BIGNUM* bn) {
  ScalarBytes out{};
  if (BN_bn2binpad(bn, out.data(), static_cast<int>(out.size())) < 0) {
    Fail(ErrorCode::kInternal, "BN_bn2binpad failed");
  }
  return out;
}

}  // namespace detail

using detail::BnPtr;
using detail::Ctx;
using detail::Curve;

namespace {

EC_POINT* NewPoint() {
  EC_POINT* p = EC_POINT_new(Curve());
  if (p == nullptr) Fail(ErrorCode::kInternal, "EC_POINT_new failed");
  return p;
}

void Check(int rc, const char* what) {
  if (rc != 1) Fail(ErrorCode::kInternal, what);
}

}  // namespace

// ---- Scalar ----

Scalar Scalar::FromU64(uint64_t v) {
  ScalarBytes b{};
  StoreU64Be(b.data() + 24, v);
  return Scalar(b);  // 2^64 < p
}

Scalar Scalar::FromBytesReduce(ByteSpan data) {
  BnPtr bn(BN_bin2bn(data.data(), static_cast<int>(data.size()), nullptr));
  if (!bn) Fail(ErrorCode::kInternal, "BN_bin2bn failed");
  Check(BN_nnmod(bn.get(), bn.get(), detail::Order(), Ctx()), "BN_nnmod failed");
  return Scalar(detail::FromBn(bn.get()));
}

Scalar Scalar::FromCanonical(ByteSpan data) {
  if (data.size() != kScalarBytes) {
    Fail(ErrorCode::kInvalidScalar, "scalar encoding must be 32 bytes");
  }
  ScalarBytes b{};
  std::copy(data.begin(), data.end(), b.begin());
  if (!std::lexicographical_compare(b.begin(), b.end(), OrderBytes().begin(), OrderBytes().end())) {
    Fail(ErrorCode::kInvalidScalar, "scalar not reduced mod group order");
  }
  return Scalar(b);
}

Scalar Scalar::Random(Rng& rng) {
  // Rejection sampling keeps the distribution exactly uniform.
  for (;;) {
    ScalarBytes b{};
    rng.Fill(b);
    if (std::lexicographical_compare(b.begin(), b.end(), OrderBytes().begin(),
                                     OrderBytes().end())) {
      return Scalar(b);
    }
  }
}

Scalar Scalar::RandomNonZero(Rng& rng) {
  for (;;) {
    Scalar s = Random(rng);
    if (!s.IsZero()) return s;
  }
}

const ScalarBytes& Scalar::OrderBytes() {
  static const ScalarBytes order = detail::FromBn(detail::Order());
  return order;
}

bool Scalar::IsZero() const {
  return std::all_of(bytes_.begin(), bytes_.end(), [](uint8_t b) { return b == 0; });
}

Scalar Scalar::operator+(const Scalar& o) const {
  BnPtr a = detail::ToBn(bytes_), b = detail::ToBn(o.bytes_);
  Check(BN_mod_add(a.get(), a.get(), b.get(), detail::Order(), Ctx()), "BN_mod_add failed");
  return Scalar(detail::FromBn(a.get()));
}

Scalar Scalar::operator-(const Scalar& o) const {
  BnPtr a = detail::ToBn(bytes_), b = detail::ToBn(o.bytes_);
  Check(BN_mod_sub(a.get(), a.get(), b.get(), detail::Order(), Ctx()), "BN_mod_sub failed");
  return Scalar(detail::FromBn(a.get()));
}

Scalar Scalar::operator*(const Scalar& o) const {
  BnPtr a = detail::ToBn(bytes_), b = detail::ToBn(o.bytes_);
  Check(BN_mod_mul(a.get(), a.get(), b.get(), detail::Order(), Ctx()), "BN_mod_mul failed");
  return Scalar(detail::FromBn(a.get()));
}

Scalar Scalar::operator-() const { return Scalar() - *this; }

Scalar Scalar::Inverse() const {
  if (IsZero()) Fail(ErrorCode::kInvalidScalar, "inverse of zero");
  BnPtr a = detail::ToBn(bytes_);
  if (BN_mod_inverse(a.get(), a.get(), detail::Order(), Ctx()) == nullptr) {
    Fail(ErrorCode::kInternal, "BN_mod_inverse failed");
  }
  return Scalar(detail::FromBn(a.get()));
}

// ---- Point ----

Point::Point() : point_(NewPoint()) { Check(EC_POINT_set_to_infinity(Curve(), point_), "set_to_infinity failed"); }

Point::~Point() { EC_POINT_free(point_); }

Point::Point(const Point& other) : point_(EC_POINT_dup(other.point_, Curve())) {
  if (point_ == nullptr) Fail(ErrorCode::kInternal, "EC_POINT_dup failed");
}

Point::Point(Point&& other) noexcept : point_(other.point_) { other.point_ = nullptr; }

Point& Point::operator=(const Point& other) {
  if (this != &other) {
    if (point_ == nullptr) point_ = NewPoint();
    Check(EC_POINT_copy(point_, other.point_), "EC_POINT_copy failed");
  }
  return *this;
}

Point& Point::operator=(Point&& other) noexcept {
  std::swap(point_, other.point_);
  return *this;
}

Point Point::Generator() { return Point(EC_POINT_dup(EC_GROUP_get0_generator(Curve()), Curve())); }

Point Point::BaseMul(const Scalar& s) {
  BnPtr k = detail::ToBn(s.bytes());
  EC_POINT* r = NewPoint();
  Check(EC_POINT_mul(Curve(), r, k.get(), nullptr, nullptr, Ctx()), "EC_POINT_mul failed");
  return Point(r);
}

std::optional<Point> Point::TryDecode(ByteSpan data) {
  if (data.size() != kPointBytes) return std::nullopt;
  if (std::all_of(data.begin(), data.end(), [](uint8_t b) { return b == 0; })) return Point();
  if (data[0] != 0x02 && data[0] != 0x03) return std::nullopt;
  EC_POINT* p = NewPoint();
  if (EC_POINT_oct2point(Curve(), p, data.data(), data.size(), Ctx()) != 1 ||
      EC_POINT_is_on_curve(Curve(), p, Ctx()) != 1) {
    EC_POINT_free(p);
    return std::nullopt;
  }
  return Point(p);
}

Point Point::Decode(ByteSpan data) {
  auto p = TryDecode(data);
  if (!p) Fail(ErrorCode::kInvalidPoint, "invalid compressed secp256k1 point");
  return std::move(*p);
}

Point Point::HashToCurve(ByteSpan label, uint32_t index) {
  uint8_t idx[4];
  StoreU32Be(idx, index);
  for (uint32_t counter = 0;; ++counter) {
    uint8_t ctr[4];
    StoreU32Be(ctr, counter);
    const Digest x = Sha256({label, ByteSpan(idx, 4), ByteSpan(ctr, 4)});
    PointBytes enc{};
    enc[0] = 0x02;
    std::copy(x.begin(), x.end(), enc.begin() + 1);
    if (auto p = TryDecode(enc); p && !p->IsIdentity()) return std::move(*p);
  }
}

Point Point::MultiExp(std::span<const Point> points, std::span<const Scalar> scalars) {
  if (points.size() != scalars.size()) {
    Fail(ErrorCode::kLengthMismatch, "multi-exponentiation: points/scalars length differ");
  }
  std::vector<BnPtr> owned;
  owned.reserve(scalars.size());
  std::vector<const BIGNUM*> bns;
  std::vector<const EC_POINT*> pts;
  bns.reserve(scalars.size());
  pts.reserve(points.size());
  for (size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].IsZero()) continue;
    owned.push_back(detail::ToBn(scalars[i].bytes()));
    bns.push_back(owned.back().get());
    pts.push_back(points[i].point_);
  }
  EC_POINT* r = NewPoint();
  if (pts.empty()) {
    Check(EC_POINT_set_to_infinity(Curve(), r), "set_to_infinity failed");
    return Point(r);
  }
  Check(EC_POINTs_mul(Curve(), r, nullptr, pts.size(), pts.data(), bns.data(), Ctx()),
        "EC_POINTs_mul failed");
  return Point(r);
}

Point Point::MultiExp(std::span<const Point> points, std::span<const uint32_t> exponents) {
  if (points.size() != exponents.size()) {
    Fail(ErrorCode::kLengthMismatch, "multi-exponentiation: points/exponents length differ");
  }
  std::vector<BnPtr> owned;
  std::vector<const BIGNUM*> bns;
  std::vector<const EC_POINT*> pts;
  owned.reserve(exponents.size());
  bns.reserve(exponents.size());
  pts.reserve(points.size());
  for (size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0) continue;
    BnPtr bn(BN_new());
    if (!bn || BN_set_word(bn.get(), exponents[i]) != 1) Fail(ErrorCode::kInternal, "BN_set_word failed");
    bns.push_back(bn.get());
    owned.push_back(std::move(bn));
    pts.push_back(points[i].point_);
  }
  EC_POINT* r = NewPoint();
  if (pts.empty()) {
    Check(EC_POINT_set_to_infinity(Curve(), r), "set_to_infinity failed");
    return Point(r);
  }
  Check(EC_POINTs_mul(Curve(), r, nullptr, pts.size(), pts.data(), bns.data(), Ctx()),
        "EC_POINTs_mul failed");
  return Point(r);
}

PointBytes Point::Encode() const {
  PointBytes out{};
  if (IsIdentity()) return out;
  const size_t n = EC_POINT_point2oct(Curve(), point_, POINT_CONVERSION_COMPRESSED, out.data(),
                                      out.size(), Ctx());
  if (n != kPointBytes) Fail(ErrorCode::kInternal, "EC_POINT_point2oct failed");
  return out;
}

bool Point::IsIdentity() const { return EC_POINT_is_at_infinity(Curve(), point_) == 1; }

Point Point::operator+(const Point& o) const {
  EC_POINT* r = NewPoint();
  Check(EC_POINT_add(Curve(), r, point_, o.point_, Ctx()), "EC_POINT_add failed");
  return Point(r);
}

Point Point::operator-() const {
  Point r(*this);
  Check(EC_POINT_invert(Curve(), r.point_, Ctx()), "EC_POINT_invert failed");
  return r;
}

Point Point::operator-(const Point& o) const { return *this + (-o); }

Point Point::operator*(const Scalar& s) const {
  BnPtr k = detail::ToBn(s.bytes());
  EC_POINT* r = NewPoint();
  Check(EC_POINT_mul(Curve(), r, nullptr, point_, k.get(), Ctx()), "EC_POINT_mul failed");
  return Point(r);
}

bool operator==(const Point& a, const Point& b) {
  return EC_POINT_cmp(Curve(), a.point_, b.point_, Ctx()) == 0;
}

}  // namespace seafl::crypto
