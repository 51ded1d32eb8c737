#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <gtest/gtest.h>
#include <openssl/bn.h>

#include "seafl/common/error.hpp"
#include "seafl/crypto/ae.hpp"
#include "seafl/crypto/group.hpp"
#include "seafl/crypto/hash.hpp"
#include "seafl/crypto/kx.hpp"
#include "seafl/crypto/prf.hpp"
#include "seafl/crypto/shamir.hpp"
#include "seafl/crypto/sig.hpp"
#include "test_support.hpp"

namespace seafl::crypto {
namespace {

using seafl::testing::Gen;
using seafl::testing::SmallField;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInternal;
}

// ---- group ----

TEST(Scalar, ArithmeticMatchesBignum) {
  Gen gen(11);
  BN_CTX* ctx = BN_CTX_new();
  BIGNUM* p = BN_bin2bn(Scalar::OrderBytes().data(), 32, nullptr);
  for (int i = 0; i < 50; ++i) {
    const Scalar a = gen.Scalar();
    const Scalar b = gen.Scalar();
    BIGNUM* ba = BN_bin2bn(a.bytes().data(), 32, nullptr);
    BIGNUM* bb = BN_bin2bn(b.bytes().data(), 32, nullptr);
    BIGNUM* r = BN_new();
    ScalarBytes expect{};

    BN_mod_mul(r, ba, bb, p, ctx);
    BN_bn2binpad(r, expect.data(), 32);
    EXPECT_EQ((a * b).bytes(), expect);
    BN_mod_add(r, ba, bb, p, ctx);
    BN_bn2binpad(r, expect.data(), 32);
    EXPECT_EQ((a + b).bytes(), expect);
    BN_mod_sub(r, ba, bb, p, ctx);
    BN_bn2binpad(r, expect.data(), 32);
    EXPECT_EQ((a - b).bytes(), expect);
    if (!a.IsZero()) {
      EXPECT_EQ(a * a.Inverse(), Scalar::FromU64(1));
    }

    BN_free(ba);
    BN_free(bb);
    BN_free(r);
  }
  BN_free(p);
  BN_CTX_free(ctx);
}

TEST(Scalar, CanonicalDecodingRejectsOrderAndAbove) {
  EXPECT_EQ(CodeOf([] { Scalar::FromCanonical(Scalar::OrderBytes()); }), ErrorCode::kInvalidScalar);
  EXPECT_EQ(CodeOf([] { Scalar::FromCanonical(Bytes(31, 0)); }), ErrorCode::kInvalidScalar);
  EXPECT_TRUE(Scalar::FromBytesReduce(Scalar::OrderBytes()).IsZero());
  EXPECT_EQ(CodeOf([] { Scalar().Inverse(); }), ErrorCode::kInvalidScalar);
}

TEST(Point, EncodingRoundTripAndIdentity) {
  Gen gen(12);
  const Point id;
  EXPECT_TRUE(id.IsIdentity());
  EXPECT_EQ(id.Encode(), PointBytes{});
  EXPECT_EQ(Point::Decode(id.Encode()), id);
  for (int i = 0; i < 20; ++i) {
    const Point p = Point::BaseMul(gen.Scalar());
    EXPECT_EQ(Point::Decode(p.Encode()), p);
    EXPECT_TRUE((p - p).IsIdentity());
    EXPECT_EQ(p + id, p);
  }
  PointBytes junk{};
  junk[0] = 0x05;
  EXPECT_FALSE(Point::TryDecode(junk).has_value());
  EXPECT_EQ(CodeOf([&] { Point::Decode(Bytes(32, 2)); }), ErrorCode::kInvalidPoint);
}

TEST(Point, MultiExpAgreesWithTermwiseSum) {
  Gen gen(13);
  std::vector<Point> pts;
  std::vector<Scalar> ss;
  std::vector<uint32_t> small;
  Point expect, expect_small;
  for (int i = 0; i < 7; ++i) {
    pts.push_back(Point::BaseMul(gen.Scalar()));
    ss.push_back(gen.Scalar());
    small.push_back(gen.U32());
    expect = expect + pts.back() * ss.back();
    expect_small = expect_small + pts.back() * Scalar::FromU64(small.back());
  }
  EXPECT_EQ(Point::MultiExp(pts, ss), expect);
  EXPECT_EQ(Point::MultiExp(pts, small), expect_small);
}

TEST(Point, HashToCurveIsDeterministicAndIndexSeparated) {
  const Point a = Point::HashToCurve(AsBytes("label"), 1);
  EXPECT_EQ(a, Point::HashToCurve(AsBytes("label"), 1));
  EXPECT_NE(a, Point::HashToCurve(AsBytes("label"), 2));
  EXPECT_NE(a, Point::HashToCurve(AsBytes("other"), 1));
  EXPECT_FALSE(a.IsIdentity());
}

// ---- key exchange ----

TEST(Kx, FixedEntropyGivesFixedKeypair) {
  DeterministicRng r1(77), r2(77);
  const auto a = KxKeyPair::Generate(r1);
  const auto b = KxKeyPair::Generate(r2);
  EXPECT_EQ(a.public_key, b.public_key);
  EXPECT_EQ(a.secret, b.secret);
}

TEST(Kx, IndependentDrawsDiffer) {
  Gen gen(1);
  EXPECT_NE(KxKeyPair::Generate(gen.rng()).public_key, KxKeyPair::Generate(gen.rng()).public_key);
}

TEST(Kx, PublicKeyIsBaseMultipleOfSecret) {
  Gen gen(2);
  for (int i = 0; i < 10; ++i) {
    const auto kp = KxKeyPair::Generate(gen.rng());
    EXPECT_EQ(Point::BaseMul(kp.secret).Encode(), kp.public_key);
    EXPECT_EQ(KxKeyPair::FromSecret(kp.secret).public_key, kp.public_key);
  }
}

TEST(Kx, SymmetricOverHundredPairs) {
  Gen gen(3);
  for (int i = 0; i < 100; ++i) {
    const auto a = KxKeyPair::Generate(gen.rng());
    const auto b = KxKeyPair::Generate(gen.rng());
    EXPECT_EQ(KxDerive(a.secret, b.public_key), KxDerive(b.secret, a.public_key));
  }
}

TEST(Kx, DistinctCounterpartiesGiveDistinctSeeds) {
  Gen gen(4);
  const auto a = KxKeyPair::Generate(gen.rng());
  const auto b = KxKeyPair::Generate(gen.rng());
  const auto c = KxKeyPair::Generate(gen.rng());
  EXPECT_NE(KxDerive(a.secret, b.public_key), KxDerive(a.secret, c.public_key));
}

TEST(Kx, RejectsIdentityAndGarbage) {
  Gen gen(5);
  const auto a = KxKeyPair::Generate(gen.rng());
  EXPECT_EQ(CodeOf([&] { KxDerive(a.secret, PointBytes{}); }), ErrorCode::kInvalidPoint);
  EXPECT_EQ(CodeOf([&] { KxDerive(a.secret, Bytes(10, 3)); }), ErrorCode::kInvalidPoint);
}

// ---- signatures ----

TEST(Sig, RoundTripAndPerturbations) {
  Gen gen(6);
  const auto kp = SigKeyPair::Generate(gen.rng());
  const auto other = SigKeyPair::Generate(gen.rng());
  const Bytes m = gen.Blob(40);
  const Signature sig = Sign(kp.secret, m);
  EXPECT_EQ(sig.size(), 64u);
  EXPECT_TRUE(Verify(kp.public_key, m, sig));

  Bytes longer = m;
  longer.push_back(0);
  EXPECT_FALSE(Verify(kp.public_key, longer, sig));
  EXPECT_FALSE(Verify(other.public_key, m, sig));
}

TEST(Sig, AnySingleByteFlipFails) {
  Gen gen(7);
  const auto kp = SigKeyPair::Generate(gen.rng());
  const Bytes m = gen.Blob(24);
  const Signature sig = Sign(kp.secret, m);
  for (size_t i = 0; i < m.size(); ++i) {
    Bytes bad = m;
    bad[i] ^= static_cast<uint8_t>(1 + gen.Range(0, 254));
    EXPECT_FALSE(Verify(kp.public_key, bad, sig)) << "message byte " << i;
  }
  for (size_t i = 0; i < sig.size(); ++i) {
    Signature bad = sig;
    bad[i] ^= static_cast<uint8_t>(1 + gen.Range(0, 254));
    EXPECT_FALSE(Verify(kp.public_key, m, bad)) << "signature byte " << i;
  }
}

TEST(Sig, MalformedInputsVerifyFalse) {
  Gen gen(8);
  const auto kp = SigKeyPair::Generate(gen.rng());
  const Bytes m = gen.Blob(8);
  const Signature sig = Sign(kp.secret, m);
  EXPECT_FALSE(Verify(Bytes(33, 0), m, sig));
  EXPECT_FALSE(Verify(kp.public_key, m, Bytes(63, 1)));
  EXPECT_FALSE(Verify(kp.public_key, m, Bytes(64, 0)));
}

// ---- authenticated encryption ----

TEST(Ae, RoundTrip) {
  Gen gen(9);
  for (size_t len : {0u, 1u, 32u, 100u}) {
    const SharedSeed s = gen.Seed();
    const Bytes pt = gen.Blob(len);
    const Bytes ct = AeEncrypt(s, pt, kRhoNonce);
    EXPECT_EQ(ct.size(), len + kAeTagBytes);
    EXPECT_EQ(AeDecrypt(s, ct, kRhoNonce), pt);
  }
}

TEST(Ae, EveryBitFlipIsAnAuthFailure) {
  Gen gen(10);
  const SharedSeed s = gen.Seed();
  const Bytes ct = AeEncrypt(s, gen.Blob(32), kRhoNonce);
  for (size_t bit = 0; bit < ct.size() * 8; ++bit) {
    Bytes bad = ct;
    bad[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    EXPECT_EQ(CodeOf([&] { AeDecrypt(s, bad, kRhoNonce); }), ErrorCode::kAuthFailure) << bit;
  }
}

TEST(Ae, WrongSeedOrNonceFails) {
  Gen gen(14);
  const SharedSeed s = gen.Seed();
  const Bytes ct = AeEncrypt(s, gen.Blob(32), kRhoNonce);
  EXPECT_EQ(CodeOf([&] { AeDecrypt(gen.Seed(), ct, kRhoNonce); }), ErrorCode::kAuthFailure);
  EXPECT_EQ(CodeOf([&] { AeDecrypt(s, ct, kSeedNonce); }), ErrorCode::kAuthFailure);
  EXPECT_EQ(CodeOf([&] { AeDecrypt(s, Bytes(5, 0), kRhoNonce); }), ErrorCode::kAuthFailure);
}

// ---- PRF ----

TEST(Prf, MatchesBlockwiseOracle) {
  Gen gen(15);
  for (size_t d : {1u, 3u, 4u, 5u, 17u, 1024u, 1025u, 5000u}) {
    const SharedSeed s = gen.Seed();
    const uint32_t t = gen.U32();
    EXPECT_EQ(PrfExpandMasks(s, t, d), seafl::testing::OraclePrf(s, t, d)) << "d=" << d;
  }
}

TEST(Prf, DeterministicAndPrefixConsistent) {
  Gen gen(16);
  const SharedSeed s = gen.Seed();
  EXPECT_EQ(PrfExpandMasks(s, 3, 16), PrfExpandMasks(s, 3, 16));
  const auto one = PrfExpandMasks(s, 3, 1);
  const auto sixteen = PrfExpandMasks(s, 3, 16);
  EXPECT_TRUE(std::equal(one.begin(), one.end(), sixteen.begin()));
  EXPECT_TRUE(PrfExpandMasks(s, 3, 0).empty());
}

TEST(Prf, ConsecutiveIterationsDifferInMostLanes) {
  Gen gen(17);
  const size_t d = 64;
  for (int trial = 0; trial < 100; ++trial) {
    const SharedSeed s = gen.Seed();
    const uint32_t t = gen.Range(0, 1000);
    const auto a = PrfExpandMasks(s, t, d);
    const auto b = PrfExpandMasks(s, t + 1, d);
    size_t diff = 0;
    for (size_t i = 0; i < d; ++i) diff += a[i] != b[i];
    EXPECT_GE(diff, d / 2);
  }
}

TEST(Prf, AccumulateAddsModulo2To32) {
  Gen gen(18);
  const SharedSeed s = gen.Seed();
  std::vector<uint32_t> acc = gen.Words(33);
  const auto before = acc;
  PrfAccumulateMasks(s, 9, acc);
  const auto m = seafl::testing::OraclePrf(s, 9, 33);
  for (size_t i = 0; i < acc.size(); ++i) EXPECT_EQ(acc[i], static_cast<uint32_t>(before[i] + m[i]));
}

TEST(PrfScalar, DeterministicBelowOrderAndSeparatedFromMaskLanes) {
  Gen gen(19);
  const ScalarBytes& p = Scalar::OrderBytes();
  for (int i = 0; i < 10000; ++i) {
    const SharedSeed s = gen.Seed();
    const uint32_t t = gen.U32();
    const Scalar r = PrfDeriveScalar(s, t);
    ASSERT_TRUE(std::lexicographical_compare(r.bytes().begin(), r.bytes().end(), p.begin(), p.end()));
    if (i < 200) {
      EXPECT_EQ(r, PrfDeriveScalar(s, t));
      for (uint32_t w : PrfExpandMasks(s, t, 8)) EXPECT_NE(r, Scalar::FromU64(w));
    }
  }
}

TEST(PrfScalar, OracleSha256Reduction) {
  Gen gen(20);
  const SharedSeed s = gen.Seed();
  Bytes msg(s.bytes.begin(), s.bytes.end());
  Append(msg, AsBytes("rho-lane"));
  AppendU32Be(msg, 42);
  uint8_t h[32];
  SHA256(msg.data(), msg.size(), h);
  EXPECT_EQ(PrfDeriveScalar(s, 42), Scalar::FromBytesReduce(ByteSpan(h, 32)));
}

TEST(Hash, KnownAnswer) {
  // SHA-256("abc")
  EXPECT_EQ(ToHex(Sha256(AsBytes("abc"))), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256({AsBytes("a"), AsBytes("bc")}), Sha256(AsBytes("abc")));
}

// ---- Shamir ----

TEST(Shamir, DegreeZeroPolynomialGivesConstantShares) {
  Gen gen(21);
  const auto shares = ShamirSplit(Scalar::FromU64(0), 1, 3, gen.rng());
  ASSERT_EQ(shares.size(), 3u);
  for (const auto& s : shares) EXPECT_TRUE(s.value.IsZero());
}

TEST(Shamir, AnyTwoOfThreeAgree) {
  Gen gen(22);
  const Scalar secret = gen.Scalar();
  const auto sh = ShamirSplit(secret, 2, 3, gen.rng());
  const std::vector<ShamirShare<Scalar>> a = {sh[0], sh[2]};
  const std::vector<ShamirShare<Scalar>> b = {sh[1], sh[2]};
  EXPECT_EQ(ShamirReconstruct(a, 2), ShamirReconstruct(b, 2));
  EXPECT_EQ(ShamirReconstruct(a, 2), secret);
}

TEST(Shamir, EveryThresholdSubsetReconstructsExhaustively) {
  Gen gen(23);
  for (uint32_t n = 1; n <= 8; ++n) {
    for (uint32_t th = 1; th <= n; ++th) {
      const Scalar secret = gen.Scalar();
      const auto sh = ShamirSplit(secret, th, n, gen.rng());
      for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<uint32_t>(__builtin_popcount(mask)) != th) continue;
        std::vector<ShamirShare<Scalar>> pick;
        for (uint32_t i = 0; i < n; ++i) {
          if (mask & (1u << i)) pick.push_back(sh[i]);
        }
        ASSERT_EQ(ShamirReconstruct(pick, th), secret) << "n=" << n << " th=" << th << " mask=" << mask;
      }
    }
  }
}

TEST(Shamir, LagrangeOracleOverSmallField) {
  // Evaluate the dealt polynomial independently: with threshold 3 the
  // shares must lie on a quadratic, so the fourth share follows from the
  // first three by Lagrange interpolation at x = 4.
  using F = SmallField<10007>;
  Gen gen(24);
  for (int trial = 0; trial < 100; ++trial) {
    const F secret = F::Random(gen.rng());
    const auto sh = ShamirSplit(secret, 3, 4, gen.rng());
    const F x4 = F::FromU64(4);
    F predicted = F::FromU64(0);
    for (int i = 0; i < 3; ++i) {
      F num = F::FromU64(1), den = F::FromU64(1);
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        num = num * (x4 - F::FromU64(sh[j].index));
        den = den * (F::FromU64(sh[i].index) - F::FromU64(sh[j].index));
      }
      predicted = predicted + sh[i].value * num * den.Inverse();
    }
    EXPECT_EQ(predicted, sh[3].value);
  }
}

TEST(Shamir, GuessedShareAlmostNeverReconstructs) {
  // threshold-1 honest shares plus a random guess recover the secret with
  // probability 1/P; over 20000 trials at P = 101 expect about 198 hits.
  using F = SmallField<101>;
  Gen gen(25);
  const int trials = 20000;
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    const F secret = F::Random(gen.rng());
    auto sh = ShamirSplit(secret, 3, 5, gen.rng());
    std::vector<ShamirShare<F>> pick = {sh[0], sh[1], {5, F::Random(gen.rng())}};
    hits += ShamirReconstruct(pick, 3) == secret;
  }
  const double expected = trials / 101.0;
  const double sigma = std::sqrt(trials * (1.0 / 101) * (100.0 / 101));
  EXPECT_NEAR(hits, expected, 4 * sigma);
}

TEST(Shamir, ErrorPaths) {
  Gen gen(26);
  const auto sh = ShamirSplit(Scalar::FromU64(5), 3, 4, gen.rng());
  const std::vector<ShamirShare<Scalar>> two = {sh[0], sh[1]};
  EXPECT_EQ(CodeOf([&] { ShamirReconstruct(two, 3); }), ErrorCode::kInsufficientShares);
  const std::vector<ShamirShare<Scalar>> dup = {sh[0], sh[0], sh[1]};
  EXPECT_EQ(CodeOf([&] { ShamirReconstruct(dup, 3); }), ErrorCode::kDuplicateIndex);
  const std::vector<ShamirShare<Scalar>> zero = {{0, Scalar::FromU64(1)}, sh[1], sh[2]};
  EXPECT_EQ(CodeOf([&] { ShamirReconstruct(zero, 3); }), ErrorCode::kDuplicateIndex);
  EXPECT_EQ(CodeOf([&] { ShamirSplit(Scalar::FromU64(1), 0, 3, gen.rng()); }), ErrorCode::kInvalidThreshold);
  EXPECT_EQ(CodeOf([&] { ShamirSplit(Scalar::FromU64(1), 4, 3, gen.rng()); }), ErrorCode::kInvalidThreshold);
  // More shares than nonzero field elements.
  EXPECT_EQ(CodeOf([&] { ShamirSplit(SmallField<5>::FromU64(1), 2, 5, gen.rng()); }),
            ErrorCode::kInvalidThreshold);
}

}  // namespace
}  // namespace seafl::crypto
