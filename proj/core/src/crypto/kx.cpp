#include "seafl/crypto/kx.hpp"

#include "seafl/common/error.hpp"
#include "seafl/crypto/hash.hpp"

namespace seafl::crypto {

KxKeyPair KxKeyPair::Generate(Rng& rng) { return FromSecret(Scalar::RandomNonZero(rng)); }

KxKeyPair KxKeyPair::FromSecret(const Scalar& secret) {
  if (secret.IsZero()) Fail(ErrorCode::kInvalidScalar, "key-exchange secret must be nonzero");
  return {secret, Point::BaseMul(secret).Encode()};
}

SharedSeed KxDerive(const Scalar& my_secret, ByteSpan their_public) {
  const Point theirs = Point::Decode(their_public);
  if (theirs.IsIdentity()) Fail(ErrorCode::kInvalidPoint, "key-exchange public key is identity");
  const PointBytes shared = (theirs * my_secret).Encode();
  SharedSeed seed;
  seed.bytes = Sha256({AsBytes("seafl-kx-seed"), shared});
  return seed;
}

}  // namespace seafl::crypto
