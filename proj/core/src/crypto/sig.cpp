// ECDSA through libcrypto's EC_KEY interface, which is deprecated in 3.0 but
// remains the only way to sign with a raw secp256k1 scalar without building
// a provider-side key per call.
#define OPENSSL_SUPPRESS_DEPRECATED

#include "seafl/crypto/sig.hpp"

#include <openssl/ec.h>
#include <openssl/ecdsa.h>

#include <algorithm>
#include <memory>

#include "seafl/common/error.hpp"
#include "seafl/crypto/hash.hpp"
#include "ossl_util.hpp"

namespace seafl::crypto {
namespace {

struct EcKeyDeleter {
  void operator()(EC_KEY* k) const { EC_KEY_free(k); }
};
using EcKeyPtr = std::unique_ptr<EC_KEY, EcKeyDeleter>;

struct SigDeleter {
  void operator()(ECDSA_SIG* s) const { ECDSA_SIG_free(s); }
};
using SigPtr = std::unique_ptr<ECDSA_SIG, SigDeleter>;

EcKeyPtr NewKey() {
  EcKeyPtr key(EC_KEY_new());
  if (!key || EC_KEY_set_group(key.get(), detail::Curve()) != 1) {
    Fail(ErrorCode::kInternal, "EC_KEY setup failed");
  }
  return key;
}

}  // namespace

SigKeyPair SigKeyPair::Generate(Rng& rng) { return FromSecret(Scalar::RandomNonZero(rng)); }

SigKeyPair SigKeyPair::FromSecret(const Scalar& secret) {
  if (secret.IsZero()) Fail(ErrorCode::kInvalidScalar, "signing secret must be nonzero");
  return {secret, Point::BaseMul(secret).Encode()};
}

Signature Sign(const Scalar& secret, ByteSpan message) {
  EcKeyPtr key = NewKey();
  detail::BnPtr priv = detail::ToBn(secret.bytes());
  if (EC_KEY_set_private_key(key.get(), priv.get()) != 1) {
    Fail(ErrorCode::kInvalidScalar, "EC_KEY_set_private_key failed");
  }
  const Digest digest = Sha256(message);
  SigPtr sig(ECDSA_do_sign(digest.data(), static_cast<int>(digest.size()), key.get()));
  if (!sig) Fail(ErrorCode::kInternal, "ECDSA_do_sign failed");
  const BIGNUM* r = nullptr;
  const BIGNUM* s = nullptr;
  ECDSA_SIG_get0(sig.get(), &r, &s);
  Signature out{};
  if (BN_bn2binpad(r, out.data(), 32) != 32 || BN_bn2binpad(s, out.data() + 32, 32) != 32) {
    Fail(ErrorCode::kInternal, "signature encoding failed");
  }
  return out;
}

bool Verify(ByteSpan public_key, ByteSpan message, ByteSpan signature) noexcept {
  try {
    if (signature.size() != kSignatureBytes) return false;
    auto pub = Point::TryDecode(public_key);
    if (!pub || pub->IsIdentity()) return false;

    EcKeyPtr key = NewKey();
    if (EC_KEY_set_public_key(key.get(), pub->native()) != 1) return false;

    SigPtr sig(ECDSA_SIG_new());
    BIGNUM* r = BN_bin2bn(signature.data(), 32, nullptr);
    BIGNUM* s = BN_bin2bn(signature.data() + 32, 32, nullptr);
    if (!sig || r == nullptr || s == nullptr) {
      BN_free(r);
      BN_free(s);
      return false;
    }
    ECDSA_SIG_set0(sig.get(), r, s);  // takes ownership

    const Digest digest = Sha256(message);
    return ECDSA_do_verify(digest.data(), static_cast<int>(digest.size()), sig.get(), key.get()) == 1;
  } catch (...) {
    return false;
  }
}

}  // namespace seafl::crypto
