#pragma once

// libcrypto glue shared by the crypto translation units. Not installed.

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>

#include <memory>

#include "seafl/crypto/group.hpp"

namespace seafl::crypto::detail {

struct BnDeleter {
  void operator()(BIGNUM* bn) const { BN_clear_free(bn); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

const EC_GROUP* Curve();
BN_CTX* Ctx();
const BIGNUM* Order();
BnPtr ToBn(const ScalarBytes& b);
ScalarBytes FromBn(const BIGNUM* bn);

}  // namespace seafl::crypto::detail
