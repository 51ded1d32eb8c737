#include "seafl/crypto/ae.hpp"

#include <openssl/evp.h>

#include "seafl/common/error.hpp"
#include "seafl/crypto/hash.hpp"
#include "ossl_util.hpp"

namespace seafl::crypto {
namespace {

Digest AeKey(const SharedSeed& seed) { return Sha256({seed.bytes, AsBytes("ae")}); }

}  // namespace

Bytes AeEncrypt(const SharedSeed& seed, ByteSpan plaintext, const Nonce& nonce) {
  const Digest key = AeKey(seed);
  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) != 1 ||
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
    Fail(ErrorCode::kInternal, "aes-gcm init failed");
  }
  Bytes out(plaintext.size() + kAeTagBytes);
  int len = 0;
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    Fail(ErrorCode::kInternal, "aes-gcm encrypt failed");
  }
  int tail = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeTagBytes,
                          out.data() + plaintext.size()) != 1) {
    Fail(ErrorCode::kInternal, "aes-gcm finalize failed");
  }
  return out;
}

Bytes AeDecrypt(const SharedSeed& seed, ByteSpan ciphertext, const Nonce& nonce) {
  if (ciphertext.size() < kAeTagBytes) Fail(ErrorCode::kAuthFailure, "ciphertext shorter than tag");
  const size_t body = ciphertext.size() - kAeTagBytes;
  const Digest key = AeKey(seed);
  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) != 1 ||
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
    Fail(ErrorCode::kInternal, "aes-gcm init failed");
  }
  Bytes out(body);
  int len = 0;
  if (body > 0 && EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data(),
                                    static_cast<int>(body)) != 1) {
    Fail(ErrorCode::kAuthFailure, "aes-gcm decrypt failed");
  }
  Bytes tag(ciphertext.begin() + static_cast<std::ptrdiff_t>(body), ciphertext.end());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeTagBytes, tag.data()) != 1) {
    Fail(ErrorCode::kInternal, "aes-gcm set tag failed");
  }
  int tail = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1) {
    Fail(ErrorCode::kAuthFailure, "authentication tag mismatch");
  }
  return out;
}

}  // namespace seafl::crypto
