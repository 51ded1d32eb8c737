#include "seafl/crypto/hash.hpp"

#include <openssl/evp.h>

#include <memory>

#include "seafl/common/error.hpp"

namespace seafl::crypto {

Digest Sha256(std::initializer_list<ByteSpan> pieces) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    Fail(ErrorCode::kInternal, "sha256 init failed");
  }
  for (ByteSpan p : pieces) {
    if (!p.empty() && EVP_DigestUpdate(ctx.get(), p.data(), p.size()) != 1) {
      Fail(ErrorCode::kInternal, "sha256 update failed");
    }
  }
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    Fail(ErrorCode::kInternal, "sha256 final failed");
  }
  return out;
}

}  // namespace seafl::crypto
