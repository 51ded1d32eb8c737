#include "seafl/crypto/prf.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>

#include "seafl/common/error.hpp"
#include "seafl/crypto/hash.hpp"
#include "ossl_util.hpp"

namespace seafl::crypto {
namespace {

constexpr size_t kChunkWords = 1024;  // 4 KiB of keystream per EVP call

}  // namespace

void PrfAccumulateMasks(const SharedSeed& seed, uint32_t t, std::span<uint32_t> acc) {
  if (acc.empty()) return;
  const Digest key = Sha256({seed.bytes, AsBytes("mask")});
  std::array<uint8_t, 16> iv{};
  StoreU32Be(iv.data(), t);  // bytes 4..7 stay zero, 8..15 are the lane counter

  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr, key.data(), iv.data()) != 1) {
    Fail(ErrorCode::kInternal, "prf init failed");
  }
  std::array<uint8_t, kChunkWords * 4> zeros{};
  std::array<uint8_t, kChunkWords * 4> stream{};
  size_t done = 0;
  while (done < acc.size()) {
    const size_t words = std::min(kChunkWords, acc.size() - done);
    // Round up to whole blocks so the counter stays lane-aligned across chunks.
    const size_t bytes = ((words * 4 + 15) / 16) * 16;
    int len = 0;
    if (EVP_EncryptUpdate(ctx.get(), stream.data(), &len, zeros.data(), static_cast<int>(bytes)) != 1) {
      Fail(ErrorCode::kInternal, "prf keystream failed");
    }
    for (size_t i = 0; i < words; ++i) acc[done + i] += LoadU32Le(stream.data() + 4 * i);
    done += words;
  }
}

std::vector<uint32_t> PrfExpandMasks(const SharedSeed& seed, uint32_t t, size_t d) {
  std::vector<uint32_t> out(d, 0);
  PrfAccumulateMasks(seed, t, out);
  return out;
}

Scalar PrfDeriveScalar(const SharedSeed& seed, uint32_t t) {
  uint8_t tb[4];
  StoreU32Be(tb, t);
  const Digest h = Sha256({seed.bytes, AsBytes("rho-lane"), ByteSpan(tb, 4)});
  return Scalar::FromBytesReduce(h);
}

}  // namespace seafl::crypto
