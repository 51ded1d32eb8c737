#include "seafl/crypto/rng.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <cstring>

#include "seafl/common/bytes.hpp"
#include "seafl/common/error.hpp"
#include "seafl/crypto/hash.hpp"
#include "ossl_util.hpp"

namespace seafl::crypto {

uint64_t Rng::NextU64() {
  uint8_t b[8];
  Fill(b);
  uint64_t v = 0;
  for (uint8_t x : b) v = (v << 8) | x;
  return v;
}

uint64_t Rng::UniformBelow(uint64_t bound) {
  if (bound == 0) Fail(ErrorCode::kInternal, "UniformBelow(0)");
  // Largest multiple of bound that fits; reject above it.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    const uint64_t v = NextU64();
    if (v <= limit) return v % bound;
  }
}

void SystemRng::Fill(std::span<uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    Fail(ErrorCode::kInternal, "RAND_bytes failed");
  }
}

namespace {
constexpr size_t kRefillBytes = 4096;
}

DeterministicRng::DeterministicRng(uint64_t seed) {
  uint8_t b[8];
  StoreU64Be(b, seed);
  const Digest d = Sha256({AsBytes("seafl-drbg"), ByteSpan(b, 8)});
  std::copy_n(d.begin(), key_.size(), key_.begin());
}

DeterministicRng::DeterministicRng(std::span<const uint8_t> seed) {
  const Digest d = Sha256({AsBytes("seafl-drbg"), seed});
  std::copy_n(d.begin(), key_.size(), key_.begin());
}

void DeterministicRng::Refill() {
  detail::CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  uint8_t iv[16] = {};
  StoreU64Be(iv + 8, block_counter_);
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ctr(), nullptr, key_.data(), iv) != 1) {
    Fail(ErrorCode::kInternal, "drbg init failed");
  }
  buffer_.assign(kRefillBytes, 0);
  int len = 0;
  if (EVP_EncryptUpdate(ctx.get(), buffer_.data(), &len, buffer_.data(),
                        static_cast<int>(buffer_.size())) != 1) {
    Fail(ErrorCode::kInternal, "drbg keystream failed");
  }
  block_counter_ += kRefillBytes / 16;
  offset_ = 0;
}

void DeterministicRng::Fill(std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    if (offset_ >= buffer_.size()) Refill();
    const size_t n = std::min(out.size() - done, buffer_.size() - offset_);
    std::memcpy(out.data() + done, buffer_.data() + offset_, n);
    offset_ += n;
    done += n;
  }
}

}  // namespace seafl::crypto
