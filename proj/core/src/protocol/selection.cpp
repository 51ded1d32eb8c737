#include "seafl/protocol/selection.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "seafl/common/bytes.hpp"
#include "seafl/common/error.hpp"
#include "seafl/crypto/hash.hpp"
#include "seafl/crypto/rng.hpp"

namespace seafl::protocol {

std::vector<uint32_t> SelectAssistingNodes(uint32_t pool, uint32_t k, const Beacon& beacon) {
  if (k == 0 || k > pool) {
    Fail(ErrorCode::kInvalidK, "cannot select k=" + std::to_string(k) + " of " + std::to_string(pool) + " nodes");
  }
  std::vector<uint32_t> idx(pool);
  std::iota(idx.begin(), idx.end(), 0u);
  crypto::DeterministicRng prg(beacon);
  for (uint32_t i = 0; i < k; ++i) {
    const uint32_t j = i + static_cast<uint32_t>(prg.UniformBelow(pool - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Beacon RoundBeacon(const Beacon& base, uint32_t t) {
  uint8_t tb[4];
  StoreU32Be(tb, t);
  return crypto::Sha256({base, AsBytes("round"), ByteSpan(tb, 4)});
}

}  // namespace seafl::protocol
