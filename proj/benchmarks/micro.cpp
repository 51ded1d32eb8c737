#include <benchmark/benchmark.h>

#include "seafl/commit/apvc.hpp"
#include "seafl/crypto/kx.hpp"
#include "seafl/crypto/prf.hpp"
#include "seafl/crypto/rng.hpp"
#include "seafl/crypto/sig.hpp"
#include "seafl/masking/masking.hpp"

namespace {

using namespace seafl;

crypto::SharedSeed SeedFrom(crypto::Rng& rng) {
  crypto::SharedSeed s;
  rng.Fill(s.bytes);
  return s;
}

std::vector<uint32_t> Words(crypto::Rng& rng, size_t d, uint32_t bound) {
  std::vector<uint32_t> v(d);
  for (auto& x : v) x = static_cast<uint32_t>(rng.UniformBelow(bound));
  return v;
}

void BM_PrfExpand(benchmark::State& state) {
  crypto::DeterministicRng rng(1);
  const std::vector<crypto::SharedSeed> seeds = {SeedFrom(rng)};
  const size_t d = static_cast<size_t>(state.range(0));
  uint32_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(masking::DeriveUserMask(seeds, ++t, d, false));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * d * 4));
}
BENCHMARK(BM_PrfExpand)->Arg(1000)->Arg(16000)->Arg(100000);

void BM_Commit(benchmark::State& state) {
  crypto::DeterministicRng rng(2);
  const size_t d = static_cast<size_t>(state.range(0));
  const auto params = commit::ApvcParams::Setup(d);
  const auto key = commit::ApvcKey::Generate(rng);
  const auto x = Words(rng, d, 1u << 20);
  const auto r = crypto::Scalar::Random(rng);
  for (auto _ : state) benchmark::DoNotOptimize(commit::Commit(params, key, x, r));
}
BENCHMARK(BM_Commit)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

// Mask derivation plus masking for k assisting nodes.
void BM_UserRound(benchmark::State& state) {
  crypto::DeterministicRng rng(3);
  const size_t k = static_cast<size_t>(state.range(0));
  const size_t d = static_cast<size_t>(state.range(1));
  std::vector<crypto::SharedSeed> seeds;
  for (size_t j = 0; j < k; ++j) seeds.push_back(SeedFrom(rng));
  const masking::GradientVector w(Words(rng, d, 1u << 20));
  uint32_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(masking::ApplyMask(w, masking::DeriveUserMask(seeds, ++t, d, false)));
}
BENCHMARK(BM_UserRound)->Args({2, 1000})->Args({3, 16000});

// One node summing PRF expansions over n participating users.
void BM_NodeAggregate(benchmark::State& state) {
  crypto::DeterministicRng rng(4);
  const size_t n = static_cast<size_t>(state.range(0));
  std::vector<crypto::SharedSeed> seeds;
  for (size_t i = 0; i < n; ++i) seeds.push_back(SeedFrom(rng));
  uint32_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(masking::NodeAggregateMask(seeds, ++t, 1000, false));
}
BENCHMARK(BM_NodeAggregate)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_KxDerive(benchmark::State& state) {
  crypto::DeterministicRng rng(5);
  const auto a = crypto::KxKeyPair::Generate(rng);
  const auto b = crypto::KxKeyPair::Generate(rng);
  for (auto _ : state) benchmark::DoNotOptimize(crypto::KxDerive(a.secret, b.public_key));
}
BENCHMARK(BM_KxDerive);

void BM_SignVerify(benchmark::State& state) {
  crypto::DeterministicRng rng(6);
  const auto key = crypto::SigKeyPair::Generate(rng);
  const Bytes msg(68, 0x5a);
  for (auto _ : state) {
    const auto sig = crypto::Sign(key.secret, msg);
    benchmark::DoNotOptimize(crypto::Verify(key.public_key, msg, sig));
  }
}
BENCHMARK(BM_SignVerify);

}  // namespace

BENCHMARK_MAIN();
