// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "seafl/common/error.hpp"
#include "seafl/harness/bench.hpp"
#include "seafl/harness/demo.hpp"
#include "seafl/harness/deployment.hpp"
#include "seafl/transport/codec.hpp"
#include "test_support.hpp"

namespace {

using namespace seafl;
using namespace seafl::protocol;
using harness::LocalDeployment;
using harness::RoundFaults;
using masking::GradientVector;
using seafl::testing::Cluster;
using seafl::testing::Gen;

constexpr uint32_t kBound = 1u << 20;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

ProtocolConfig Cfg(uint32_t n, uint32_t k, uint32_t d, Mode mode = Mode::kSemiHonest, bool integrity = false) {
  ProtocolConfig c;
  c.n = n;
  c.k = k;
  c.d = d;
  c.mode = mode;
  c.integrity = integrity;
  return c;
}

std::vector<GradientVector> Inputs(Gen& gen, uint32_t n, uint32_t d) {
  std::vector<GradientVector> v;
  for (uint32_t i = 0; i < n; ++i) v.push_back(gen.Bounded(d, kBound));
  return v;
}

GradientVector OracleSum(const std::vector<GradientVector>& in, const std::vector<uint32_t>& who, uint32_t d) {
  std::vector<GradientVector> picked;
  for (uint32_t i : who) picked.push_back(in[i]);
  return seafl::testing::RingSum(picked, d);
}

std::vector<uint32_t> Range(uint32_t n) {
  std::vector<uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

std::string Str(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

// 1. Honest rounds reproduce the plaintext sum bit for bit.
Outcome Correctness() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  Gen gen(101);
  auto run = [&](const ProtocolConfig& cfg) {
    LocalDeployment dep(cfg, gen.U64());
    const auto in = Inputs(gen, cfg.n, cfg.d);
    const auto r = dep.RunRound(1, in);
    const std::string tag = "n=" + std::to_string(cfg.n) + " k=" + std::to_string(cfg.k) + " d=" + std::to_string(cfg.d);
    o.Check(r.ok(), tag + ": " + r.error_message);
    if (r.ok()) o.Check(r.result->w == OracleSum(in, Range(cfg.n), cfg.d), tag + ": sum differs");
  };
  for (uint32_t n = 1; n <= 8; ++n) {
    for (uint32_t k = 1; k <= 3; ++k) {
      for (uint32_t d : {1u, 3u}) run(Cfg(n, k, d));
    }
  }
  for (int i = 0; i < 50; ++i) run(Cfg(gen.Range(1, 200), gen.Range(1, 3), gen.Range(1, 16000)));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.Check(secs < 60.0, Str("took %.1f s", secs));
  if (o.pass) o.detail = Str("98 cases in %.1f s", secs);
  return o;
}

// 2. Dropout tolerance and the participation threshold.
Outcome Dropout() {
  Outcome o;
  auto cfg = Cfg(20, 2, 8);
  cfg.alpha = 0.5;
  cfg.delta = 0.3;
  LocalDeployment dep(cfg, 202);
  Gen gen(203);
  int within_delta = 0, below = 0;
  for (uint32_t t = 1; t <= 200; ++t) {
    const auto in = Inputs(gen, 20, 8);
    // Offline count spread over the whole range, biased towards the tolerated band.
    const uint32_t drop = gen.Coin() ? gen.Range(0, 6) : gen.Range(7, 20);
    auto order = Range(20);
    std::shuffle(order.begin(), order.end(), gen.rng());
    RoundFaults f;
    f.offline_users.insert(order.begin(), order.begin() + drop);
    const auto r = dep.RunRound(t, in, f);
    std::vector<uint32_t> online;
    for (uint32_t i = 0; i < 20; ++i) {
      if (!f.offline_users.count(i)) online.push_back(i);
    }
    const std::string tag = "t=" + std::to_string(t) + " offline=" + std::to_string(drop);
    if (online.size() >= 10) {
      o.Check(r.ok() && r.result->w == OracleSum(in, online, 8), tag + ": expected exact sum");
      within_delta += drop <= 6;
    } else {
      o.Check(!r.ok() && r.error == ErrorCode::kBelowThreshold, tag + ": expected BelowThreshold");
      ++below;
    }
  }
  o.Check(within_delta >= 50 && below >= 20, "trial mix too thin");
  if (o.pass) o.detail = std::to_string(within_delta) + " rounds within delta, " + std::to_string(below) + " below threshold";
  return o;
}

// 3. Node masks cancel user masks.
Outcome Cancellation() {
  Outcome o;
  Gen gen(301);
  auto check = [&](size_t n, size_t k, size_t d) {
    std::vector<std::vector<crypto::SharedSeed>> m(n, std::vector<crypto::SharedSeed>(k));
    for (auto& row : m) {
      for (auto& s : row) s = gen.Seed();
    }
    const uint32_t t = gen.U32();
    std::vector<uint32_t> users(d, 0), nodes(d, 0);
    crypto::Scalar ur, nr;
    for (size_t i = 0; i < n; ++i) {
      const auto a = masking::DeriveUserMask(m[i], t, d, true);
      for (size_t e = 0; e < d; ++e) users[e] += a.elems[e];
      ur += *a.r_lane;
    }
    for (size_t j = 0; j < k; ++j) {
      std::vector<crypto::SharedSeed> col;
      for (size_t i = 0; i < n; ++i) col.push_back(m[i][j]);
      const auto a = masking::NodeAggregateMask(col, t, d, true);
      for (size_t e = 0; e < d; ++e) nodes[e] += a.elems[e];
      nr += *a.r_lane;
    }
    o.Check(users == nodes && ur == nr, "n=" + std::to_string(n) + " k=" + std::to_string(k) + " d=" + std::to_string(d));
  };
  for (size_t n = 1; n <= 4; ++n) {
    for (size_t k = 1; k <= 4; ++k) {
      for (size_t d = 1; d <= 3; ++d) check(n, k, d);
    }
  }
  check(100, 3, 1000);
  return o;
}

// 4. Commitments are additively homomorphic.
Outcome Homomorphism() {
  Outcome o;
  Gen gen(401);
  std::vector<commit::ApvcParams> by_len;
  for (size_t d = 1; d <= 16; ++d) by_len.push_back(commit::ApvcParams::Setup(d));
  for (int i = 0; i < 1000; ++i) {
    const commit::ApvcKey key = commit::ApvcKey::Generate(gen.rng());
    const size_t d = gen.Range(1, 16);
    const auto& params = by_len[d - 1];
    std::vector<uint32_t> x1 = gen.Words(d), x2 = gen.Words(d);
    for (size_t e = 0; e < d; ++e) {
      x1[e] >>= 1;
      x2[e] >>= 1;
    }
    std::vector<uint32_t> sum(d);
    for (size_t e = 0; e < d; ++e) sum[e] = x1[e] + x2[e];
    const auto r1 = gen.Scalar(), r2 = gen.Scalar();
    const auto lhs = commit::Commit(params, key, x1, r1).point + commit::Commit(params, key, x2, r2).point;
    o.Check(lhs == commit::Commit(params, key, sum, r1 + r2).point, "instance " + std::to_string(i));
  }
  return o;
}

// 5. Result integrity: honest results verify, perturbed ones never do.
Outcome Integrity() {
  Outcome o;
  Gen gen(501);
  int honest = 0, rejected = 0, perturbed = 0;
  const auto cfg = Cfg(5, 2, 32, Mode::kSemiHonest, true);
  for (int trial = 0; trial < 100; ++trial) {
    const uint64_t seed = gen.U64();
    const auto in = Inputs(gen, 5, 32);
    Cluster cl(cfg, seed);
    const auto r = cl.Round(1, in, {0, 1, 2, 3, 4});
    bool all = r.w == OracleSum(in, Range(5), 32);
    for (const auto& u : cl.users) all = all && u.VerifyResult(r);
    honest += all;

    auto count = [&](const RoundResult& bad) {
      ++perturbed;
      bool any = false;
      for (const auto& u : cl.users) any = any || u.VerifyResult(bad);
      rejected += !any;
    };
    RoundResult w_bad = r;
    w_bad.w[gen.Range(0, 31)] += gen.Range(1, 0xFFFFFFFEu);
    count(w_bad);
    RoundResult x_bad = r;
    x_bad.proof->x = x_bad.proof->x + crypto::Point::BaseMul(crypto::Scalar::RandomNonZero(gen.rng()));
    count(x_bad);

    // Same deployment, but one node reports a shifted r-lane sum.
    Cluster twin(cfg, seed);
    twin.Send(1, in, {0, 1, 2, 3, 4});
    auto c = twin.Emit(1);
    auto& lane = *c[gen.Range(0, 1)].msg.a.r_lane;
    lane = lane + crypto::Scalar::RandomNonZero(gen.rng());
    count(twin.server.FinalizeRound(1, c));
  }
  o.Check(honest == 100, std::to_string(honest) + "/100 honest rounds verified");
  o.Check(rejected == perturbed, std::to_string(rejected) + "/" + std::to_string(perturbed) + " perturbations rejected");
  if (o.pass) o.detail = "100/100 honest, " + std::to_string(rejected) + "/" + std::to_string(perturbed) + " perturbed rejected";
  return o;
}

// 6. Malicious mode: forged or altered messages are never accepted, and a
// round finalizes only with every verified node message.
Outcome Authentication() {
  Outcome o;
  Gen gen(601);
  auto cfg = Cfg(4, 2, 8, Mode::kMalicious, true);
  cfg.reconcile = true;
  const auto wf = cfg.wire();
  std::map<std::string, int> tried, accepted;

  auto flip = [&](Bytes b) {
    const size_t bit = gen.Range(0, static_cast<uint32_t>(b.size() * 8 - 1));
    b[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
    return b;
  };
  // A mutation counts as accepted only if decoding and the handler both succeed.
  auto attempt = [&](const std::string& cls, const std::function<bool()>& fn) {
    ++tried[cls];
    try {
      if (fn()) ++accepted[cls];
    } catch (const Error&) {
    }
  };

  for (int round = 0; round < 12; ++round) {
    Cluster cl(cfg, gen.U64());
    const auto in = Inputs(gen, 4, 8);

    // Setup ciphertexts, including ones addressed to another user.
    for (int m = 0; m < 10; ++m) {
      const uint32_t u = gen.Range(0, 3);
      const Bytes body = transport::EncodeSetupCiphertext(cl.setup_cts[0][u]);
      attempt("setup", [&] {
        cl.users[u].InstallSetupCiphertext(0, transport::DecodeSetupCiphertext(flip(body)));
        return true;
      });
    }

    std::vector<UserRoundOutput> outs;
    for (uint32_t i = 0; i < 4; ++i) outs.push_back(cl.users[i].RoundQuantized(1, in[i]));
    for (uint32_t i = 0; i < 4; ++i) {
      const Bytes upd = transport::EncodeMaskedUpdate(outs[i].update, wf);
      for (int m = 0; m < 3; ++m) {
        attempt("update", [&] { return cl.server.IngestUpdate(UserId(i), transport::DecodeMaskedUpdate(flip(upd), wf)).accepted; });
      }
      // A valid update replayed under another sender.
      attempt("update", [&] { return cl.server.IngestUpdate(UserId((i + 1) % 4), outs[i].update).accepted; });
      const Bytes part = transport::EncodeParticipation(outs[i].participations[0].second, wf);
      for (int m = 0; m < 3; ++m) {
        attempt("participation", [&] {
          return cl.nodes[0].HandleParticipation(UserId(i), transport::DecodeParticipation(flip(part), wf)).accepted;
        });
      }
      attempt("participation", [&] {
        return cl.nodes[0].HandleParticipation(UserId((i + 1) % 4), outs[i].participations[0].second).accepted;
      });
    }
    for (uint32_t i = 0; i < 4; ++i) {
      cl.server.IngestUpdate(UserId(i), outs[i].update);
      for (const auto& [j, msg] : outs[i].participations) cl.nodes[j].HandleParticipation(UserId(i), msg);
      cl.server.IngestRelayedParticipation(UserId(i), outs[i].participations[0].second);
    }
    const auto honest = cl.Emit(1);

    for (int m = 0; m < 10; ++m) {
      const uint32_t j = gen.Range(0, 1);
      const Bytes body = transport::EncodeNodeAggregate(honest[j].msg, wf);
      attempt("node aggregate", [&] {
        auto c = honest;
        c[j].msg = transport::DecodeNodeAggregate(flip(body), wf);
        cl.server.FinalizeRound(1, c);
        return true;
      });
    }
    // Gating: a missing node message blocks finalization.
    attempt("node aggregate", [&] {
      const std::vector<NodeContribution> partial = {honest[0]};
      cl.server.FinalizeRound(1, partial);
      return true;
    });

    const Bytes rec = transport::EncodeReconcileRequest(cl.server.BuildReconcileRequest(1), wf);
    for (int m = 0; m < 10; ++m) {
      attempt("reconcile", [&] {
        cl.nodes[1].HandleReconcile(transport::DecodeReconcileRequest(flip(rec), wf));
        return true;
      });
    }

    // The untouched messages still complete the round.
    const auto r = cl.server.FinalizeRound(1, honest);
    o.Check(r.w == OracleSum(in, Range(4), 8), "honest round after mutations differs");
    for (const auto& u : cl.users) o.Check(u.VerifyResult(r), "honest result rejected");
  }
  int total = 0, total_accepted = 0;
  std::string summary;
  for (const auto& [cls, n] : tried) {
    total += n;
    total_accepted += accepted[cls];
    summary += cls + " " + std::to_string(accepted[cls]) + "/" + std::to_string(n) + "; ";
  }
  o.Check(total >= 500, "only " + std::to_string(total) + " mutations");
  o.Check(total_accepted == 0, "accepted: " + summary);
  if (o.pass) o.detail = std::to_string(total) + " mutations, 0 accepted";
  return o;
}

// 7. Wire sizes at d = 16000.
Outcome WireSizes() {
  Outcome o;
  for (Mode mode : {Mode::kSemiHonest, Mode::kMalicious}) {
    Cluster cl(Cfg(2, 2, 16000, mode), 701);
    Gen gen(702);
    cl.Send(1, Inputs(gen, 2, 16000), {0, 1});
    const auto c = cl.Emit(1);
    const size_t want = mode == Mode::kMalicious ? 64072 : 64008;
    for (const auto& nc : c) {
      const size_t got = transport::EncodeNodeAggregate(nc.msg, cl.cfg.wire()).size();
      o.Check(got == want, "node aggregate is " + std::to_string(got) + " bytes");
    }
    if (mode == Mode::kMalicious) o.Check(c[0].msg.sigma->size() == 64, "signature size");
  }
  return o;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double RSquared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0 ? 1.0 : sxy * sxy / (sxx * syy);
}

// 8. Scaling: user cost flat in n, node and server cost linear in n.
Outcome Scaling() {
  Outcome o;
  harness::BenchSpec spec;
  spec.n_values = {50, 100, 200, 400};
  spec.base = Cfg(400, 2, 1000, Mode::kMalicious);
  spec.repetitions = 3;
  spec.seed = 801;
  std::map<Role, std::map<uint32_t, std::vector<double>>> times;
  for (const auto& row : harness::RunBench(spec)) {
    if (row.phase == harness::Phase::kAggregation) times[row.role][row.n].push_back(row.wall_time_ms);
  }
  std::map<Role, std::vector<double>> med;
  std::vector<double> ns;
  for (uint32_t n : spec.n_values) {
    ns.push_back(n);
    for (Role role : {Role::kUser, Role::kNode, Role::kServer}) med[role].push_back(Median(times[role][n]));
  }
  const auto& u = med[Role::kUser];
  const double ratio = *std::max_element(u.begin(), u.end()) / *std::min_element(u.begin(), u.end());
  const double r2_node = RSquared(ns, med[Role::kNode]);
  const double r2_server = RSquared(ns, med[Role::kServer]);
  o.Check(ratio < 2.0, Str("user max/min %.2f", ratio));
  o.Check(r2_node >= 0.9, Str("node R^2 %.3f", r2_node));
  o.Check(r2_server >= 0.9, Str("server R^2 %.3f", r2_server));
  o.detail = Str("user max/min %.2f, node R^2 %.3f, server R^2 %.3f", ratio, r2_node, r2_server);
  return o;
}

// 9. A crashed node is rebuilt from its peers' master shares.
Outcome Recovery() {
  Outcome o;
  auto cfg = Cfg(12, 3, 64);
  cfg.seed_source = SeedSource::kMasterDerived;
  cfg.recovery_threshold = 2;
  LocalDeployment dep(cfg, 901);
  Gen gen(902);
  for (uint32_t t = 1; t <= 50; ++t) {
    const auto in = Inputs(gen, 12, 64);
    RoundFaults f;
    f.offline_nodes = {gen.Range(0, 2)};
    const auto r = dep.RunRound(t, in, f);
    const std::string tag = "trial " + std::to_string(t);
    o.Check(r.ok(), tag + ": " + r.error_message);
    if (!r.ok()) continue;
    o.Check(r.result->w == OracleSum(in, Range(12), 64), tag + ": sum differs");
    o.Check(r.recovered_nodes == std::vector<uint32_t>(f.offline_nodes.begin(), f.offline_nodes.end()),
            tag + ": wrong node recovered");
  }
  return o;
}

// 10. Federated training through the protocol tracks plaintext training.
Outcome Demo() {
  Outcome o;
  harness::DemoSpec spec;
  spec.rounds = 20;
  const auto rep = harness::RunDemo(spec);
  const double tol = std::ldexp(1.0, -14);
  o.Check(rep.rounds.size() == 20, "round count");
  o.Check(rep.MaxUpdateGap() <= tol, Str("update gap %.3g", rep.MaxUpdateGap()));
  o.Check(rep.MaxModelGap() <= tol, Str("model gap %.3g", rep.MaxModelGap()));
  o.Check(rep.LossDecreasing(10), "loss not decreasing over the first 10 rounds");
  if (o.pass) o.detail = Str("update gap %.3g, model gap %.3g", rep.MaxUpdateGap(), rep.MaxModelGap());
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"correctness", Correctness},   {"dropout", Dropout},         {"mask-cancellation", Cancellation},
      {"homomorphism", Homomorphism}, {"integrity", Integrity},     {"authentication", Authentication},
      {"wire-sizes", WireSizes},      {"scaling", Scaling},         {"node-recovery", Recovery},
      {"demo", Demo},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %2d %s%s%s\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.empty() ? "" : ": ",
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
