#include "seafl/harness/bench.hpp"

#include <cstdio>
#include <map>
#include <tuple>

#include "seafl/harness/config.hpp"
#include "seafl/harness/net.hpp"

namespace seafl::harness {

using protocol::Role;

TransportKind ParseTransport(std::string_view text) {
  if (text == "in-process" || text == "inproc") return TransportKind::kInProcess;
  if (text == "tcp-localhost" || text == "tcp") return TransportKind::kTcpLocalhost;
  Fail(ErrorCode::kInvalidConfig, "transport must be 'in-process' or 'tcp-localhost'");
}

std::string_view TransportName(TransportKind kind) {
  return kind == TransportKind::kInProcess ? "in-process" : "tcp-localhost";
}

namespace {

void AppendRows(std::vector<BenchRecord>& out, Phase phase, const PhaseCosts& costs,
                const protocol::ProtocolConfig& cfg, const std::vector<uint32_t>& users,
                const std::vector<uint32_t>& nodes, int rep) {
  auto push = [&](Role role, double ms, uint64_t bytes) {
    out.push_back({phase, role, cfg.n, cfg.k, cfg.d, cfg.mode, rep, ms, bytes});
  };
  auto mean_of = [](const std::vector<PartyCost>& v, const std::vector<uint32_t>& which) {
    double sum = 0.0;
    for (uint32_t i : which) sum += v[i].compute_ms;
    return which.empty() ? 0.0 : sum / static_cast<double>(which.size());
  };
  push(Role::kUser, mean_of(costs.users, users), users.empty() ? 0 : costs.users[users.front()].body_bytes);
  push(Role::kNode, mean_of(costs.nodes, nodes), nodes.empty() ? 0 : costs.nodes[nodes.front()].body_bytes);
  push(Role::kServer, costs.server.compute_ms, costs.server.body_bytes);
}

}  // namespace

std::vector<BenchRecord> RunBench(const BenchSpec& spec) {
  if (spec.repetitions == 0) Fail(ErrorCode::kInvalidConfig, "repetitions must be >= 1");
  if (spec.n_values.empty()) Fail(ErrorCode::kInvalidConfig, "need at least one n value");
  std::vector<BenchRecord> rows;
  for (uint32_t n : spec.n_values) {
    protocol::ProtocolConfig cfg = spec.base;
    cfg.n = n;
    cfg.Validate();
    std::vector<uint32_t> all_users(n);
    for (uint32_t i = 0; i < n; ++i) all_users[i] = i;
    const std::vector<uint32_t> active = protocol::ActiveNodes(cfg, 1);
    std::vector<uint32_t> pool(cfg.PoolSize());
    for (uint32_t j = 0; j < pool.size(); ++j) pool[j] = j;

    for (uint32_t rep = 0; rep < spec.repetitions; ++rep) {
      const uint64_t seed = spec.seed * 1000003ULL + n * 131ULL + rep;
      std::vector<GradientVector> inputs;
      inputs.reserve(n);
      for (uint32_t i = 0; i < n; ++i) inputs.push_back(SyntheticInput(seed, i, 1, cfg));

      RoundReport rep_out;
      if (spec.transport == TransportKind::kInProcess) {
        LocalDeployment dep(cfg, seed);
        AppendRows(rows, Phase::kSetup, dep.setup_costs(), cfg, all_users, pool, static_cast<int>(rep));
        rep_out = dep.RunRound(1, inputs);
      } else {
        rep_out = RunTcpRoundTrip(cfg, inputs, seed);
      }
      if (!rep_out.ok()) {
        Fail(rep_out.error.value_or(ErrorCode::kInternal), "bench round failed: " + rep_out.error_message);
      }
      AppendRows(rows, Phase::kAggregation, rep_out.costs, cfg, all_users, active, static_cast<int>(rep));
    }
  }
  return rows;
}

std::vector<BenchRecord> WithGroupMeans(const std::vector<BenchRecord>& rows) {
  std::vector<BenchRecord> out = rows;
  std::map<std::tuple<int, int, uint32_t>, std::pair<BenchRecord, uint32_t>> groups;
  std::vector<std::tuple<int, int, uint32_t>> order;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(static_cast<int>(r.phase), static_cast<int>(r.role), r.n);
    auto [it, fresh] = groups.try_emplace(key, r, 0);
    if (fresh) {
      order.push_back(key);
      it->second.first.wall_time_ms = 0.0;
      it->second.first.outbound_bytes = 0;
    }
    it->second.first.wall_time_ms += r.wall_time_ms;
    it->second.first.outbound_bytes += r.outbound_bytes;
    it->second.second += 1;
  }
  for (const auto& key : order) {
    auto [mean, count] = groups.at(key);
    mean.rep = -1;
    mean.wall_time_ms /= count;
    mean.outbound_bytes /= count;
    out.push_back(mean);
  }
  return out;
}

std::string FormatBenchCsv(const std::vector<BenchRecord>& rows) {
  std::string out = "phase,role,n,k,d,mode,rep,wall_time_ms,outbound_bytes\n";
  char ms[32];
  for (const auto& r : rows) {
    std::snprintf(ms, sizeof(ms), "%.4f", r.wall_time_ms);
    out += std::string(PhaseName(r.phase)) + "," + std::string(protocol::RoleName(r.role)) + "," +
           std::to_string(r.n) + "," + std::to_string(r.k) + "," + std::to_string(r.d) + "," +
           std::string(ModeName(r.mode)) + "," + (r.rep < 0 ? std::string("mean") : std::to_string(r.rep)) + "," +
           ms + "," + std::to_string(r.outbound_bytes) + "\n";
  }
  return out;
}

}  // namespace seafl::harness
