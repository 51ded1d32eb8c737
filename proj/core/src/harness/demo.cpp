#include "seafl/harness/demo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "seafl/harness/deployment.hpp"
#include "seafl/masking/masking.hpp"

namespace seafl::harness {
namespace {

struct LocalData {
  std::vector<std::vector<double>> x;  // samples x d
  std::vector<double> y;
};

double Loss(const std::vector<LocalData>& data, const std::vector<double>& w) {
  double sum = 0.0;
  size_t count = 0;
  for (const auto& ud : data) {
    for (size_t s = 0; s < ud.y.size(); ++s) {
      double pred = 0.0;
      for (size_t e = 0; e < w.size(); ++e) pred += ud.x[s][e] * w[e];
      sum += 0.5 * (pred - ud.y[s]) * (pred - ud.y[s]);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

std::vector<double> Gradient(const LocalData& ud, const std::vector<double>& w) {
  std::vector<double> g(w.size(), 0.0);
  for (size_t s = 0; s < ud.y.size(); ++s) {
    double r = -ud.y[s];
    for (size_t e = 0; e < w.size(); ++e) r += ud.x[s][e] * w[e];
    for (size_t e = 0; e < w.size(); ++e) g[e] += r * ud.x[s][e];
  }
  for (double& v : g) v /= static_cast<double>(ud.y.size());
  return g;
}

double LinfGap(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

double DemoReport::MaxUpdateGap() const {
  double m = 0.0;
  for (const auto& r : rounds) m = std::max(m, r.update_gap);
  return m;
}

double DemoReport::MaxModelGap() const {
  double m = 0.0;
  for (const auto& r : rounds) m = std::max(m, r.model_gap);
  return m;
}

bool DemoReport::LossDecreasing(size_t count) const {
  double prev = initial_loss;
  for (size_t i = 0; i < std::min(count, rounds.size()); ++i) {
    if (!(rounds[i].secure_loss < prev)) return false;
    prev = rounds[i].secure_loss;
  }
  return count <= rounds.size();
}

DemoReport RunDemo(const DemoSpec& spec) {
  protocol::ProtocolConfig cfg;
  cfg.n = spec.n;
  cfg.k = spec.k;
  cfg.d = spec.d;
  cfg.iterations = spec.rounds;
  cfg.mode = spec.mode;
  cfg.integrity = spec.integrity;
  cfg.Validate();

  crypto::DeterministicRng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<double> truth(spec.d);
  for (double& v : truth) v = uniform(rng);
  std::vector<LocalData> data(spec.n);
  for (auto& ud : data) {
    for (uint32_t s = 0; s < spec.samples_per_user; ++s) {
      std::vector<double> x(spec.d);
      double y = 0.0;
      for (uint32_t e = 0; e < spec.d; ++e) {
        x[e] = normal(rng);
        y += x[e] * truth[e];
      }
      ud.x.push_back(std::move(x));
      ud.y.push_back(y + spec.noise_sigma * normal(rng));
    }
  }

  LocalDeployment dep(cfg, spec.seed ^ 0x5eaf1ULL);
  std::vector<double> w_secure(spec.d, 0.0);
  std::vector<double> w_plain(spec.d, 0.0);
  DemoReport report;
  report.initial_loss = Loss(data, w_secure);

  for (uint32_t t = 1; t <= spec.rounds; ++t) {
    std::vector<std::vector<double>> grads;
    std::vector<double> exact_mean(spec.d, 0.0);
    for (const auto& ud : data) {
      grads.push_back(Gradient(ud, w_secure));
      for (uint32_t e = 0; e < spec.d; ++e) exact_mean[e] += grads.back()[e] / spec.n;
    }
    RoundFaults faults;
    faults.tamper_result = spec.tamper;
    const RoundReport rr = dep.RunRound(t, std::span<const std::vector<double>>(grads), faults);

    DemoRound row;
    row.t = t;
    if (rr.ok()) {
      const std::vector<double> secure_mean =
          masking::Dequantize(rr.result->w, rr.result->contributor_count, cfg.quant);
      row.update_gap = spec.learning_rate * LinfGap(secure_mean, exact_mean);
      for (const auto& a : rr.user_accepts) {
        if (!a) continue;
        (*a ? row.accepted : row.rejected) += 1;
      }
      row.applied = !cfg.integrity || row.rejected == 0;
      if (row.applied) {
        for (uint32_t e = 0; e < spec.d; ++e) w_secure[e] -= spec.learning_rate * secure_mean[e];
      }
    }
    std::vector<double> plain_mean(spec.d, 0.0);
    for (const auto& ud : data) {
      const auto g = Gradient(ud, w_plain);
      for (uint32_t e = 0; e < spec.d; ++e) plain_mean[e] += g[e] / spec.n;
    }
    for (uint32_t e = 0; e < spec.d; ++e) w_plain[e] -= spec.learning_rate * plain_mean[e];

    row.secure_loss = Loss(data, w_secure);
    row.plain_loss = Loss(data, w_plain);
    row.model_gap = LinfGap(w_secure, w_plain);
    report.rounds.push_back(row);
  }
  return report;
}

std::string FormatDemoTable(const DemoReport& report) {
  std::string out = " round  secure_loss   plain_loss   update_gap    model_gap  accepted  rejected\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%6d %12.6f %12.6f %12s %12s\n", 0, report.initial_loss, report.initial_loss,
                "-", "-");
  out += line;
  for (const auto& r : report.rounds) {
    std::snprintf(line, sizeof(line), "%6u %12.6f %12.6f %12.3e %12.3e %9u %9u%s\n", r.t, r.secure_loss,
                  r.plain_loss, r.update_gap, r.model_gap, r.accepted, r.rejected, r.applied ? "" : "  (not applied)");
    out += line;
  }
  return out;
}

}  // namespace seafl::harness
