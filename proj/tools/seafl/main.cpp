// seafl: role binaries, benchmark driver, demo and roster generation.
//
// Exit status: 0 on success, 2 on a usage error, 1 on any other failure.
// Failures print one JSON object on stderr: {"error": <code>, "message": ...}.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>

#include "seafl/common/error.hpp"
#include "seafl/crypto/rng.hpp"
#include "seafl/harness/bench.hpp"
#include "seafl/harness/config.hpp"
#include "seafl/harness/demo.hpp"
#include "seafl/harness/net.hpp"
#include "seafl/harness/roster.hpp"

namespace {

using seafl::ErrorCode;
using seafl::Fail;
using seafl::harness::Json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void PrintError(std::string_view code, const std::string& message) {
  std::cerr << Json{{"error", std::string(code)}, {"message", message}}.dump() << std::endl;
}

// Raw string values of every config flag the user passed, keyed by config
// name. Parsing is deferred to ApplyConfig so flags and files share one path.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;

  void Register(CLI::App* app, const std::vector<std::string>& skip = {}) {
    app->add_option("--config", file, "flat JSON config file; flags override it");
    for (const std::string& key : seafl::harness::ConfigKeys()) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      app->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& v) { values[key] = v; }, "config: " + key);
    }
  }

  Json Overlay() const {
    Json j = file.empty() ? Json::object() : seafl::harness::LoadJsonFile(file);
    for (const auto& [k, v] : values) j[k] = v;
    return j;
  }

  seafl::protocol::ProtocolConfig Build(const seafl::protocol::ProtocolConfig& base = {}) const {
    seafl::protocol::ProtocolConfig cfg = base;
    seafl::harness::ApplyConfig(Overlay(), cfg);
    cfg.Validate();
    return cfg;
  }
};

std::vector<seafl::transport::Endpoint> ParseEndpointList(const std::string& text) {
  std::vector<seafl::transport::Endpoint> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(seafl::transport::ParseEndpoint(item));
  }
  return out;
}

std::vector<uint32_t> ParseCountList(const std::string& text) {
  std::vector<uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v == 0 || v > UINT32_MAX) {
      Fail(ErrorCode::kUsageError, "--n expects a comma list of positive counts, got '" + text + "'");
    }
    out.push_back(static_cast<uint32_t>(v));
  }
  if (out.empty()) Fail(ErrorCode::kUsageError, "--n list is empty");
  return out;
}

struct RoleFlags {
  std::string listen;
  std::string server;
  std::string nodes;
  std::string roster;
  std::string secrets;
  uint32_t index = 0;
  uint64_t input_seed = 1;
  uint32_t connect_timeout_ms = 30000;
};

seafl::harness::NetOptions MakeNetOptions(const seafl::protocol::ProtocolConfig& cfg, const RoleFlags& f) {
  seafl::harness::NetOptions opts;
  opts.cfg = cfg;
  opts.roster = seafl::harness::ReadRosterFile(f.roster);
  if (!f.server.empty()) opts.server = seafl::transport::ParseEndpoint(f.server);
  opts.nodes = ParseEndpointList(f.nodes);
  opts.connect_timeout = std::chrono::milliseconds(f.connect_timeout_ms);
  opts.log = &std::cout;
  return opts;
}

int RunServerCmd(const ConfigFlags& cf, const RoleFlags& f) {
  const auto cfg = cf.Build();
  const auto opts = MakeNetOptions(cfg, f);
  const auto secrets = seafl::harness::ReadSecretsFile(f.secrets);
  seafl::transport::TcpListener listener(seafl::transport::ParseEndpoint(f.listen));
  const auto rounds = seafl::harness::RunServer(opts, secrets, listener);
  for (const auto& r : rounds) {
    if (r.error) {
      PrintError(seafl::ErrorCodeName(*r.error), "round " + std::to_string(r.t) + ": " + r.error_message);
      return kExitFailure;
    }
  }
  return 0;
}

int RunNodeCmd(const ConfigFlags& cf, const RoleFlags& f) {
  const auto cfg = cf.Build();
  const auto opts = MakeNetOptions(cfg, f);
  const auto secrets = seafl::harness::ReadSecretsFile(f.secrets);
  seafl::transport::TcpListener listener(seafl::transport::ParseEndpoint(f.listen));
  seafl::crypto::SystemRng rng;
  seafl::harness::RunNode(opts, f.index, secrets, listener, rng);
  return 0;
}

int RunUserCmd(const ConfigFlags& cf, const RoleFlags& f) {
  const auto cfg = cf.Build();
  const auto opts = MakeNetOptions(cfg, f);
  const auto secrets = seafl::harness::ReadSecretsFile(f.secrets);
  const auto rounds = seafl::harness::RunUser(opts, f.index, secrets, [&](uint32_t t) {
    return seafl::harness::SyntheticInput(f.input_seed, f.index, t, cfg);
  });
  for (const auto& r : rounds) {
    if (r.verified && !*r.verified) {
      PrintError(seafl::ErrorCodeName(ErrorCode::kAuthFailure), "round " + std::to_string(r.t) + " failed integrity verification");
      return kExitFailure;
    }
  }
  return 0;
}

struct BenchFlags {
  std::string n_list = "50,100,200";
  uint32_t reps = 10;
  std::string transport = "in-process";
  std::string out;
  uint64_t seed = 1;
};

int RunBenchCmd(const ConfigFlags& cf, const BenchFlags& f) {
  seafl::harness::BenchSpec spec;
  spec.n_values = ParseCountList(f.n_list);
  spec.repetitions = f.reps;
  spec.transport = seafl::harness::ParseTransport(f.transport);
  spec.seed = f.seed;
  seafl::protocol::ProtocolConfig base;
  base.n = *std::max_element(spec.n_values.begin(), spec.n_values.end());
  spec.base = cf.Build(base);

  const std::string csv = seafl::harness::FormatBenchCsv(seafl::harness::WithGroupMeans(seafl::harness::RunBench(spec)));
  if (f.out.empty() || f.out == "-") {
    std::cout << csv;
  } else {
    seafl::harness::WriteTextFile(f.out, csv);
    std::cerr << Json{{"written", f.out}}.dump() << std::endl;
  }
  return 0;
}

struct DemoFlags {
  uint32_t rounds = 20;
  bool tamper = false;
  uint64_t seed = 1;
};

int RunDemoCmd(const ConfigFlags& cf, const DemoFlags& f) {
  seafl::harness::DemoSpec spec;
  // Demo defaults differ from the protocol defaults; only explicit keys apply.
  seafl::protocol::ProtocolConfig cfg;
  cfg.n = spec.n;
  cfg.k = spec.k;
  cfg.d = spec.d;
  cfg = cf.Build(cfg);
  spec.n = cfg.n;
  spec.k = cfg.k;
  spec.d = cfg.d;
  spec.mode = cfg.mode;
  spec.integrity = cfg.integrity;
  spec.rounds = f.rounds;
  spec.tamper = f.tamper;
  spec.seed = f.seed;
  if (spec.tamper && !spec.integrity) Fail(ErrorCode::kUsageError, "--tamper needs --integrity true");

  const auto report = seafl::harness::RunDemo(spec);
  std::cout << seafl::harness::FormatDemoTable(report);
  return 0;
}

struct KeygenFlags {
  std::string roster = "roster.csv";
  std::string secrets = "secrets.csv";
  std::optional<uint64_t> seed;
};

int RunKeygenCmd(const ConfigFlags& cf, const KeygenFlags& f) {
  const auto cfg = cf.Build();
  std::unique_ptr<seafl::crypto::Rng> rng;
  if (f.seed) {
    rng = std::make_unique<seafl::crypto::DeterministicRng>(*f.seed);
  } else {
    rng = std::make_unique<seafl::crypto::SystemRng>();
  }
  const auto [roster, secrets] = seafl::harness::GenerateRoster(cfg, *rng);
  seafl::harness::WriteTextFile(f.roster, seafl::harness::FormatRoster(roster));
  seafl::harness::WriteTextFile(f.secrets, seafl::harness::FormatSecrets(secrets));
  std::cerr << Json{{"roster", f.roster}, {"secrets", f.secrets}, {"parties", roster.entries.size()}}.dump()
            << std::endl;
  return 0;
}

int Main(int argc, char** argv) {
  CLI::App app{"seafl: secure federated aggregation with assisting nodes"};
  app.require_subcommand(1);

  ConfigFlags cf;
  RoleFlags role;
  BenchFlags bench;
  DemoFlags demo;
  KeygenFlags keygen;

  auto add_role = [&](const std::string& name, const std::string& about) {
    CLI::App* sub = app.add_subcommand(name, about);
    cf.Register(sub);
    sub->add_option("--roster", role.roster, "public key roster")->required();
    sub->add_option("--secrets", role.secrets, "secret key file holding this party's keys")->required();
    sub->add_option("--connect-timeout-ms", role.connect_timeout_ms, "connect/accept timeout");
    return sub;
  };

  CLI::App* server = add_role("server", "run the aggregation server");
  server->add_option("--listen", role.listen, "host:port to accept nodes and users on")->required();

  CLI::App* node = add_role("node", "run one assisting node");
  node->add_option("--listen", role.listen, "host:port to accept users on")->required();
  node->add_option("--server", role.server, "server host:port")->required();
  node->add_option("--index", role.index, "pool ordinal")->required();

  CLI::App* user = add_role("user", "run one user with synthetic inputs");
  user->add_option("--server", role.server, "server host:port")->required();
  user->add_option("--nodes", role.nodes, "comma list of node host:port, by pool ordinal")->required();
  user->add_option("--index", role.index, "user ordinal")->required();
  user->add_option("--input-seed", role.input_seed, "seed for the synthetic input vectors");

  CLI::App* bench_cmd = app.add_subcommand("bench", "measure per-role cost across n; writes CSV");
  cf.Register(bench_cmd, {"n"});
  bench_cmd->add_option("--n", bench.n_list, "comma list of user counts");
  bench_cmd->add_option("--reps", bench.reps, "repetitions per n");
  bench_cmd->add_option("--transport", bench.transport, "in-process | tcp-localhost");
  bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");
  bench_cmd->add_option("--seed", bench.seed, "deterministic seed");

  CLI::App* demo_cmd = app.add_subcommand("demo", "synthetic FedAvg through the protocol vs plaintext");
  cf.Register(demo_cmd);
  demo_cmd->add_option("--rounds", demo.rounds, "training rounds");
  demo_cmd->add_flag("--tamper", demo.tamper, "server corrupts every result (needs integrity)");
  demo_cmd->add_option("--seed", demo.seed, "deterministic seed");

  CLI::App* keygen_cmd = app.add_subcommand("keygen-roster", "generate keys for every party");
  cf.Register(keygen_cmd);
  keygen_cmd->add_option("--roster", keygen.roster, "public roster output path");
  keygen_cmd->add_option("--secrets", keygen.secrets, "secret keys output path");
  keygen_cmd->add_option("--seed", keygen.seed, "deterministic seed (default: OS entropy)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    PrintError(seafl::ErrorCodeName(ErrorCode::kUsageError), e.what());
    return kExitUsage;
  }

  try {
    if (server->parsed()) return RunServerCmd(cf, role);
    if (node->parsed()) return RunNodeCmd(cf, role);
    if (user->parsed()) return RunUserCmd(cf, role);
    if (bench_cmd->parsed()) return RunBenchCmd(cf, bench);
    if (demo_cmd->parsed()) return RunDemoCmd(cf, demo);
    if (keygen_cmd->parsed()) return RunKeygenCmd(cf, keygen);
  } catch (const seafl::Error& e) {
    PrintError(seafl::ErrorCodeName(e.code()), e.what());
    return e.code() == ErrorCode::kUsageError ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    PrintError(seafl::ErrorCodeName(ErrorCode::kInternal), e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return Main(argc, argv); }
