#include "seafl/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "seafl/common/bytes.hpp"
#include "seafl/common/error.hpp"

namespace seafl::harness {
namespace {

template <typename T>
T Get(const Json& json, const std::string& key) {
  try {
    return json.at(key).get<T>();
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kInvalidConfig, "config key '" + key + "': " + e.what());
  }
}

// Flag values arrive as strings; accept both spellings.
template <typename T>
T GetLoose(const Json& json, const std::string& key) {
  const Json& v = json.at(key);
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (s == "true" || s == "1" || s == "on") return true;
        if (s == "false" || s == "0" || s == "off") return false;
        throw std::invalid_argument(s);
      } else if constexpr (std::is_floating_point_v<T>) {
        size_t used = 0;
        const double d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<T>(d);
      } else {
        size_t used = 0;
        const unsigned long long u = std::stoull(s, &used);
        if (used != s.size() || s.find('-') != std::string::npos) throw std::invalid_argument(s);
        if (u > std::numeric_limits<T>::max()) throw std::out_of_range(s);
        return static_cast<T>(u);
      }
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidConfig, "config key '" + key + "': cannot parse '" + s + "'");
    }
  }
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if (v.is_number_integer() && v.get<long long>() < 0) {
      Fail(ErrorCode::kInvalidConfig, "config key '" + key + "' must be non-negative");
    }
  }
  return Get<T>(json, key);
}

}  // namespace

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys = {
      "n",          "k",           "d",           "alpha",          "delta",          "iterations",
      "mode",       "integrity",   "frac_bits",   "element_bound",  "max_contributors",
      "round_deadline_ms",         "list_check",  "seed_source",    "node_pool",
      "recovery_threshold",        "reconcile",   "beacon"};
  return keys;
}

protocol::Mode ParseMode(std::string_view text) {
  if (text == "sh" || text == "semi-honest") return protocol::Mode::kSemiHonest;
  if (text == "malicious" || text == "mal") return protocol::Mode::kMalicious;
  Fail(ErrorCode::kInvalidConfig, "mode must be 'sh' or 'malicious', got '" + std::string(text) + "'");
}

std::string_view ModeName(protocol::Mode mode) { return mode == protocol::Mode::kMalicious ? "malicious" : "sh"; }

void ApplyConfig(const Json& json, protocol::ProtocolConfig& cfg) {
  if (!json.is_object()) Fail(ErrorCode::kInvalidConfig, "config must be a JSON object");
  const auto& keys = ConfigKeys();
  for (const auto& [key, value] : json.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      Fail(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
    }
  }
  auto has = [&](const char* key) { return json.contains(key); };
  if (has("n")) cfg.n = GetLoose<uint32_t>(json, "n");
  if (has("k")) cfg.k = GetLoose<uint32_t>(json, "k");
  if (has("d")) cfg.d = GetLoose<uint32_t>(json, "d");
  if (has("alpha")) cfg.alpha = GetLoose<double>(json, "alpha");
  if (has("delta")) cfg.delta = GetLoose<double>(json, "delta");
  if (has("iterations")) cfg.iterations = GetLoose<uint32_t>(json, "iterations");
  if (has("mode")) cfg.mode = ParseMode(Get<std::string>(json, "mode"));
  if (has("integrity")) cfg.integrity = GetLoose<bool>(json, "integrity");
  if (has("frac_bits")) cfg.quant.frac_bits = GetLoose<uint32_t>(json, "frac_bits");
  if (has("element_bound")) cfg.quant.element_bound = GetLoose<uint32_t>(json, "element_bound");
  if (has("max_contributors")) cfg.quant.max_contributors = GetLoose<uint32_t>(json, "max_contributors");
  if (has("round_deadline_ms")) {
    cfg.round_deadline = std::chrono::milliseconds(GetLoose<uint32_t>(json, "round_deadline_ms"));
  }
  if (has("list_check")) {
    const auto v = Get<std::string>(json, "list_check");
    if (v == "size") {
      cfg.list_check = protocol::ListCheck::kSizeOnly;
    } else if (v == "digest") {
      cfg.list_check = protocol::ListCheck::kDigest;
    } else {
      Fail(ErrorCode::kInvalidConfig, "list_check must be 'size' or 'digest'");
    }
  }
  if (has("seed_source")) {
    const auto v = Get<std::string>(json, "seed_source");
    if (v == "kx") {
      cfg.seed_source = protocol::SeedSource::kKeyExchange;
    } else if (v == "master") {
      cfg.seed_source = protocol::SeedSource::kMasterDerived;
    } else {
      Fail(ErrorCode::kInvalidConfig, "seed_source must be 'kx' or 'master'");
    }
  }
  if (has("node_pool")) cfg.node_pool = GetLoose<uint32_t>(json, "node_pool");
  if (has("recovery_threshold")) cfg.recovery_threshold = GetLoose<uint32_t>(json, "recovery_threshold");
  if (has("reconcile")) cfg.reconcile = GetLoose<bool>(json, "reconcile");
  if (has("beacon")) {
    const Bytes b = [&] {
      try {
        return FromHex(Get<std::string>(json, "beacon"));
      } catch (const Error&) {
        Fail(ErrorCode::kInvalidConfig, "beacon must be hex");
      }
    }();
    if (b.size() != cfg.beacon.size()) Fail(ErrorCode::kInvalidConfig, "beacon must be 32 bytes");
    std::copy(b.begin(), b.end(), cfg.beacon.begin());
  }
}

Json ConfigToJson(const protocol::ProtocolConfig& cfg) {
  Json j;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  j["d"] = cfg.d;
  j["alpha"] = cfg.alpha;
  j["delta"] = cfg.delta;
  j["iterations"] = cfg.iterations;
  j["mode"] = std::string(ModeName(cfg.mode));
  j["integrity"] = cfg.integrity;
  j["frac_bits"] = cfg.quant.frac_bits;
  j["element_bound"] = cfg.quant.element_bound;
  j["max_contributors"] = cfg.quant.max_contributors;
  j["round_deadline_ms"] = cfg.round_deadline.count();
  j["list_check"] = cfg.list_check == protocol::ListCheck::kDigest ? "digest" : "size";
  j["seed_source"] = cfg.seed_source == protocol::SeedSource::kMasterDerived ? "master" : "kx";
  j["node_pool"] = cfg.node_pool;
  j["recovery_threshold"] = cfg.recovery_threshold;
  j["reconcile"] = cfg.reconcile;
  j["beacon"] = ToHex(cfg.beacon);
  return j;
}

Json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Json j = Json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) Fail(ErrorCode::kInvalidConfig, path + " is not a JSON object");
  return j;
}

}  // namespace seafl::harness
