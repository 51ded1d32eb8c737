#pragma once

// Flat JSON configuration. Every key maps onto one ProtocolConfig field and
// can be overridden by a CLI flag of the same name.
//
//   n k d alpha delta iterations mode(sh|malicious) integrity
//   frac_bits element_bound max_contributors round_deadline_ms
//   list_check(size|digest) seed_source(kx|master) node_pool
//   recovery_threshold reconcile beacon(64 hex chars)

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "seafl/protocol/config.hpp"

namespace seafl::harness {

using Json = nlohmann::json;

// Keys understood by ApplyConfig, in documentation order.
const std::vector<std::string>& ConfigKeys();

// Overlays `json` onto `cfg`. Throws kInvalidConfig for unknown keys or
// values of the wrong type; does not call Validate().
void ApplyConfig(const Json& json, protocol::ProtocolConfig& cfg);
Json ConfigToJson(const protocol::ProtocolConfig& cfg);

// Throws kIoError when unreadable and kInvalidConfig when not a JSON object.
Json LoadJsonFile(const std::string& path);

protocol::Mode ParseMode(std::string_view text);
std::string_view ModeName(protocol::Mode mode);

}  // namespace seafl::harness
