#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seafl/harness/deployment.hpp"

namespace seafl::harness {

enum class TransportKind { kInProcess, kTcpLocalhost };

TransportKind ParseTransport(std::string_view text);
std::string_view TransportName(TransportKind kind);

struct BenchSpec {
  std::vector<uint32_t> n_values = {50, 100, 200};
  protocol::ProtocolConfig base;  // n is overwritten per sweep point
  uint32_t repetitions = 10;
  TransportKind transport = TransportKind::kInProcess;
  uint64_t seed = 1;
};

// wall_time_ms is the mean per-party compute span for the role;
// outbound_bytes is the framed body bytes written by one party of the role
// (ordinal 0 among those active). rep < 0 marks a per-group mean row.
struct BenchRecord {
  Phase phase = Phase::kAggregation;
  protocol::Role role = protocol::Role::kUser;
  uint32_t n = 0;
  uint32_t k = 0;
  uint32_t d = 0;
  protocol::Mode mode = protocol::Mode::kSemiHonest;
  int rep = 0;
  double wall_time_ms = 0.0;
  uint64_t outbound_bytes = 0;
};

// Setup rows are produced for the in-process transport only. Throws
// kInvalidConfig when repetitions == 0.
std::vector<BenchRecord> RunBench(const BenchSpec& spec);

// Appends one mean row per (phase, role, n) group.
std::vector<BenchRecord> WithGroupMeans(const std::vector<BenchRecord>& rows);

// Header: phase,role,n,k,d,mode,rep,wall_time_ms,outbound_bytes
std::string FormatBenchCsv(const std::vector<BenchRecord>& rows);

}  // namespace seafl::harness
