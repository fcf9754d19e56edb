#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "zzhd/ingest.hpp"
#include "zzhd/report.hpp"

namespace zzhd {

/// Attack interval, in seconds from the scenario start.
struct AttackWindow {
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  Timestamp start_time = 1569888000;  // 2019-10-01T00:00:00Z
  std::int64_t duration = 12 * 3600;
  std::vector<std::string> benign_ips;
  std::vector<std::string> malicious_ips;
  std::int64_t benign_period_min = 120;
  std::int64_t benign_period_max = 300;
  std::vector<AttackWindow> attack_windows;
  int attack_exec_pool = 8;
  double attack_rate = 0.5;
  /// Chance that an attack phase wires its executables into a ring of ports.
  double cycle_prob = 0.5;

  /// Throws ConfigError on windows outside [0, duration], non-positive rates,
  /// or overlapping IP lists.
  void validate() const;
};

/// Reads a JSON object whose keys mirror the struct fields; missing keys keep
/// their defaults. Throws ConfigError.
ScenarioConfig parse_scenario_config(std::string_view json_text);

/// Executables benign hosts draw from.
const std::vector<std::string>& benign_executables();

/// Records sorted by (timestamp, src_ip, dst_port, image_path). Every IP runs a
/// benign profile: one periodic process over 2-3 executables on fixed ports
/// with at most one port shared, so its hypergraphs never contain a loop.
/// Malicious IPs add Poisson bursts in attack windows over a pool of attack
/// executables and ports.
std::vector<FlowRecord> generate(const ScenarioConfig& cfg);

/// A malicious label per (malicious IP, attack window) and one benign label
/// spanning the whole run for every benign IP.
std::vector<GroundTruthLabel> scenario_labels(const ScenarioConfig& cfg);

/// csv in the ingest schema with ISO timestamps.
std::string format_flow_csv(const std::vector<FlowRecord>& records);

/// jsonl in the ingest schema with epoch-second timestamps.
std::string format_flow_jsonl(const std::vector<FlowRecord>& records);

}  // namespace zzhd
