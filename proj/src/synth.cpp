#include "zzhd/synth.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <tuple>

#include <json.hpp>

#include "zzhd/errors.hpp"
#include "zzhd/io.hpp"

namespace zzhd {

namespace {

const std::vector<int> kBenignPorts = {445, 135, 53, 88, 389, 139, 80, 443};
const std::vector<int> kAttackPorts = {22, 3389, 5985, 4444, 8080, 1433, 3306, 5900, 21, 23, 25, 110, 8443, 9001};
const std::vector<std::string> kAttackExecutables = {
    "powershell.exe", "python.exe", "lsass.exe",  "cmd.exe",      "rundll32.exe", "wmic.exe",
    "net.exe",        "schtasks.exe", "certutil.exe", "mshta.exe", "regsvr32.exe", "bitsadmin.exe"};

struct Membership {
  int port;
  std::string executable;
};

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t role, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(role), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

template <class T>
std::vector<T> sample(std::mt19937_64& rng, const std::vector<T>& pool, std::size_t k) {
  std::vector<T> out;
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), k, rng);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Each executable on its own port, plus at most one port shared by several of
// them. Every hyperedge but one is a single vertex, so no subcomplex has a loop.
std::vector<Membership> benign_profile(std::mt19937_64& rng) {
  const auto n_exe = static_cast<std::size_t>(uniform_int(rng, 2, 3));
  const auto exes = sample(rng, benign_executables(), n_exe);
  const auto ports = sample(rng, kBenignPorts, n_exe + 1);
  std::vector<Membership> out;
  for (std::size_t i = 0; i < n_exe; ++i) out.push_back({ports[i], exes[i]});
  if (uniform_int(rng, 0, 1) == 1) {
    const auto shared = static_cast<std::size_t>(uniform_int(rng, 2, static_cast<std::int64_t>(n_exe)));
    for (std::size_t i = 0; i < shared; ++i) out.push_back({ports[n_exe], exes[i]});
  }
  return out;
}

void emit_benign(const ScenarioConfig& cfg, const std::string& ip, std::mt19937_64& rng,
                 std::vector<FlowRecord>& out) {
  const auto profile = benign_profile(rng);
  const std::int64_t period = uniform_int(rng, cfg.benign_period_min, cfg.benign_period_max);
  const std::int64_t jitter = period / 4;
  for (std::int64_t t = uniform_int(rng, 0, period - 1); t < cfg.duration;
       t += period + uniform_int(rng, -jitter, jitter)) {
    const Membership& m = profile[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(profile.size()) - 1))];
    out.push_back(FlowRecord{cfg.start_time + t, ip, m.port, m.executable});
  }
}

std::vector<std::string> attack_pool(int size) {
  std::vector<std::string> pool;
  for (int i = 0; i < size; ++i) {
    if (static_cast<std::size_t>(i) < kAttackExecutables.size()) {
      pool.push_back(kAttackExecutables[static_cast<std::size_t>(i)]);
    } else {
      pool.push_back("tool" + std::to_string(i) + ".exe");
    }
  }
  return pool;
}

void emit_attack(const ScenarioConfig& cfg, const std::string& ip, std::mt19937_64& rng,
                 std::vector<FlowRecord>& out) {
  const auto pool = attack_pool(cfg.attack_exec_pool);
  std::exponential_distribution<double> gap(cfg.attack_rate);
  for (const AttackWindow& w : cfg.attack_windows) {
    for (std::int64_t phase_start = w.start; phase_start < w.end;) {
      const std::int64_t phase_end = std::min(w.end, phase_start + uniform_int(rng, 120, 480));
      std::vector<Membership> memberships;
      const bool ring = pool.size() >= 3 && std::uniform_real_distribution<double>(0, 1)(rng) < cfg.cycle_prob;
      if (ring) {
        // port_i joins e_i and e_{i+1}: the 1-skeleton gains a cycle.
        const auto k = static_cast<std::size_t>(uniform_int(rng, 3, std::min<std::int64_t>(5, static_cast<std::int64_t>(pool.size()))));
        const auto exes = sample(rng, pool, k);
        const auto ports = sample(rng, kAttackPorts, k);
        for (std::size_t i = 0; i < k; ++i) {
          memberships.push_back({ports[i], exes[i]});
          memberships.push_back({ports[i], exes[(i + 1) % k]});
        }
      } else {
        const auto k = static_cast<std::size_t>(uniform_int(rng, 2, std::min<std::int64_t>(6, static_cast<std::int64_t>(pool.size()))));
        const auto exes = sample(rng, pool, k);
        const auto ports = sample(rng, kAttackPorts, static_cast<std::size_t>(uniform_int(rng, 2, 4)));
        for (const std::string& e : exes) {
          memberships.push_back({ports[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(ports.size()) - 1))], e});
        }
        for (int extra = 0; extra < 2; ++extra) {
          memberships.push_back({ports[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(ports.size()) - 1))],
                                 exes[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(k) - 1))]});
        }
      }
      for (double t = static_cast<double>(phase_start) + gap(rng); t < static_cast<double>(phase_end); t += gap(rng)) {
        const Membership& m =
            memberships[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(memberships.size()) - 1))];
        out.push_back(FlowRecord{cfg.start_time + static_cast<std::int64_t>(t), ip, m.port, m.executable});
      }
      phase_start = phase_end;
    }
  }
}

}  // namespace

const std::vector<std::string>& benign_executables() {
  static const std::vector<std::string> names = {"System", "svchost.exe", "services.exe"};
  return names;
}

void ScenarioConfig::validate() const {
  if (duration <= 0) throw ConfigError("scenario duration must be > 0");
  if (benign_period_min < 80 || benign_period_max < benign_period_min) {
    throw ConfigError("benign periods need 80 <= min <= max");
  }
  if (!(attack_rate > 0)) throw ConfigError("attack_rate must be > 0");
  if (attack_exec_pool < 2) throw ConfigError("attack_exec_pool must be >= 2");
  if (!(cycle_prob >= 0 && cycle_prob <= 1)) throw ConfigError("cycle_prob must lie in [0, 1]");
  for (const AttackWindow& w : attack_windows) {
    if (w.start < 0 || w.end > duration || w.end <= w.start) {
      throw ConfigError("attack window outside the scenario duration");
    }
  }
  std::set<std::string> seen;
  for (const auto* list : {&benign_ips, &malicious_ips}) {
    for (const std::string& ip : *list) {
      if (ip.empty() || is_localhost(ip)) throw ConfigError("scenario IP '" + ip + "' is empty or loopback");
      if (!seen.insert(ip).second) throw ConfigError("scenario IP '" + ip + "' listed twice");
    }
  }
}

ScenarioConfig parse_scenario_config(std::string_view json_text) {
  ScenarioConfig cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "start_time") {
        if (value.is_string()) {
          const auto t = parse_iso8601(value.get<std::string>());
          if (!t) throw ConfigError("scenario config: bad start_time");
          cfg.start_time = *t;
        } else {
          cfg.start_time = value.get<Timestamp>();
        }
      } else if (key == "duration") {
        cfg.duration = value.get<std::int64_t>();
      } else if (key == "benign_ips") {
        cfg.benign_ips = value.get<std::vector<std::string>>();
      } else if (key == "malicious_ips") {
        cfg.malicious_ips = value.get<std::vector<std::string>>();
      } else if (key == "benign_period_min") {
        cfg.benign_period_min = value.get<std::int64_t>();
      } else if (key == "benign_period_max") {
        cfg.benign_period_max = value.get<std::int64_t>();
      } else if (key == "attack_windows") {
        for (const auto& w : value) {
          if (w.is_array() && w.size() == 2) {
            cfg.attack_windows.push_back({w[0].get<std::int64_t>(), w[1].get<std::int64_t>()});
          } else {
            cfg.attack_windows.push_back({w.at("start").get<std::int64_t>(), w.at("end").get<std::int64_t>()});
          }
        }
      } else if (key == "attack_exec_pool") {
        cfg.attack_exec_pool = value.get<int>();
      } else if (key == "attack_rate") {
        cfg.attack_rate = value.get<double>();
      } else if (key == "cycle_prob") {
        cfg.cycle_prob = value.get<double>();
      } else {
        throw ConfigError("scenario config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<FlowRecord> generate(const ScenarioConfig& cfg) {
  cfg.validate();
  std::vector<FlowRecord> out;
  for (std::size_t i = 0; i < cfg.benign_ips.size(); ++i) {
    auto rng = stream(cfg.seed, 1, i);
    emit_benign(cfg, cfg.benign_ips[i], rng, out);
  }
  for (std::size_t i = 0; i < cfg.malicious_ips.size(); ++i) {
    auto rng = stream(cfg.seed, 2, i);
    emit_benign(cfg, cfg.malicious_ips[i], rng, out);
    auto attack_rng = stream(cfg.seed, 3, i);
    emit_attack(cfg, cfg.malicious_ips[i], attack_rng, out);
  }
  std::sort(out.begin(), out.end(), [](const FlowRecord& a, const FlowRecord& b) {
    return std::tie(a.timestamp, a.src_ip, a.dst_port, a.image_path) <
           std::tie(b.timestamp, b.src_ip, b.dst_port, b.image_path);
  });
  return out;
}

std::vector<GroundTruthLabel> scenario_labels(const ScenarioConfig& cfg) {
  std::vector<GroundTruthLabel> out;
  for (const std::string& ip : cfg.benign_ips) {
    out.push_back({ip, cfg.start_time, cfg.start_time + cfg.duration, "benign"});
  }
  for (const std::string& ip : cfg.malicious_ips) {
    for (const AttackWindow& w : cfg.attack_windows) {
      out.push_back({ip, cfg.start_time + w.start, cfg.start_time + w.end, "malicious"});
    }
  }
  return out;
}

std::string format_flow_csv(const std::vector<FlowRecord>& records) {
  std::string out = "timestamp,src_ip,dst_port,image_path\n";
  for (const FlowRecord& r : records) {
    out += format_iso8601(r.timestamp) + "," + escape_csv_field(r.src_ip) + "," + std::to_string(r.dst_port) +
           "," + escape_csv_field(r.image_path) + "\n";
  }
  return out;
}

std::string format_flow_jsonl(const std::vector<FlowRecord>& records) {
  std::string out;
  for (const FlowRecord& r : records) {
    nlohmann::ordered_json j;
    j["timestamp"] = r.timestamp;
    j["src_ip"] = r.src_ip;
    j["dst_port"] = r.dst_port;
    j["image_path"] = r.image_path;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace zzhd
