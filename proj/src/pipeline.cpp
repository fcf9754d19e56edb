#include "zzhd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "zzhd/complex.hpp"
#include "zzhd/errors.hpp"
#include "zzhd/hypergraph.hpp"
#include "zzhd/io.hpp"
#include "zzhd/report.hpp"
#include "zzhd/zigzag.hpp"

namespace zzhd {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
  window.validate();
  if (sub_stride <= 0 || sub_stride % window.stride != 0) {
    throw ConfigError("sub_stride must be a positive multiple of the stride");
  }
  if (p_max < 1) throw ConfigError("p_max must be >= 1 (features use dimensions 0 and 1)");
  if (max_dim < p_max + 1) throw ConfigError("max_dim must be at least p_max + 1");
  if (max_edge_size < 1) throw ConfigError("max_edge_size must be >= 1");
  train.validate();
  if (!allow_ip_overlap) {
    const std::set<std::string> test(test_ips.begin(), test_ips.end());
    for (const std::string& ip : train_ips) {
      if (test.count(ip)) throw ConfigError("IP " + ip + " is in both train_ips and test_ips");
    }
  }
  if (per_host && hosts.empty()) throw ConfigError("per_host needs a hosts map");
  std::map<std::string, std::string> owner;
  for (const auto& [host, ips] : hosts) {
    for (const std::string& ip : ips) {
      const auto [it, fresh] = owner.emplace(ip, host);
      if (!fresh && it->second != host) {
        throw ConfigError("IP " + ip + " is listed under hosts " + it->second + " and " + host);
      }
    }
  }
}

namespace {

using nlohmann::json;

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::vector<std::string> string_list(const json& j, const std::string& key) {
  if (j.is_string()) return {j.get<std::string>()};
  return get<std::vector<std::string>>(j, key);
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "inputs") {
      cfg.inputs.clear();
      for (const std::string& p : string_list(v, key)) cfg.inputs.emplace_back(p);
    } else if (key == "format") {
      cfg.format = parse_input_format(get<std::string>(v, key));
    } else if (key == "window") {
      if (!v.is_object()) throw ConfigError("config key 'window' must be an object");
      for (const auto& [wk, wv] : v.items()) {
        if (wk == "window_len") cfg.window.window_len = get<std::int64_t>(wv, wk);
        else if (wk == "stride") cfg.window.stride = get<std::int64_t>(wv, wk);
        else if (wk == "subwindow_len") cfg.window.subwindow_len = get<std::int64_t>(wv, wk);
        else throw ConfigError("unknown config key 'window." + wk + "'");
      }
    } else if (key == "sub_stride") {
      cfg.sub_stride = get<std::int64_t>(v, key);
    } else if (key == "max_dim") {
      cfg.max_dim = get<int>(v, key);
    } else if (key == "p_max") {
      cfg.p_max = get<int>(v, key);
    } else if (key == "max_edge_size") {
      cfg.max_edge_size = get<std::size_t>(v, key);
    } else if (key == "clip_mode") {
      cfg.clip_mode = parse_clip_mode(get<std::string>(v, key));
    } else if (key == "train") {
      if (!v.is_object()) throw ConfigError("config key 'train' must be an object");
      for (const auto& [tk, tv] : v.items()) {
        if (tk == "seed") cfg.train.seed = get<std::uint64_t>(tv, tk);
        else if (tk == "learning_rate") cfg.train.learning_rate = get<double>(tv, tk);
        else if (tk == "epochs") cfg.train.epochs = get<int>(tv, tk);
        else if (tk == "batch_size") cfg.train.batch_size = get<std::size_t>(tv, tk);
        else if (tk == "optimizer") cfg.train.optimizer = parse_optimizer(get<std::string>(tv, tk));
        else if (tk == "activation") cfg.train.activation = parse_activation(get<std::string>(tv, tk));
        else throw ConfigError("unknown config key 'train." + tk + "'");
      }
    } else if (key == "train_ips") {
      cfg.train_ips = string_list(v, key);
    } else if (key == "test_ips") {
      cfg.test_ips = string_list(v, key);
    } else if (key == "allow_ip_overlap") {
      cfg.allow_ip_overlap = get<bool>(v, key);
    } else if (key == "hosts") {
      if (!v.is_object()) throw ConfigError("config key 'hosts' must be an object");
      cfg.hosts.clear();
      for (const auto& [host, ips] : v.items()) cfg.hosts[host] = string_list(ips, "hosts." + host);
    } else if (key == "per_host") {
      cfg.per_host = get<bool>(v, key);
    } else if (key == "labels") {
      if (v.is_null()) cfg.labels.reset();
      else cfg.labels = fs::path(get<std::string>(v, key));
    } else if (key == "output_dir") {
      cfg.output_dir = get<std::string>(v, key);
    } else if (key == "workers") {
      cfg.workers = get<std::size_t>(v, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

std::size_t resolve_workers(std::size_t configured) {
  if (const char* env = std::getenv("ZZHD_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("ZZHD_WORKERS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  if (configured > 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), n);
  if (threads <= 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(drain);
    for (std::thread& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string ip_file_stem(std::string_view ip) {
  std::string out(ip);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

namespace {

ParseResult read_inputs(const PipelineConfig& cfg) {
  ParseResult all;
  for (const fs::path& p : cfg.inputs) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open input " + p.string());
    const InputFormat fmt = cfg.format ? *cfg.format : format_from_extension(p.string());
    ParseResult one;
    try {
      one = parse_flow_records(in, fmt);
    } catch (const ConfigError& e) {
      throw ConfigError(p.string() + ": " + e.what());
    }
    all.records.insert(all.records.end(), one.records.begin(), one.records.end());
    for (const auto& [reason, count] : one.rejects) all.rejects[reason] += count;
    all.lines += one.lines;
  }
  return all;
}

struct IpFeatures {
  std::string barcode_csv;
  std::vector<FeatureRow> acc;
  std::vector<FeatureRow> stats;
};

IpFeatures featurize_ip(const PipelineConfig& cfg, const std::string& ip,
                        const std::vector<HypergraphSnapshot>& snapshots,
                        const std::shared_ptr<const VertexTable>& table, Timestamp origin) {
  std::vector<SimplicialComplex> complexes;
  complexes.reserve(snapshots.size());
  for (const HypergraphSnapshot& g : snapshots) {
    complexes.push_back(associated_asc(g, cfg.max_dim, table, cfg.max_edge_size));
  }
  const auto barcodes = zigzag_barcode(complexes, cfg.p_max);
  IpFeatures out;
  out.barcode_csv = format_barcode_csv(barcodes);

  const std::int64_t length = cfg.window.windows_per_subwindow();
  const std::int64_t step = cfg.sub_stride / cfg.window.stride;
  for (std::int64_t s : subwindow_starts(snapshots.size(), length, step)) {
    const SubwindowBarcode sub = cfg.clip_mode == ClipMode::clip
                                     ? clip_subwindow(barcodes, ip, s, length)
                                     : recompute_subwindow(complexes, ip, s, length);
    const AccVector acc = acc_vector(sub);
    const Timestamp start = origin + s * cfg.window.stride;
    out.acc.push_back(FeatureRow{ip, start, std::vector<double>(acc.values.begin(), acc.values.end())});
    const std::span<const HypergraphSnapshot> block(snapshots.data() + s, static_cast<std::size_t>(length));
    out.stats.push_back(FeatureRow{ip, start, stats_vector(block, static_cast<std::size_t>(length))});
  }
  return out;
}

}  // namespace

FeaturizeSummary cmd_featurize(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.inputs.empty()) throw ConfigError("no inputs configured");
  const fs::path out = cfg.output_dir;
  const ParseResult parsed = read_inputs(cfg);
  write_text_file(out / layout::kRejects, format_reject_report(parsed));

  FeaturizeSummary summary;
  summary.records = parsed.records.size();
  summary.rejected = parsed.reject_total();

  std::error_code ec;
  fs::remove_all(out / layout::kBarcodeDir, ec);
  const std::size_t dim_acc = 8;
  const auto dim_stats = static_cast<std::size_t>(4 * cfg.window.windows_per_subwindow());

  if (parsed.records.empty()) {
    log << "warning: no records left after filtering; writing empty feature files\n";
    write_text_file(out / layout::kBarcodeIndex, "src_ip,file,n_snapshots,origin_iso\n");
    write_text_file(out / layout::kAccFeatures, format_feature_csv({}, 'f', dim_acc));
    write_text_file(out / layout::kStatsFeatures, format_feature_csv({}, 's', dim_stats));
    return summary;
  }

  const auto windows = window_records(parsed.records, cfg.window);
  const Timestamp origin = window_origin(parsed.records, cfg.window);
  summary.snapshots = windows.size();

  // Snapshot sequences per IP, empty where an IP is silent.
  std::map<std::string, std::vector<HypergraphSnapshot>> sequences;
  std::set<std::string> executables;
  for (const FlowRecord& r : parsed.records) {
    executables.insert(r.image_path);
    sequences.try_emplace(r.src_ip);
  }
  for (auto& [ip, seq] : sequences) {
    seq.resize(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
      seq[w].window_index = windows[w].window_index;
      seq[w].src_ip = ip;
    }
  }
  for (std::size_t w = 0; w < windows.size(); ++w) {
    for (auto& [ip, g] : build_snapshots(windows[w])) sequences.at(ip)[w] = std::move(g);
  }
  auto table = std::make_shared<const VertexTable>(std::vector<std::string>(executables.begin(), executables.end()));

  std::vector<const std::string*> ips;
  for (const auto& kv : sequences) ips.push_back(&kv.first);
  summary.ips = ips.size();
  std::vector<IpFeatures> results(ips.size());
  parallel_for(ips.size(), resolve_workers(cfg.workers), [&](std::size_t i) {
    results[i] = featurize_ip(cfg, *ips[i], sequences.at(*ips[i]), table, origin);
  });

  std::string index = "src_ip,file,n_snapshots,origin_iso\n";
  std::vector<FeatureRow> acc_rows;
  std::vector<FeatureRow> stats_rows;
  std::set<std::string> stems;
  for (std::size_t i = 0; i < ips.size(); ++i) {
    std::string stem = ip_file_stem(*ips[i]);
    while (!stems.insert(stem).second) stem += "_";
    const std::string file = stem + ".csv";
    write_text_file(out / layout::kBarcodeDir / file, results[i].barcode_csv);
    index += escape_csv_field(*ips[i]) + "," + file + "," + std::to_string(windows.size()) + "," +
             format_iso8601(origin) + "\n";
    acc_rows.insert(acc_rows.end(), results[i].acc.begin(), results[i].acc.end());
    stats_rows.insert(stats_rows.end(), results[i].stats.begin(), results[i].stats.end());
  }
  if (acc_rows.empty()) log << "warning: the run is shorter than one sub-window; no feature rows\n";
  summary.rows = acc_rows.size();
  write_text_file(out / layout::kBarcodeIndex, index);
  write_text_file(out / layout::kAccFeatures, format_feature_csv(acc_rows, 'f', dim_acc));
  write_text_file(out / layout::kStatsFeatures, format_feature_csv(stats_rows, 's', dim_stats));
  return summary;
}

namespace {

struct FeatureTables {
  std::vector<FeatureRow> acc;
  std::vector<FeatureRow> stats;
};

FeatureTables load_features(const fs::path& out) {
  FeatureTables t{parse_feature_csv(read_text_file(out / layout::kAccFeatures)),
                  parse_feature_csv(read_text_file(out / layout::kStatsFeatures))};
  if (t.acc.size() != t.stats.size()) throw DataError("ACC and stats feature files have different row counts");
  for (std::size_t i = 0; i < t.acc.size(); ++i) {
    if (t.acc[i].src_ip != t.stats[i].src_ip || t.acc[i].sub_start != t.stats[i].sub_start) {
      throw DataError("ACC and stats feature files disagree at row " + std::to_string(i + 1));
    }
  }
  return t;
}

std::vector<std::size_t> select_rows(const std::vector<FeatureRow>& rows, const std::set<std::string>& include,
                                     const std::set<std::string>& exclude) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool in = include.empty() ? !exclude.count(rows[i].src_ip) : include.count(rows[i].src_ip) > 0;
    if (in) out.push_back(i);
  }
  return out;
}

struct ModelFiles {
  fs::path acc_model, stats_model, acc_loss, stats_loss;
};

ModelFiles pooled_files(const fs::path& out) {
  return {out / layout::kAccModel, out / layout::kStatsModel, out / layout::kAccLoss, out / layout::kStatsLoss};
}

ModelFiles host_files(const fs::path& out, const std::string& host) {
  const fs::path dir = out / layout::kHostModelDir / ip_file_stem(host);
  return {dir / "acc.model", dir / "stats.model", dir / "acc_loss.csv", dir / "stats_loss.csv"};
}

TrainResult fit_one(const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& pick,
                    const TrainConfig& tc, const fs::path& model_path, const fs::path& loss_path) {
  Dataset data;
  for (std::size_t i : pick) data.push_back(rows[i].values);
  const Scaler scaler = fit_scaler(data);
  const std::size_t dim = data.front().size();
  TrainResult r = train(init_model(dim, tc.seed, tc.activation), scaler.apply(data), tc);
  write_text_file(model_path, serialize_model(ModelBundle{r.model, scaler, config_hash(tc, dim)}));
  write_text_file(loss_path, format_loss_history(r.loss_history));
  return r;
}

void fit_pair(const FeatureTables& t, const std::vector<std::size_t>& pick, const TrainConfig& tc,
              const ModelFiles& files, TrainSummary& s) {
  const TrainResult acc = fit_one(t.acc, pick, tc, files.acc_model, files.acc_loss);
  const TrainResult stats = fit_one(t.stats, pick, tc, files.stats_model, files.stats_loss);
  const auto w = static_cast<double>(pick.size());
  s.acc_initial += w * acc.initial_loss;
  s.acc_final += w * acc.final_loss;
  s.stats_initial += w * stats.initial_loss;
  s.stats_final += w * stats.final_loss;
  s.rows += pick.size();
  ++s.models;
}

struct LoadedPair {
  ModelBundle acc, stats;
};

LoadedPair load_pair(const ModelFiles& files, const FeatureTables& t) {
  LoadedPair p{deserialize_model(read_text_file(files.acc_model)), deserialize_model(read_text_file(files.stats_model))};
  if (!t.acc.empty() && (t.acc.front().values.size() != p.acc.model.input_dim ||
                         t.stats.front().values.size() != p.stats.model.input_dim)) {
    throw DataError("feature width does not match the trained model");
  }
  return p;
}

}  // namespace

TrainSummary cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  const FeatureTables t = load_features(out);
  const std::set<std::string> include(cfg.train_ips.begin(), cfg.train_ips.end());
  const std::set<std::string> exclude(cfg.test_ips.begin(), cfg.test_ips.end());
  const auto pick = select_rows(t.acc, include, exclude);
  if (pick.empty()) throw DataError("no feature rows for the training IPs");

  TrainSummary s;
  if (!cfg.per_host) {
    fit_pair(t, pick, cfg.train, pooled_files(out), s);
  } else {
    std::error_code ec;
    fs::remove_all(out / layout::kHostModelDir, ec);
    for (const auto& [host, ips] : cfg.hosts) {
      const std::set<std::string> mine(ips.begin(), ips.end());
      std::vector<std::size_t> host_pick;
      for (std::size_t i : pick) {
        if (mine.count(t.acc[i].src_ip)) host_pick.push_back(i);
      }
      if (host_pick.empty()) {
        log << "warning: host " << host << " has no training rows; no model written\n";
        continue;
      }
      fit_pair(t, host_pick, cfg.train, host_files(out, host), s);
    }
    if (s.models == 0) throw DataError("no host has training rows");
  }
  const auto w = static_cast<double>(s.rows);
  s.acc_initial /= w;
  s.acc_final /= w;
  s.stats_initial /= w;
  s.stats_final /= w;
  log << "trained " << s.models << " model pair(s) on " << s.rows << " sub-windows: acc loss "
      << format_real(s.acc_initial) << " -> " << format_real(s.acc_final) << ", stats loss "
      << format_real(s.stats_initial) << " -> " << format_real(s.stats_final) << "\n";
  return s;
}

std::size_t cmd_score(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  const FeatureTables t = load_features(out);
  const std::set<std::string> include(cfg.test_ips.begin(), cfg.test_ips.end());
  auto pick = select_rows(t.acc, include, {});

  // Model pair per scored row: the pooled one, or the row's host's.
  std::map<std::string, LoadedPair> models;
  std::map<std::string, std::string> host_of;
  if (!cfg.per_host) {
    models.emplace("", load_pair(pooled_files(out), t));
  } else {
    for (const auto& [host, ips] : cfg.hosts) {
      for (const std::string& ip : ips) host_of.emplace(ip, host);
    }
    std::set<std::string> skipped;
    std::vector<std::size_t> kept;
    for (std::size_t i : pick) {
      const std::string& ip = t.acc[i].src_ip;
      const auto h = host_of.find(ip);
      if (h != host_of.end() && !models.count(h->second)) {
        const ModelFiles files = host_files(out, h->second);
        if (fs::exists(files.acc_model)) models.emplace(h->second, load_pair(files, t));
      }
      if (h == host_of.end() || !models.count(h->second)) {
        if (skipped.insert(ip).second) log << "warning: no per-host model for " << ip << "; its rows are skipped\n";
        continue;
      }
      kept.push_back(i);
    }
    pick = std::move(kept);
  }
  if (pick.empty()) log << "warning: no feature rows for the test IPs\n";

  std::vector<LossRow> rows(pick.size());
  parallel_for(pick.size(), resolve_workers(cfg.workers), [&](std::size_t k) {
    const std::size_t i = pick[k];
    const LoadedPair& m = models.at(cfg.per_host ? host_of.at(t.acc[i].src_ip) : std::string());
    rows[k] = LossRow{t.acc[i].src_ip, t.acc[i].sub_start, loss(m.acc.model, m.acc.scaler.apply(t.acc[i].values)),
                      loss(m.stats.model, m.stats.scaler.apply(t.stats[i].values))};
  });
  write_text_file(out / layout::kLosses, format_losses_csv(rows));
  return rows.size();
}

void cmd_report(const PipelineConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  const std::vector<LossRow> rows = parse_losses_csv(read_text_file(out / layout::kLosses));
  std::vector<GroundTruthLabel> labels;
  if (cfg.labels) labels = parse_labels_csv(read_text_file(*cfg.labels));

  if (!rows.empty()) {
    Timestamp lo = rows.front().sub_start;
    Timestamp hi = lo;
    std::set<std::string> ips;
    for (const LossRow& r : rows) {
      lo = std::min(lo, r.sub_start);
      hi = std::max(hi, r.sub_start + cfg.window.subwindow_len);
      ips.insert(r.src_ip);
    }
    for (const GroundTruthLabel& l : labels) {
      if (ips.count(l.src_ip) && (l.end <= lo || l.start >= hi)) {
        log << "warning: label for " << l.src_ip << " [" << format_iso8601(l.start) << ", " << format_iso8601(l.end)
            << ") lies outside the scored range\n";
      }
    }
  }

  const auto table = percentile_table(rows, labels, cfg.window.subwindow_len);
  for (const PercentileRow& r : table) {
    if (r.count == 0 && (r.group != LossGroup::unlabeled) && !labels.empty()) {
      log << "warning: group " << to_string(r.group) << " has no " << r.vectorization << " losses\n";
    }
  }
  write_text_file(out / layout::kPercentiles, format_percentile_csv(table));

  std::set<std::string> ips;
  for (const LossRow& r : rows) ips.insert(r.src_ip);
  for (const std::string& ip : ips) {
    write_text_file(out / layout::kReportDir / ("loss_" + ip_file_stem(ip) + ".svg"),
                    render_loss_svg(ip, rows, labels, cfg.window.subwindow_len));
  }

  const fs::path index_path = out / layout::kBarcodeIndex;
  if (!fs::exists(index_path)) return;
  std::istringstream index(read_text_file(index_path));
  std::string line;
  std::getline(index, line);
  while (std::getline(index, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw DataError("bad barcode index row");
    if (!ips.count(f[0])) continue;
    const auto bars = parse_barcode_csv(read_text_file(out / layout::kBarcodeDir / f[1]));
    const auto n = static_cast<std::size_t>(std::stoull(f[2]));
    write_text_file(out / layout::kReportDir / ("barcode_" + ip_file_stem(f[0]) + ".svg"),
                    render_barcode_svg(f[0], bars, n));
  }
}

void cmd_run(const PipelineConfig& cfg, std::ostream& log) {
  cmd_featurize(cfg, log);
  cmd_train(cfg, log);
  cmd_score(cfg, log);
  cmd_report(cfg, log);
}

}  // namespace zzhd
