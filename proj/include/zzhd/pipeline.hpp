#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zzhd/autoencoder.hpp"
#include "zzhd/features.hpp"
#include "zzhd/ingest.hpp"

namespace zzhd {

struct PipelineConfig {
  std::vector<std::filesystem::path> inputs;
  /// Unset: inferred from each input's extension.
  std::optional<InputFormat> format;
  WindowSpec window;
  std::int64_t sub_stride = 3600;
  int max_dim = 2;
  int p_max = 1;
  std::size_t max_edge_size = kDefaultMaxEdgeSize;
  ClipMode clip_mode = ClipMode::clip;
  TrainConfig train;
  /// Empty: every IP not listed in test_ips.
  std::vector<std::string> train_ips;
  /// Empty: every IP.
  std::vector<std::string> test_ips;
  bool allow_ip_overlap = false;
  /// Host name -> source IPs seen on that host. Flow records carry no host field.
  std::map<std::string, std::vector<std::string>> hosts;
  /// One model pair per host instead of one pooled pair; needs `hosts`.
  bool per_host = false;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path output_dir = "zzhd_out";
  /// 0: hardware concurrency.
  std::size_t workers = 0;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Parses the JSON config. Keys: inputs, format, window{window_len, stride,
/// subwindow_len}, sub_stride, max_dim, p_max, max_edge_size, clip_mode,
/// train{seed, learning_rate, epochs, batch_size, optimizer, activation},
/// train_ips, test_ips, allow_ip_overlap, hosts{name: [ip, ...]}, per_host,
/// labels, output_dir, workers.
/// Unknown keys are a ConfigError.
PipelineConfig parse_pipeline_config(std::string_view json_text);

/// `ZZHD_WORKERS` if set, else `configured`, else the number of cores; at least 1.
std::size_t resolve_workers(std::size_t configured);

/// Runs fn(0..n-1) on up to `workers` threads. The first exception by index is
/// rethrown after all tasks finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Output layout under the output directory.
namespace layout {
inline const char* const kRejects = "rejects.csv";
inline const char* const kBarcodeDir = "barcodes";
inline const char* const kBarcodeIndex = "barcodes/index.csv";
inline const char* const kAccFeatures = "features_acc.csv";
inline const char* const kStatsFeatures = "features_stats.csv";
inline const char* const kAccModel = "models/acc.model";
inline const char* const kStatsModel = "models/stats.model";
inline const char* const kAccLoss = "models/acc_loss.csv";
inline const char* const kStatsLoss = "models/stats_loss.csv";
inline const char* const kLosses = "losses.csv";
inline const char* const kReportDir = "report";
inline const char* const kPercentiles = "report/percentiles.csv";
/// Per-host models live in models/hosts/<host>/ with the same file names.
inline const char* const kHostModelDir = "models/hosts";
}  // namespace layout

/// File-name-safe form of an IP (anything outside [A-Za-z0-9._-] becomes '_').
std::string ip_file_stem(std::string_view ip);

struct FeaturizeSummary {
  std::size_t records = 0;
  std::size_t rejected = 0;
  std::size_t ips = 0;
  std::size_t snapshots = 0;
  std::size_t rows = 0;
};

/// Reads and filters every input, then writes rejects, per-IP barcodes and both
/// feature files. `log` receives warnings.
FeaturizeSummary cmd_featurize(const PipelineConfig& cfg, std::ostream& log);

struct TrainSummary {
  std::size_t models = 0;
  std::size_t rows = 0;
  /// Row-weighted over the trained models.
  double acc_initial = 0, acc_final = 0;
  double stats_initial = 0, stats_final = 0;
};

/// Trains both autoencoders on the training IPs' rows, pooled or per host.
/// Throws DataError when no rows are selected.
TrainSummary cmd_train(const PipelineConfig& cfg, std::ostream& log);

/// Scores the test IPs' rows with both models into losses.csv. In per-host
/// mode each row uses its host's models; rows of unmapped IPs are skipped.
std::size_t cmd_score(const PipelineConfig& cfg, std::ostream& log);

/// Percentile table and SVG plots from losses.csv and optional labels.
void cmd_report(const PipelineConfig& cfg, std::ostream& log);

/// featurize, train, score, report.
void cmd_run(const PipelineConfig& cfg, std::ostream& log);

}  // namespace zzhd
