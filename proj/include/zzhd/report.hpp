#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zzhd/io.hpp"
#include "zzhd/zigzag.hpp"

namespace zzhd {

/// Ground-truth interval for one source IP; `label` is "benign" or "malicious".
struct GroundTruthLabel {
  std::string src_ip;
  Timestamp start = 0;
  Timestamp end = 0;
  std::string label;

  friend bool operator==(const GroundTruthLabel&, const GroundTruthLabel&) = default;
};

/// `src_ip,start_iso,end_iso,label`
std::string format_labels_csv(std::span<const GroundTruthLabel> labels);
/// Throws DataError on malformed rows, end <= start, or an unknown label.
std::vector<GroundTruthLabel> parse_labels_csv(std::string_view text);

struct LossRow {
  std::string src_ip;
  Timestamp sub_start = 0;
  double mse_acc = 0;
  double mse_stats = 0;

  friend bool operator==(const LossRow&, const LossRow&) = default;
};

/// `src_ip,sub_start_iso,mse_acc,mse_stats`
std::string format_losses_csv(std::span<const LossRow> rows);
std::vector<LossRow> parse_losses_csv(std::string_view text);

/// Nearest-rank percentile: sorted[ceil(p/100 * n) - 1]; nullopt for no values.
std::optional<double> percentile(std::vector<double> values, double p);

enum class LossGroup { benign, malicious, unlabeled };
std::string_view to_string(LossGroup g);

/// Malicious if [start, end) strictly overlaps a malicious label of the same IP,
/// else benign if it overlaps a benign one, else unlabeled.
LossGroup classify(const std::string& src_ip, Timestamp start, Timestamp end,
                   std::span<const GroundTruthLabel> labels);

struct PercentileRow {
  LossGroup group = LossGroup::unlabeled;
  std::string vectorization;  // "acc" or "stats"
  std::size_t count = 0;
  std::optional<double> p25, p50, p75;
};

/// One row per (group, vectorization); each row's sub-window spans
/// [sub_start, sub_start + subwindow_len).
std::vector<PercentileRow> percentile_table(std::span<const LossRow> rows, std::span<const GroundTruthLabel> labels,
                                            std::int64_t subwindow_len);

/// `group,vectorization,count,p25,p50,p75`; empty groups get empty cells.
std::string format_percentile_csv(std::span<const PercentileRow> table);

/// Loss-vs-time line plot for one IP, labeled intervals shaded.
std::string render_loss_svg(const std::string& src_ip, std::span<const LossRow> rows,
                            std::span<const GroundTruthLabel> labels, std::int64_t subwindow_len);

/// Horizontal bars per dimension, x axis in snapshot indices.
std::string render_barcode_svg(const std::string& src_ip, std::span<const Interval> bars, std::size_t n_snapshots);

}  // namespace zzhd
