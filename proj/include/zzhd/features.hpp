#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zzhd/complex.hpp"
#include "zzhd/hypergraph.hpp"
#include "zzhd/zigzag.hpp"

namespace zzhd {

/// How sub-window barcodes are obtained from a full-run sequence.
enum class ClipMode {
  clip,       // cut the full-run barcode to the sub-window
  recompute,  // run zigzag on the sub-window's snapshots alone
};

ClipMode parse_clip_mode(std::string_view name);
std::string_view to_string(ClipMode mode);

/// Bars of `full` restricted to [t0, t1]. INF counts as t1; bars meeting the
/// range in at most one point are dropped. Throws ConfigError unless
/// 0 <= t0 < t1 (and t1 <= n-1 when the barcode records its length).
std::vector<Interval> clip_barcode(const Barcode& full, std::int64_t t0, std::int64_t t1);

/// Clipped bars of dimensions 0 and 1 for one sub-window [start, end].
struct SubwindowBarcode {
  std::string src_ip;
  std::int64_t sub_start_index = 0;
  std::int64_t sub_end_index = 0;
  std::array<std::vector<Interval>, 2> dims;
};

SubwindowBarcode clip_subwindow(const std::vector<Barcode>& full, const std::string& src_ip,
                                std::int64_t start, std::int64_t length);

/// Zigzag of sequence[start .. start+length] alone, shifted back to the full-run
/// index frame and clipped to the sub-window.
SubwindowBarcode recompute_subwindow(std::span<const SimplicialComplex> sequence, const std::string& src_ip,
                                     std::int64_t start, std::int64_t length);

struct RealInterval {
  double birth = 0;
  double death = 0;
};

/// The four coordinates
///   sum b(d-b), sum (dmax-d)(d-b), sum b^2 (d-b)^4, sum (dmax-d)^2 (d-b)^4.
/// Throws InvariantError unless 0 <= b <= d <= d_max for every bar.
std::array<double, 4> acc_features(std::span<const RealInterval> intervals, double d_max);

struct AccVector {
  std::array<double, 8> values{};
  double d_max = 0;
};

/// Shifts the sub-window to start at 0 and stacks D0 and D1 coordinates with
/// d_max = sub-window length.
AccVector acc_vector(const SubwindowBarcode& sub);

/// Concatenated (edges, vertices, components, diameter) per snapshot. Throws
/// InvariantError unless exactly `expected` snapshots are given.
std::vector<double> stats_vector(std::span<const HypergraphSnapshot> snapshots, std::size_t expected);

/// First snapshot index of every complete sub-window of `length` snapshot steps,
/// advancing by `step`: s = 0, step, ... while s + length <= n - 1.
std::vector<std::int64_t> subwindow_starts(std::size_t n_snapshots, std::int64_t length, std::int64_t step);

/// One row of a feature file.
struct FeatureRow {
  std::string src_ip;
  Timestamp sub_start = 0;
  std::vector<double> values;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// `src_ip,sub_start_iso,<prefix>0..<prefix>{dim-1}` with round-trip reals.
std::string format_feature_csv(std::span<const FeatureRow> rows, char prefix, std::size_t dim);

/// Throws DataError on a malformed file or inconsistent row width.
std::vector<FeatureRow> parse_feature_csv(std::string_view text);

}  // namespace zzhd
