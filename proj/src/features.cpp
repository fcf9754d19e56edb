#include "zzhd/features.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "zzhd/errors.hpp"
#include "zzhd/io.hpp"

namespace zzhd {

ClipMode parse_clip_mode(std::string_view name) {
  if (name == "clip") return ClipMode::clip;
  if (name == "recompute") return ClipMode::recompute;
  throw ConfigError("unknown clip mode '" + std::string(name) + "' (expected clip or recompute)");
}

std::string_view to_string(ClipMode mode) { return mode == ClipMode::clip ? "clip" : "recompute"; }

std::vector<Interval> clip_barcode(const Barcode& full, std::int64_t t0, std::int64_t t1) {
  if (t0 < 0 || t1 <= t0) throw ConfigError("clip_barcode: need 0 <= t0 < t1");
  if (full.n_snapshots > 0 && t1 > static_cast<std::int64_t>(full.n_snapshots) - 1) {
    throw ConfigError("clip_barcode: t1 beyond the last snapshot");
  }
  const HalfIndex lo = HalfIndex::at(t0);
  const HalfIndex hi = HalfIndex::at(t1);
  std::vector<Interval> out;
  for (const Interval& bar : full.intervals) {
    const HalfIndex b = std::max(bar.birth, lo);
    const HalfIndex d = std::min(bar.death, hi);
    if (b < d) out.push_back(Interval{bar.dim, b, d});
  }
  return out;
}

SubwindowBarcode clip_subwindow(const std::vector<Barcode>& full, const std::string& src_ip,
                                std::int64_t start, std::int64_t length) {
  SubwindowBarcode sub{src_ip, start, start + length, {}};
  for (const Barcode& b : full) {
    if (b.dim < 0 || b.dim > 1) continue;
    sub.dims[static_cast<std::size_t>(b.dim)] = clip_barcode(b, start, start + length);
  }
  return sub;
}

SubwindowBarcode recompute_subwindow(std::span<const SimplicialComplex> sequence, const std::string& src_ip,
                                     std::int64_t start, std::int64_t length) {
  if (start < 0 || length < 1 || static_cast<std::size_t>(start + length) >= sequence.size()) {
    throw ConfigError("recompute_subwindow: sub-window outside the sequence");
  }
  const auto local = zigzag_barcode(
      sequence.subspan(static_cast<std::size_t>(start), static_cast<std::size_t>(length) + 1), 1);
  SubwindowBarcode sub{src_ip, start, start + length, {}};
  const std::int64_t shift = 2 * start;
  for (const Barcode& b : local) {
    for (const Interval& bar : clip_barcode(b, 0, length)) {
      sub.dims[static_cast<std::size_t>(b.dim)].push_back(
          Interval{bar.dim, HalfIndex::from_doubled(bar.birth.doubled() + shift),
                   HalfIndex::from_doubled(bar.death.doubled() + shift)});
    }
  }
  return sub;
}

std::array<double, 4> acc_features(std::span<const RealInterval> intervals, double d_max) {
  std::array<double, 4> acc{};
  for (const RealInterval& bar : intervals) {
    const double b = bar.birth;
    const double d = bar.death;
    if (!(0.0 <= b && b <= d && d <= d_max)) {
      throw InvariantError("acc_features: interval [" + format_real(b) + ", " + format_real(d) +
                           "] outside [0, " + format_real(d_max) + "]");
    }
    const double len = d - b;
    const double len4 = len * len * len * len;
    const double tail = d_max - d;
    acc[0] += b * len;
    acc[1] += tail * len;
    acc[2] += b * b * len4;
    acc[3] += tail * tail * len4;
  }
  return acc;
}

AccVector acc_vector(const SubwindowBarcode& sub) {
  AccVector v;
  v.d_max = static_cast<double>(sub.sub_end_index - sub.sub_start_index);
  const double origin = static_cast<double>(sub.sub_start_index);
  for (std::size_t dim = 0; dim < 2; ++dim) {
    std::vector<RealInterval> shifted;
    shifted.reserve(sub.dims[dim].size());
    for (const Interval& bar : sub.dims[dim]) {
      if (bar.death.is_inf()) throw InvariantError("acc_vector: unclipped INF death");
      shifted.push_back(RealInterval{bar.birth.value() - origin, bar.death.value() - origin});
    }
    const auto acc = acc_features(shifted, v.d_max);
    std::copy(acc.begin(), acc.end(), v.values.begin() + static_cast<std::ptrdiff_t>(4 * dim));
  }
  return v;
}

std::vector<double> stats_vector(std::span<const HypergraphSnapshot> snapshots, std::size_t expected) {
  if (snapshots.size() != expected) {
    throw InvariantError("stats_vector: expected " + std::to_string(expected) + " snapshots, got " +
                         std::to_string(snapshots.size()));
  }
  std::vector<double> out;
  out.reserve(4 * expected);
  for (const HypergraphSnapshot& g : snapshots) {
    const SnapshotStats s = snapshot_stats(g);
    out.push_back(static_cast<double>(s.n_edges));
    out.push_back(static_cast<double>(s.n_vertices));
    out.push_back(static_cast<double>(s.n_components));
    out.push_back(static_cast<double>(s.diameter));
  }
  return out;
}

std::vector<std::int64_t> subwindow_starts(std::size_t n_snapshots, std::int64_t length, std::int64_t step) {
  if (length < 1 || step < 1) throw ConfigError("sub-window length and step must be >= 1");
  std::vector<std::int64_t> out;
  const auto last = static_cast<std::int64_t>(n_snapshots) - 1;
  for (std::int64_t s = 0; s + length <= last; s += step) out.push_back(s);
  return out;
}

std::string format_feature_csv(std::span<const FeatureRow> rows, char prefix, std::size_t dim) {
  std::string out = "src_ip,sub_start_iso";
  for (std::size_t k = 0; k < dim; ++k) out += "," + std::string(1, prefix) + std::to_string(k);
  out += "\n";
  for (const FeatureRow& row : rows) {
    if (row.values.size() != dim) throw InvariantError("feature row width mismatch");
    out += escape_csv_field(row.src_ip) + "," + format_iso8601(row.sub_start);
    for (double v : row.values) out += "," + format_real(v);
    out += "\n";
  }
  return out;
}

std::vector<FeatureRow> parse_feature_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  std::vector<FeatureRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (width == 0) {
      if (fields.size() < 3 || trim(fields[0]) != "src_ip" || trim(fields[1]) != "sub_start_iso") {
        throw DataError("feature file: bad header");
      }
      width = fields.size();
      continue;
    }
    const std::string where = "feature file line " + std::to_string(line_no);
    if (fields.size() != width) throw DataError(where + ": expected " + std::to_string(width) + " fields");
    FeatureRow row;
    row.src_ip = std::string(trim(fields[0]));
    const auto ts = parse_iso8601(fields[1]);
    if (!ts) throw DataError(where + ": bad timestamp");
    row.sub_start = *ts;
    for (std::size_t k = 2; k < fields.size(); ++k) {
      const std::string f(trim(fields[k]));
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v)) throw DataError(where + ": bad value");
      row.values.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (width == 0) throw DataError("feature file: missing header");
  return rows;
}

}  // namespace zzhd
