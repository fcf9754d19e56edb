#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zzhd/complex.hpp"
#include "zzhd/ingest.hpp"

namespace zzhd {

/// A position in the union-augmented sequence K_0, K_0∪K_1, K_1, ...: an integer
/// or half-integer snapshot index, stored doubled, or the distinguished infinity.
class HalfIndex {
 public:
  constexpr HalfIndex() = default;
  static constexpr HalfIndex from_doubled(std::int64_t doubled) { return HalfIndex(doubled); }
  static constexpr HalfIndex at(std::int64_t index) { return HalfIndex(2 * index); }
  static constexpr HalfIndex infinity() { return HalfIndex(kInf); }

  constexpr bool is_inf() const { return doubled_ == kInf; }
  constexpr std::int64_t doubled() const { return doubled_; }
  constexpr bool is_half() const { return !is_inf() && doubled_ % 2 != 0; }
  /// Real value; infinity maps to +inf.
  double value() const {
    return is_inf() ? std::numeric_limits<double>::infinity() : static_cast<double>(doubled_) / 2.0;
  }

  friend constexpr auto operator<=>(HalfIndex, HalfIndex) = default;

 private:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  constexpr explicit HalfIndex(std::int64_t d) : doubled_(d) {}
  std::int64_t doubled_ = 0;
};

/// "3", "1.5" or "inf".
std::string format_half_index(HalfIndex h);
std::optional<HalfIndex> parse_half_index(std::string_view text);

/// A bar [birth, death): the feature is present at every position p of the
/// augmented sequence with birth <= p < death.
struct Interval {
  int dim = 0;
  HalfIndex birth;
  HalfIndex death;

  bool covers(HalfIndex position) const { return birth <= position && position < death; }
  friend auto operator<=>(const Interval&, const Interval&) = default;
};

struct Barcode {
  int dim = 0;
  std::size_t n_snapshots = 0;
  std::vector<Interval> intervals;

  /// Number of bars covering a position.
  std::size_t multiplicity_at(HalfIndex position) const;
};

/// Zigzag persistence of K_0 ⊆ K_0∪K_1 ⊇ K_1 ⊆ ... ⊇ K_{n-1} for dimensions 0..p_max.
///
/// Events at the union between i and i+1 sit at i+½. When K_i ⊆ K_{i+1} the union
/// equals K_{i+1} and its events are reported at i+1, so a monotone sequence
/// yields the ordinary persistence barcode of the filtration. Bars alive in the
/// last complex die at infinity. Output is sorted by (dim, birth, death).
///
/// Throws ConfigError on an empty sequence, mixed max_dim, or max_dim < p_max + 1.
std::vector<Barcode> zigzag_barcode(std::span<const SimplicialComplex> sequence, int p_max);

/// origin + index * stride; infinity maps to the end of the last window.
Timestamp snapshot_index_to_time(HalfIndex index, const WindowSpec& spec, Timestamp origin,
                                 std::size_t n_snapshots);

/// `dim,birth,death` csv.
std::string format_barcode_csv(std::span<const Barcode> barcodes);

/// Reads the csv written by `format_barcode_csv`; throws DataError on bad rows.
std::vector<Interval> parse_barcode_csv(std::string_view text);

}  // namespace zzhd
