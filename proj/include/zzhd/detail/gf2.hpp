#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <vector>

namespace zzhd::detail {

/// A sparse Z/2 column: strictly increasing row indices of the non-zero entries.
using Column = std::vector<std::uint32_t>;

/// target += source over Z/2 (symmetric difference of supports).
inline void add_into(Column& target, const Column& source) {
  Column out;
  out.reserve(target.size() + source.size());
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(out));
  target.swap(out);
}

inline bool contains(const Column& c, std::uint32_t row) {
  return std::binary_search(c.begin(), c.end(), row);
}

/// Largest row index; the column must be non-empty.
inline std::uint32_t pivot(const Column& c) { return c.back(); }

/// Rank of a set of columns by standard left-to-right reduction. Columns are
/// consumed.
inline std::size_t reduced_rank(std::vector<Column> columns) {
  std::vector<std::int64_t> owner;  // pivot row -> column index
  std::size_t rank = 0;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    Column& col = columns[j];
    while (!col.empty()) {
      const std::uint32_t p = pivot(col);
      if (p >= owner.size()) owner.resize(p + 1, -1);
      if (owner[p] < 0) {
        owner[p] = static_cast<std::int64_t>(j);
        ++rank;
        break;
      }
      add_into(col, columns[static_cast<std::size_t>(owner[p])]);
    }
  }
  return rank;
}

}  // namespace zzhd::detail
