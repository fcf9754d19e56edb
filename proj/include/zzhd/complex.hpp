#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zzhd/hypergraph.hpp"

namespace zzhd {

using VertexId = std::uint32_t;

/// Run-wide interning of executable names to vertex ids.
///
/// Populate it during a single-writer phase, then share it read-only
/// (`std::shared_ptr<const VertexTable>`) with every complex of the run.
class VertexTable {
 public:
  VertexTable() = default;
  /// Interns the sorted, de-duplicated names so ids are stable for a given name set.
  explicit VertexTable(std::vector<std::string> names);

  VertexId intern(const std::string& name);
  std::optional<VertexId> find(std::string_view name) const;
  /// Throws DataError for an unknown name.
  VertexId id(std::string_view name) const;
  const std::string& label(VertexId id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, VertexId> ids_;
};

/// A non-empty, strictly increasing list of vertex ids.
class Simplex {
 public:
  /// Sorts the vertices; throws InvariantError on an empty list or duplicates.
  explicit Simplex(std::vector<VertexId> vertices);
  Simplex(std::initializer_list<VertexId> vertices) : Simplex(std::vector<VertexId>(vertices)) {}

  int dim() const { return static_cast<int>(vertices_.size()) - 1; }
  const std::vector<VertexId>& vertices() const { return vertices_; }

  /// Codimension-1 faces, in the order obtained by dropping vertex 0, 1, ...
  std::vector<Simplex> facets() const;

  /// Orders by dimension, then lexicographically by vertex ids.
  friend bool operator<(const Simplex& a, const Simplex& b) {
    if (a.vertices_.size() != b.vertices_.size()) return a.vertices_.size() < b.vertices_.size();
    return a.vertices_ < b.vertices_;
  }
  friend bool operator==(const Simplex&, const Simplex&) = default;

 private:
  struct Unchecked {};
  Simplex(Unchecked, std::vector<VertexId> vertices) : vertices_(std::move(vertices)) {}

  std::vector<VertexId> vertices_;
};

/// Default bound on the number of vertices in a single hyperedge.
inline constexpr std::size_t kDefaultMaxEdgeSize = 64;

/// Face-closed set of simplices of dimension at most `max_dim`.
class SimplicialComplex {
 public:
  explicit SimplicialComplex(int max_dim = 2, std::shared_ptr<const VertexTable> labels = nullptr);

  /// Closure of the given vertex sets, truncated to `max_dim`.
  static SimplicialComplex from_maximal(const std::vector<std::vector<VertexId>>& faces, int max_dim,
                                        std::shared_ptr<const VertexTable> labels = nullptr);

  /// Adds every non-empty subset of `vertices` with at most max_dim + 1 elements.
  /// Throws DataError when the set is larger than `max_edge_size`.
  void add_closure(std::span<const VertexId> vertices, std::size_t max_edge_size = kDefaultMaxEdgeSize);

  int max_dim() const { return max_dim_; }
  const std::set<Simplex>& simplices() const { return simplices_; }
  bool contains(const Simplex& s) const { return simplices_.count(s) != 0; }
  std::size_t size() const { return simplices_.size(); }
  bool empty() const { return simplices_.empty(); }
  std::size_t count(int dim) const;
  const std::shared_ptr<const VertexTable>& vertex_labels() const { return labels_; }

  /// Direct check of face closure and the dimension bound.
  bool is_face_closed() const;

  friend bool operator==(const SimplicialComplex& a, const SimplicialComplex& b) {
    return a.max_dim_ == b.max_dim_ && a.simplices_ == b.simplices_;
  }

 private:
  friend SimplicialComplex complex_union(const SimplicialComplex& a, const SimplicialComplex& b);

  int max_dim_;
  std::shared_ptr<const VertexTable> labels_;
  std::set<Simplex> simplices_;
};

/// All subsets of all hyperedges, up to `max_dim`, with ids from `table`.
SimplicialComplex associated_asc(const HypergraphSnapshot& g, int max_dim,
                                 std::shared_ptr<const VertexTable> table,
                                 std::size_t max_edge_size = kDefaultMaxEdgeSize);

/// Betti numbers over Z/2 for dimensions 0..p_max via boundary-matrix reduction.
std::vector<std::int64_t> betti_numbers(const SimplicialComplex& k, int p_max);

/// Set union. Both complexes must share max_dim (ConfigError otherwise) and,
/// when both carry one, the same vertex table.
SimplicialComplex complex_union(const SimplicialComplex& a, const SimplicialComplex& b);

/// One simplex per line, vertex ids tab-separated, in (dim, lex) order.
std::string format_complex(const SimplicialComplex& k);

}  // namespace zzhd
