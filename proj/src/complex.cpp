#include "zzhd/complex.hpp"

#include <algorithm>
#include <map>

#include "zzhd/detail/gf2.hpp"
#include "zzhd/errors.hpp"

namespace zzhd {

VertexTable::VertexTable(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  for (const std::string& n : names) intern(n);
}

VertexId VertexTable::intern(const std::string& name) {
  auto [it, inserted] = ids_.try_emplace(name, static_cast<VertexId>(names_.size()));
  if (inserted) names_.push_back(name);
  return it->second;
}

std::optional<VertexId> VertexTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

VertexId VertexTable::id(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw DataError("executable '" + std::string(name) + "' missing from the vertex table");
}

Simplex::Simplex(std::vector<VertexId> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw InvariantError("simplex must be non-empty");
  std::sort(vertices_.begin(), vertices_.end());
  if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end()) {
    throw InvariantError("simplex has a repeated vertex");
  }
}

std::vector<Simplex> Simplex::facets() const {
  std::vector<Simplex> out;
  if (vertices_.size() < 2) return out;
  out.reserve(vertices_.size());
  for (std::size_t drop = 0; drop < vertices_.size(); ++drop) {
    std::vector<VertexId> f;
    f.reserve(vertices_.size() - 1);
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      if (i != drop) f.push_back(vertices_[i]);
    }
    out.push_back(Simplex(Unchecked{}, std::move(f)));
  }
  return out;
}

SimplicialComplex::SimplicialComplex(int max_dim, std::shared_ptr<const VertexTable> labels)
    : max_dim_(max_dim), labels_(std::move(labels)) {
  if (max_dim_ < 0) throw ConfigError("max_dim must be >= 0");
}

SimplicialComplex SimplicialComplex::from_maximal(const std::vector<std::vector<VertexId>>& faces,
                                                  int max_dim,
                                                  std::shared_ptr<const VertexTable> labels) {
  SimplicialComplex k(max_dim, std::move(labels));
  for (const auto& f : faces) k.add_closure(f, std::max<std::size_t>(f.size(), kDefaultMaxEdgeSize));
  return k;
}

void SimplicialComplex::add_closure(std::span<const VertexId> vertices, std::size_t max_edge_size) {
  std::vector<VertexId> vs(vertices.begin(), vertices.end());
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  if (vs.size() > max_edge_size) {
    throw DataError("hyperedge with " + std::to_string(vs.size()) + " vertices exceeds the cap of " +
                    std::to_string(max_edge_size));
  }
  const std::size_t top = std::min<std::size_t>(vs.size(), static_cast<std::size_t>(max_dim_) + 1);
  // Enumerate k-subsets in lexicographic order for k = 1..top.
  for (std::size_t k = 1; k <= top; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<VertexId> s(k);
      for (std::size_t i = 0; i < k; ++i) s[i] = vs[idx[i]];
      simplices_.insert(Simplex(std::move(s)));
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == vs.size() - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

std::size_t SimplicialComplex::count(int dim) const {
  return static_cast<std::size_t>(std::count_if(simplices_.begin(), simplices_.end(),
                                                [dim](const Simplex& s) { return s.dim() == dim; }));
}

bool SimplicialComplex::is_face_closed() const {
  for (const Simplex& s : simplices_) {
    if (s.dim() > max_dim_) return false;
    for (const Simplex& f : s.facets()) {
      if (!contains(f)) return false;
    }
  }
  return true;
}

SimplicialComplex associated_asc(const HypergraphSnapshot& g, int max_dim,
                                 std::shared_ptr<const VertexTable> table, std::size_t max_edge_size) {
  if (!table) throw ConfigError("associated_asc requires a vertex table");
  SimplicialComplex k(max_dim, table);
  for (const auto& [port, members] : g.edges) {
    std::vector<VertexId> ids;
    ids.reserve(members.size());
    for (const std::string& m : members) ids.push_back(table->id(m));
    k.add_closure(ids, max_edge_size);
  }
  return k;
}

std::vector<std::int64_t> betti_numbers(const SimplicialComplex& k, int p_max) {
  if (p_max > k.max_dim()) throw ConfigError("betti_numbers: p_max exceeds the complex max_dim");
  const int top = std::min(p_max + 1, k.max_dim());

  // Per-dimension indexing of simplices.
  std::vector<std::map<Simplex, std::uint32_t>> index(static_cast<std::size_t>(top) + 1);
  for (const Simplex& s : k.simplices()) {
    if (s.dim() <= top) {
      auto& m = index[static_cast<std::size_t>(s.dim())];
      m.emplace(s, static_cast<std::uint32_t>(m.size()));
    }
  }
  // rank[p] = rank of the boundary map from p-chains to (p-1)-chains.
  std::vector<std::size_t> rank(static_cast<std::size_t>(top) + 2, 0);
  for (int p = 1; p <= top; ++p) {
    std::vector<detail::Column> cols;
    for (const auto& [s, i] : index[static_cast<std::size_t>(p)]) {
      detail::Column c;
      for (const Simplex& f : s.facets()) c.push_back(index[static_cast<std::size_t>(p - 1)].at(f));
      std::sort(c.begin(), c.end());
      cols.push_back(std::move(c));
    }
    rank[static_cast<std::size_t>(p)] = detail::reduced_rank(std::move(cols));
  }
  std::vector<std::int64_t> betti;
  for (int p = 0; p <= p_max; ++p) {
    const auto n = static_cast<std::int64_t>(index[static_cast<std::size_t>(p)].size());
    betti.push_back(n - static_cast<std::int64_t>(rank[static_cast<std::size_t>(p)]) -
                    static_cast<std::int64_t>(rank[static_cast<std::size_t>(p) + 1]));
  }
  return betti;
}

SimplicialComplex complex_union(const SimplicialComplex& a, const SimplicialComplex& b) {
  if (a.max_dim() != b.max_dim()) throw ConfigError("union of complexes with different max_dim");
  if (a.vertex_labels() && b.vertex_labels() && a.vertex_labels() != b.vertex_labels()) {
    throw ConfigError("union of complexes with different vertex tables");
  }
  SimplicialComplex out(a.max_dim(), a.vertex_labels() ? a.vertex_labels() : b.vertex_labels());
  // Both inputs are face-closed, so the union is too.
  out.simplices_ = a.simplices_;
  out.simplices_.insert(b.simplices_.begin(), b.simplices_.end());
  return out;
}

std::string format_complex(const SimplicialComplex& k) {
  std::string out;
  for (const Simplex& s : k.simplices()) {
    for (std::size_t i = 0; i < s.vertices().size(); ++i) {
      if (i) out.push_back('\t');
      out += std::to_string(s.vertices()[i]);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace zzhd
