#include "zzhd/hypergraph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "zzhd/io.hpp"

namespace zzhd {

void HypergraphSnapshot::add(int port, const std::string& executable) {
  edges[port].insert(executable);
  vertices.insert(executable);
}

HypergraphSnapshot build_snapshot(const WindowedRecords& window, const std::string& src_ip) {
  HypergraphSnapshot g;
  g.window_index = window.window_index;
  g.src_ip = src_ip;
  for (const FlowRecord& r : window.records) {
    if (r.src_ip == src_ip) g.add(r.dst_port, r.image_path);
  }
  return g;
}

std::map<std::string, HypergraphSnapshot> build_snapshots(const WindowedRecords& window) {
  std::map<std::string, HypergraphSnapshot> out;
  for (const FlowRecord& r : window.records) {
    auto [it, inserted] = out.try_emplace(r.src_ip);
    if (inserted) {
      it->second.window_index = window.window_index;
      it->second.src_ip = r.src_ip;
    }
    it->second.add(r.dst_port, r.image_path);
  }
  return out;
}

SnapshotStats snapshot_stats(const HypergraphSnapshot& g) {
  SnapshotStats stats;
  stats.n_edges = static_cast<std::int64_t>(g.edges.size());
  stats.n_vertices = static_cast<std::int64_t>(g.vertices.size());
  if (g.vertices.empty()) return stats;

  // Index vertices and build the co-membership adjacency.
  std::map<std::string, std::size_t> index;
  for (const std::string& v : g.vertices) index.emplace(v, index.size());
  const std::size_t n = index.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [port, members] : g.edges) {
    std::vector<std::size_t> ids;
    for (const std::string& m : members) ids.push_back(index.at(m));
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        adj[ids[a]].push_back(ids[b]);
        adj[ids[b]].push_back(ids[a]);
      }
    }
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  auto bfs = [&](std::size_t src, std::vector<std::int64_t>& dist) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<std::size_t> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t w : adj[u]) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
  };

  std::vector<std::int64_t> component(n, -1);
  std::vector<std::int64_t> dist(n);
  std::int64_t best_size = 0;
  std::int64_t best_diameter = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (component[s] >= 0) continue;
    bfs(s, dist);
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < n; ++v) {
      if (dist[v] >= 0) {
        component[v] = stats.n_components;
        members.push_back(v);
      }
    }
    ++stats.n_components;
    // Eccentricity of every member; components are small.
    std::int64_t diameter = 0;
    for (std::size_t v : members) {
      bfs(v, dist);
      for (std::size_t w : members) diameter = std::max(diameter, dist[w]);
    }
    const auto size = static_cast<std::int64_t>(members.size());
    if (size > best_size || (size == best_size && diameter > best_diameter)) {
      best_size = size;
      best_diameter = diameter;
    }
  }
  stats.diameter = best_diameter;
  return stats;
}

std::string format_snapshot_csv(const HypergraphSnapshot& g) {
  std::string out = "port,executable\n";
  for (const auto& [port, members] : g.edges) {
    for (const std::string& m : members) out += std::to_string(port) + "," + escape_csv_field(m) + "\n";
  }
  return out;
}

}  // namespace zzhd
