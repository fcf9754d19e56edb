#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "zzhd/ingest.hpp"

namespace zzhd {

/// Hypergraph of one source IP inside one window: hyperedges are destination
/// ports, vertices are executables.
struct HypergraphSnapshot {
  std::int64_t window_index = 0;
  std::string src_ip;
  std::map<int, std::set<std::string>> edges;
  std::set<std::string> vertices;

  bool empty() const { return edges.empty(); }
  void add(int port, const std::string& executable);

  friend bool operator==(const HypergraphSnapshot&, const HypergraphSnapshot&) = default;
};

struct SnapshotStats {
  std::int64_t n_edges = 0;
  std::int64_t n_vertices = 0;
  std::int64_t n_components = 0;
  std::int64_t diameter = 0;

  friend bool operator==(const SnapshotStats&, const SnapshotStats&) = default;
};

HypergraphSnapshot build_snapshot(const WindowedRecords& window, const std::string& src_ip);

/// Snapshots for every source IP present in the window, keyed by IP.
std::map<std::string, HypergraphSnapshot> build_snapshots(const WindowedRecords& window);

/// Edge/vertex counts plus components and largest-component diameter of the
/// 1-skeleton (executables adjacent iff they share a port).
SnapshotStats snapshot_stats(const HypergraphSnapshot& g);

/// `port,executable` debug dump, one membership per row.
std::string format_snapshot_csv(const HypergraphSnapshot& g);

}  // namespace zzhd
