#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "zzhd/complex.hpp"
#include "zzhd/hypergraph.hpp"

using namespace zzhd;

namespace {

HypergraphSnapshot make(std::initializer_list<std::pair<int, std::vector<std::string>>> edges) {
  HypergraphSnapshot g;
  for (const auto& [port, members] : edges) {
    for (const auto& m : members) g.add(port, m);
  }
  return g;
}

HypergraphSnapshot random_snapshot(std::mt19937_64& rng, int n_exec, int n_memberships) {
  HypergraphSnapshot g;
  std::uniform_int_distribution<int> port(1, 8);
  std::uniform_int_distribution<int> exe(0, n_exec - 1);
  for (int i = 0; i < n_memberships; ++i) g.add(port(rng), "e" + std::to_string(exe(rng)));
  return g;
}

// All-pairs shortest paths on the co-membership graph; largest component,
// ties broken towards the larger diameter.
std::pair<std::int64_t, std::int64_t> floyd_warshall(const HypergraphSnapshot& g) {
  const std::vector<std::string> names(g.vertices.begin(), g.vertices.end());
  const std::size_t n = names.size();
  const std::int64_t inf = 1 << 20;
  std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& [port, members] : g.edges) {
    for (const auto& a : members) {
      for (const auto& b : members) {
        const auto i = static_cast<std::size_t>(std::find(names.begin(), names.end(), a) - names.begin());
        const auto j = static_cast<std::size_t>(std::find(names.begin(), names.end(), b) - names.begin());
        if (i != j) d[i][j] = 1;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  std::int64_t best_size = 0, best_diam = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t size = 0, diam = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (d[i][j] < inf) {
        ++size;
        for (std::size_t k = 0; k < n; ++k) {
          if (d[i][k] < inf) diam = std::max(diam, d[j][k]);
        }
      }
    }
    if (size > best_size || (size == best_size && diam > best_diam)) {
      best_size = size;
      best_diam = diam;
    }
  }
  return {best_size, best_diam};
}

SimplicialComplex complex_of(const HypergraphSnapshot& g) {
  auto table = std::make_shared<const VertexTable>(std::vector<std::string>(g.vertices.begin(), g.vertices.end()));
  return associated_asc(g, 2, table);
}

}  // namespace

TEST_SUITE("hypergraph") {
  TEST_CASE("snapshot from one window and one IP") {
    WindowedRecords w{4, 1200,
                      {{1200, "10.0.0.1", 80, "powershell.exe"},
                       {1201, "10.0.0.1", 80, "chrome.exe"},
                       {1202, "10.0.0.2", 80, "curl.exe"},
                       {1203, "10.0.0.1", 443, "chrome.exe"},
                       {1204, "10.0.0.1", 80, "powershell.exe"}}};
    const auto g = build_snapshot(w, "10.0.0.1");
    CHECK(g.window_index == 4);
    CHECK(g.edges.size() == 2);
    CHECK(g.edges.at(80) == std::set<std::string>{"chrome.exe", "powershell.exe"});
    CHECK(g.edges.at(443) == std::set<std::string>{"chrome.exe"});
    CHECK(g.vertices == std::set<std::string>{"chrome.exe", "powershell.exe"});
    const auto all = build_snapshots(w);
    CHECK(all.size() == 2);
    CHECK(all.at("10.0.0.1") == g);
    CHECK(all.at("10.0.0.2").vertices == std::set<std::string>{"curl.exe"});
    CHECK(build_snapshot(w, "10.9.9.9").empty());
  }

  TEST_CASE("duplicate memberships collapse") {
    const auto g = make({{80, {"a", "a", "a"}}, {80, {"a"}}});
    CHECK(g.edges.size() == 1);
    CHECK(g.edges.at(80).size() == 1);
    CHECK(format_snapshot_csv(g) == "port,executable\n80,a\n");
  }

  TEST_CASE("summary statistics examples") {
    CHECK(snapshot_stats(HypergraphSnapshot{}) == SnapshotStats{0, 0, 0, 0});
    CHECK(snapshot_stats(make({{80, {"a", "b", "c"}}})) == SnapshotStats{1, 3, 1, 1});
    CHECK(snapshot_stats(make({{1, {"a", "b"}}, {2, {"b", "c"}}, {3, {"d", "e"}}})) == SnapshotStats{3, 5, 2, 2});
    CHECK(snapshot_stats(make({{1, {"a"}}, {2, {"b"}}})) == SnapshotStats{2, 2, 2, 0});
  }

  TEST_CASE("equal-size components report the larger diameter") {
    // Path a-b-c has diameter 2, triangle d,e,f has diameter 1.
    const auto g = make({{1, {"a", "b"}}, {2, {"b", "c"}}, {3, {"d", "e", "f"}}});
    CHECK(snapshot_stats(g).diameter == 2);
    const auto h = make({{3, {"d", "e", "f"}}, {1, {"x", "y"}}, {2, {"y", "z"}}});
    CHECK(snapshot_stats(h).diameter == 2);
  }

  TEST_CASE("components and diameter agree with independent computations") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const auto g = random_snapshot(rng, 9, std::uniform_int_distribution<int>(0, 14)(rng));
      const SnapshotStats s = snapshot_stats(g);
      CHECK(s.n_components == oracle::betti(complex_of(g), 0));
      CHECK(s.diameter == floyd_warshall(g).second);
      CHECK(s.n_vertices == static_cast<std::int64_t>(g.vertices.size()));
      CHECK(s.n_edges == static_cast<std::int64_t>(g.edges.size()));
    }
  }

  TEST_CASE("adding memberships never lowers the edge or vertex counts") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
      auto g = random_snapshot(rng, 6, 5);
      const auto before = snapshot_stats(g);
      g.add(std::uniform_int_distribution<int>(1, 10)(rng), "e" + std::to_string(rng() % 8));
      const auto after = snapshot_stats(g);
      CHECK(after.n_edges >= before.n_edges);
      CHECK(after.n_vertices >= before.n_vertices);
    }
  }

  TEST_CASE("record order does not change the snapshot") {
    std::mt19937_64 rng(9);
    WindowedRecords w{0, 0, {}};
    for (int i = 0; i < 60; ++i) {
      w.records.push_back({i, "ip" + std::to_string(rng() % 3), static_cast<int>(rng() % 6), "e" + std::to_string(rng() % 5)});
    }
    const auto reference = build_snapshots(w);
    for (int k = 0; k < 10; ++k) {
      std::shuffle(w.records.begin(), w.records.end(), rng);
      CHECK(build_snapshots(w) == reference);
    }
  }
}
