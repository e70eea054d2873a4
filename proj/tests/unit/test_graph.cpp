#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "botdet/graph.hpp"
#include "botdet/rng.hpp"

using namespace botdet;

namespace {

EdgeListLoadResult load_text(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in, "test");
}

// Union-find oracle for component sizes.
struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::uint32_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0u);
  }
  std::uint32_t find(std::uint32_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

}  // namespace

TEST_CASE("load_edge_list: repeated edge collapses") {
  const auto result = load_text("a b\nb c\na b\n");
  CHECK(result.graph.node_count() == 3);
  CHECK(result.graph.edge_count() == 2);
  CHECK(result.duplicate_records == 1);
}

TEST_CASE("load_edge_list: weight applies in both directions") {
  const auto result = load_text("a b 2.5\n");
  const auto a = *result.ids.find("a");
  const auto b = *result.ids.find("b");
  CHECK(result.graph.edge_weights(a)[0] == 2.5);
  CHECK(result.graph.edge_weights(b)[0] == 2.5);
  CHECK(result.graph.neighbors(a)[0] == b);
}

TEST_CASE("load_edge_list: self-loop is skipped and counted") {
  const auto result = load_text("a b\nb c\nx x\nc d\nd a\n");
  CHECK(result.graph.edge_count() == 4);
  CHECK(result.self_loops_skipped == 1);
  CHECK(!result.ids.find("x").has_value());
}

TEST_CASE("load_edge_list: comma separation auto-detected, comments skipped") {
  const auto result = load_text("# friends\na, b, 1.5\nb, c\n\n");
  CHECK(result.graph.node_count() == 3);
  CHECK(result.graph.edge_count() == 2);
  const auto a = *result.ids.find("a");
  CHECK(result.graph.edge_weights(a)[0] == 1.5);
}

TEST_CASE("load_edge_list: error cases carry line numbers") {
  CHECK_THROWS_WITH_AS(load_text("a b\nc\n"),
                       doctest::Contains("test:2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_text("a b 0\n"),
                       doctest::Contains("nonpositive"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_text("a b -2\n"),
                       doctest::Contains("nonpositive"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_text("a b x\n"),
                       doctest::Contains("malformed weight"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_text("a b 1\nb a 2\n"),
                       doctest::Contains("conflicting"), std::runtime_error);
}

TEST_CASE("graph: adjacency is symmetric and sorted, membership matches scan") {
  Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.next_below(40));
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
    for (std::uint32_t u = 0; u < n; ++u)
      for (std::uint32_t v = u + 1; v < n; ++v)
        if (rng.next_bernoulli(0.15)) edges.emplace_back(u, v, 1.0 + rng.next_double());
    const Graph g = Graph::from_edges(n, edges);

    for (std::uint32_t v = 0; v < n; ++v) {
      const auto nbrs = g.neighbors(v);
      CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        // symmetric with equal weight
        const auto back = g.neighbors(nbrs[i]);
        const auto it = std::find(back.begin(), back.end(), v);
        CHECK(it != back.end());
        CHECK(g.edge_weights(nbrs[i])[it - back.begin()] == g.edge_weights(v)[i]);
      }
    }
    for (std::uint32_t u = 0; u < n; ++u)
      for (std::uint32_t v = 0; v < n; ++v) {
        const auto nbrs = g.neighbors(u);
        const bool scan = std::find(nbrs.begin(), nbrs.end(), v) != nbrs.end();
        CHECK(g.has_edge(u, v) == scan);
      }
  }
}

TEST_CASE("write_edge_list round-trip preserves adjacency and weights") {
  Rng rng(2024);
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  const std::uint32_t n = 30;
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v)
      if (rng.next_bernoulli(0.2)) edges.emplace_back(u, v, rng.next_double() + 0.1);
  const Graph g = Graph::from_edges(n, edges);
  NodeIdMap ids;
  for (std::uint32_t v = 0; v < n; ++v) ids.add("node-" + std::to_string(v));

  std::stringstream buffer;
  write_edge_list(g, ids, buffer);
  const auto reloaded = load_edge_list(buffer, "roundtrip");

  CHECK(reloaded.graph.node_count() == g.node_count());
  CHECK(reloaded.graph.edge_count() == g.edge_count());
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto new_v = reloaded.ids.find(ids.label(v));
    REQUIRE(new_v.has_value());
    const auto nbrs = g.neighbors(v);
    const auto ws = g.edge_weights(v);
    CHECK(reloaded.graph.degree(*new_v) == g.degree(v));
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const auto new_u = reloaded.ids.find(ids.label(nbrs[i]));
      REQUIRE(new_u.has_value());
      const auto back = reloaded.graph.neighbors(*new_v);
      const auto it = std::find(back.begin(), back.end(), *new_u);
      REQUIRE(it != back.end());
      CHECK(reloaded.graph.edge_weights(*new_v)[it - back.begin()] == ws[i]);
    }
  }
}

TEST_CASE("largest_connected_component: whole graph when connected") {
  const auto result = load_text("a b\nb c\nc d\nd e\ne f\nf g\ng h\nh i\ni j\n");
  const auto lcc = largest_connected_component(result.graph, result.ids);
  CHECK(lcc.graph.node_count() == 10);
  CHECK(lcc.graph.edge_count() == result.graph.edge_count());
}

TEST_CASE("largest_connected_component: picks the larger component") {
  // components {a,b,c} and {x,y}
  const auto result = load_text("a b\nb c\nx y\n");
  const auto lcc = largest_connected_component(result.graph, result.ids);
  CHECK(lcc.graph.node_count() == 3);
  CHECK(lcc.ids.find("a").has_value());
  CHECK(lcc.ids.find("b").has_value());
  CHECK(lcc.ids.find("c").has_value());
  CHECK(!lcc.ids.find("x").has_value());
  // mapping points back to the original dense indices
  for (std::uint32_t v = 0; v < 3; ++v)
    CHECK(result.ids.label(lcc.original_index[v]) == lcc.ids.label(v));
}

TEST_CASE("largest_connected_component: size tie keeps smallest index") {
  // two 4-node components; `a` has the globally smallest dense index
  const auto result = load_text("a b\nb c\nc d\np q\nq r\nr s\n");
  const auto lcc = largest_connected_component(result.graph, result.ids);
  CHECK(lcc.graph.node_count() == 4);
  CHECK(lcc.ids.find("a").has_value());
  CHECK(!lcc.ids.find("p").has_value());
}

TEST_CASE("largest_connected_component: empty graph rejected") {
  Graph g;
  NodeIdMap ids;
  CHECK_THROWS_AS(largest_connected_component(g, ids), std::invalid_argument);
}

TEST_CASE("largest_connected_component agrees with union-find on random graphs") {
  Rng rng(777);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.next_below(200));
    const double p = 2.0 / static_cast<double>(n);
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
    UnionFind uf(n);
    for (std::uint32_t u = 0; u < n; ++u)
      for (std::uint32_t v = u + 1; v < n; ++v)
        if (rng.next_bernoulli(p)) {
          edges.emplace_back(u, v, 1.0);
          uf.unite(u, v);
        }
    const Graph g = Graph::from_edges(n, edges);
    NodeIdMap ids;
    for (std::uint32_t v = 0; v < n; ++v) ids.add(std::to_string(v));

    std::vector<std::size_t> size_of(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) ++size_of[uf.find(v)];
    const std::size_t expected = *std::max_element(size_of.begin(), size_of.end());

    const auto lcc = largest_connected_component(g, ids);
    CHECK(lcc.graph.node_count() == expected);
  }
}
