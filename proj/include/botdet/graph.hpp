#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace botdet {

// Bijection between external node labels (opaque strings, e.g. hashed ids)
// and dense indices [0, n). Dense indices are assigned in first-seen order.
class NodeIdMap {
 public:
  std::uint32_t add(const std::string& label);
  std::optional<std::uint32_t> find(const std::string& label) const;
  const std::string& label(std::uint32_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(labels_.size()); }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Weighted undirected graph in CSR form. Adjacency is symmetric, has no
// self-loops or duplicate edges, and every neighbor list is sorted by dense
// index, so membership tests are O(log deg). Immutable after construction.
class Graph {
 public:
  Graph() = default;

  // Edges are undirected (u, v, w); duplicates of the same unordered pair
  // with equal weight collapse, conflicting weights throw. Self-loops throw.
  static Graph from_edges(
      std::uint32_t node_count,
      const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges);

  std::uint32_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return adj_.size() / 2; }

  std::uint32_t degree(std::uint32_t v) const {
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }
  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {adj_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<const double> edge_weights(std::uint32_t v) const {
    return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  // Offset of v's adjacency block; block offset + position identifies a
  // directed edge (used by the precomputed transition store).
  std::size_t adjacency_offset(std::uint32_t v) const { return offsets_[v]; }

  bool has_edge(std::uint32_t u, std::uint32_t v) const;

 private:
  std::uint32_t node_count_ = 0;
  std::vector<std::size_t> offsets_;  // size node_count + 1
  std::vector<std::uint32_t> adj_;
  std::vector<double> weights_;
};

struct EdgeListLoadResult {
  Graph graph;
  NodeIdMap ids;
  std::size_t self_loops_skipped = 0;
  std::size_t duplicate_records = 0;
};

// Parses UTF-8 edge-list text: one edge per line, `src dst [weight]`,
// whitespace- or comma-separated (auto-detected from the first data line),
// `#` comment lines and blank lines ignored. Weight defaults to 1.0.
// Throws std::runtime_error naming the line for malformed records,
// nonpositive weights, and duplicate records with conflicting weights.
// Self-loops are skipped and counted, not fatal.
EdgeListLoadResult load_edge_list(std::istream& in,
                                  const std::string& source_name = "<stream>");

// One `label label weight` line per undirected edge, full double precision.
void write_edge_list(const Graph& g, const NodeIdMap& ids, std::ostream& out);

struct ComponentResult {
  Graph graph;
  NodeIdMap ids;
  // Dense index in the component graph -> dense index in the input graph.
  std::vector<std::uint32_t> original_index;
};

// Extracts the largest connected component; ties broken in favor of the
// component containing the smallest original index. Node order (and thus
// label order) is preserved. Throws on an empty graph.
ComponentResult largest_connected_component(const Graph& g, const NodeIdMap& ids);

}  // namespace botdet
