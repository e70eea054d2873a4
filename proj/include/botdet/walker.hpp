#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "botdet/alias.hpp"
#include "botdet/graph.hpp"
#include "botdet/rng.hpp"

namespace botdet {

struct WalkConfig {
  double p = 1.0;                      // return parameter
  double q = 1.0;                      // in-out parameter
  std::uint32_t walk_length = 80;      // max nodes per walk
  std::uint32_t walks_per_node = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

// Walk corpus in flat CSR-like storage. Walk i for start node v lives at
// slot v * walks_per_node + i regardless of generation thread count.
struct WalkCorpus {
  std::vector<std::size_t> offsets;   // walk_count + 1
  std::vector<std::uint32_t> tokens;  // concatenated node indices
  std::uint32_t graph_node_count = 0;
  WalkConfig config;

  std::size_t walk_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const std::uint32_t> walk(std::size_t i) const {
    return {tokens.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

// Unnormalized second-order transition weights out of `curr` given the walk
// arrived from `prev`. For neighbor x with edge weight w:
//   x == prev            -> w / p
//   x adjacent to prev   -> w
//   otherwise            -> w / q
// With prev absent the step is first-order: plain edge weights.
std::vector<std::pair<std::uint32_t, double>> transition_weights(
    const Graph& g, std::optional<std::uint32_t> prev, std::uint32_t curr,
    double p, double q);

// Hot-path variant: fills `out` (size = deg(curr)) aligned with
// g.neighbors(curr). prev must be a neighbor of curr.
void transition_weights_into(const Graph& g, std::uint32_t prev,
                             std::uint32_t curr, double p, double q,
                             std::span<double> out);

// Precomputed alias tables for every directed edge (u, v); table (u, v) is
// over the neighbors of v. Memory is sum over directed edges of deg(v),
// which is why construction is gated by an entry budget.
class TransitionStore {
 public:
  static std::size_t entry_count(const Graph& g);

  // Throws std::length_error when entry_count(g) > max_entries so callers
  // can fall back to on-the-fly sampling.
  static TransitionStore build(const Graph& g, double p, double q,
                               std::size_t max_entries);

  // Table for the directed edge identified by the CSR position of v within
  // u's adjacency block.
  const AliasTable& table(const Graph& g, std::uint32_t u,
                          std::uint32_t v_position) const {
    return tables_[g.adjacency_offset(u) + v_position];
  }

  double p() const { return p_; }
  double q() const { return q_; }
  std::size_t table_count() const { return tables_.size(); }

 private:
  std::vector<AliasTable> tables_;  // one per directed edge, CSR order
  double p_ = 1.0, q_ = 1.0;
};

// One biased walk from `start`. Truncates when the current node has no
// neighbors (an isolated start yields just [start]). If `store` is given it
// must have been built with the same (p, q).
std::vector<std::uint32_t> generate_walk(const Graph& g, std::uint32_t start,
                                         const WalkConfig& cfg, Rng& rng,
                                         const TransitionStore* store = nullptr);

// walks_per_node walks from every node. Each walk draws from its own RNG
// stream derived from (seed, start, walk index) and is written to a fixed
// slot, so output is byte-identical for any thread count.
WalkCorpus generate_corpus(const Graph& g, const WalkConfig& cfg,
                           unsigned threads = 1,
                           const TransitionStore* store = nullptr);

// One walk per line, space-separated external labels.
void write_corpus(const WalkCorpus& corpus, const NodeIdMap& ids,
                  std::ostream& out);

// Reads the write_corpus format; labels are mapped to dense indices in
// first-seen order.
std::pair<WalkCorpus, NodeIdMap> load_corpus(std::istream& in);

}  // namespace botdet
