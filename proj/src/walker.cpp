#include "botdet/walker.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace botdet {

void WalkConfig::validate() const {
  if (!(p > 0.0) || !(q > 0.0))
    throw std::invalid_argument("walk config: p and q must be positive");
  if (walk_length < 1 || walks_per_node < 1)
    throw std::invalid_argument(
        "walk config: walk_length and walks_per_node must be >= 1");
}

std::vector<std::pair<std::uint32_t, double>> transition_weights(
    const Graph& g, std::optional<std::uint32_t> prev, std::uint32_t curr,
    double p, double q) {
  const auto nbrs = g.neighbors(curr);
  const auto ws = g.edge_weights(curr);
  std::vector<std::pair<std::uint32_t, double>> out;
  out.reserve(nbrs.size());
  if (!prev) {
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      out.emplace_back(nbrs[i], ws[i]);
    return out;
  }
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    const std::uint32_t x = nbrs[i];
    double w = ws[i];
    if (x == *prev)
      w /= p;
    else if (!g.has_edge(*prev, x))
      w /= q;
    out.emplace_back(x, w);
  }
  return out;
}

void transition_weights_into(const Graph& g, std::uint32_t prev,
                             std::uint32_t curr, double p, double q,
                             std::span<double> out) {
  const auto nbrs = g.neighbors(curr);
  const auto ws = g.edge_weights(curr);
  const auto prev_nbrs = g.neighbors(prev);
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    const std::uint32_t x = nbrs[i];
    double w = ws[i];
    if (x == prev)
      w /= p;
    else if (!std::binary_search(prev_nbrs.begin(), prev_nbrs.end(), x))
      w /= q;
    out[i] = w;
  }
}

namespace {

// Samples an index from unnormalized weights by inverse-CDF linear scan.
std::size_t sample_weights(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  double r = rng.next_double() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    r -= weights[i];
    if (r < 0.0) return i;
  }
  return weights.size() - 1;  // guard against accumulated rounding
}

// Appends up to cfg.walk_length nodes starting at `start` into out.
void walk_into(const Graph& g, std::uint32_t start, const WalkConfig& cfg,
               Rng& rng, const TransitionStore* store,
               std::vector<double>& weight_buf,
               std::vector<std::uint32_t>& out) {
  out.push_back(start);
  if (cfg.walk_length == 1 || g.degree(start) == 0) return;

  // First step is first-order: plain edge weights.
  const auto first_nbrs = g.neighbors(start);
  std::size_t pos = sample_weights(g.edge_weights(start), rng);
  std::uint32_t prev = start;
  std::uint32_t curr = first_nbrs[pos];
  out.push_back(curr);

  while (out.size() < cfg.walk_length) {
    const auto nbrs = g.neighbors(curr);
    if (nbrs.empty()) break;
    std::size_t next_pos;
    if (store != nullptr) {
      // `pos` is curr's position within prev's adjacency block.
      next_pos = sample_alias(store->table(g, prev, static_cast<std::uint32_t>(pos)), rng);
    } else {
      weight_buf.resize(nbrs.size());
      transition_weights_into(g, prev, curr, cfg.p, cfg.q, weight_buf);
      next_pos = sample_weights(weight_buf, rng);
    }
    prev = curr;
    curr = nbrs[next_pos];
    pos = next_pos;
    out.push_back(curr);
  }
}

}  // namespace

std::size_t TransitionStore::entry_count(const Graph& g) {
  // Each directed edge (u, v) holds a table of size deg(v); v appears as a
  // target deg(v) times, so the total is sum over v of deg(v)^2.
  std::size_t total = 0;
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    const std::size_t d = g.degree(v);
    total += d * d;
  }
  return total;
}

TransitionStore TransitionStore::build(const Graph& g, double p, double q,
                                       std::size_t max_entries) {
  const std::size_t entries = entry_count(g);
  if (entries > max_entries)
    throw std::length_error(
        "transition store: " + std::to_string(entries) +
        " entries exceed budget of " + std::to_string(max_entries));

  TransitionStore store;
  store.p_ = p;
  store.q_ = q;
  store.tables_.resize(2 * g.edge_count());
  std::vector<double> weights;
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    const auto nbrs = g.neighbors(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const std::uint32_t v = nbrs[i];
      weights.resize(g.degree(v));
      transition_weights_into(g, u, v, p, q, weights);
      store.tables_[g.adjacency_offset(u) + i] = build_alias_table(weights);
    }
  }
  return store;
}

std::vector<std::uint32_t> generate_walk(const Graph& g, std::uint32_t start,
                                         const WalkConfig& cfg, Rng& rng,
                                         const TransitionStore* store) {
  cfg.validate();
  if (start >= g.node_count())
    throw std::invalid_argument("generate_walk: start node out of range");
  std::vector<std::uint32_t> walk;
  walk.reserve(cfg.walk_length);
  std::vector<double> weight_buf;
  walk_into(g, start, cfg, rng, store, weight_buf, walk);
  return walk;
}

WalkCorpus generate_corpus(const Graph& g, const WalkConfig& cfg,
                           unsigned threads, const TransitionStore* store) {
  cfg.validate();
  if (g.node_count() == 0)
    throw std::invalid_argument("generate_corpus: empty graph");

  const std::uint32_t n = g.node_count();
  const std::size_t walk_count =
      static_cast<std::size_t>(n) * cfg.walks_per_node;

  WalkCorpus corpus;
  corpus.graph_node_count = n;
  corpus.config = cfg;
  corpus.offsets.resize(walk_count + 1);

  // In a symmetric graph a walk dead-ends only at an isolated start, so
  // every walk's length is known up front and slots can be preallocated.
  corpus.offsets[0] = 0;
  for (std::size_t w = 0; w < walk_count; ++w) {
    const auto node = static_cast<std::uint32_t>(w / cfg.walks_per_node);
    const std::size_t len = g.degree(node) == 0 ? 1 : cfg.walk_length;
    corpus.offsets[w + 1] = corpus.offsets[w] + len;
  }
  corpus.tokens.resize(corpus.offsets[walk_count]);

  const unsigned worker_count = std::max(1u, threads);
  std::atomic<std::size_t> next_node{0};
  auto worker = [&]() {
    std::vector<double> weight_buf;
    std::vector<std::uint32_t> walk;
    walk.reserve(cfg.walk_length);
    for (;;) {
      const std::size_t node = next_node.fetch_add(1);
      if (node >= n) return;
      for (std::uint32_t k = 0; k < cfg.walks_per_node; ++k) {
        const std::size_t slot = node * cfg.walks_per_node + k;
        Rng rng(derive_stream(cfg.seed, node, k));
        walk.clear();
        walk_into(g, static_cast<std::uint32_t>(node), cfg, rng, store,
                  weight_buf, walk);
        std::copy(walk.begin(), walk.end(),
                  corpus.tokens.begin() + corpus.offsets[slot]);
      }
    }
  };

  if (worker_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (unsigned t = 0; t < worker_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return corpus;
}

void write_corpus(const WalkCorpus& corpus, const NodeIdMap& ids,
                  std::ostream& out) {
  for (std::size_t w = 0; w < corpus.walk_count(); ++w) {
    const auto walk = corpus.walk(w);
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i > 0) out << ' ';
      out << ids.label(walk[i]);
    }
    out << '\n';
  }
}

std::pair<WalkCorpus, NodeIdMap> load_corpus(std::istream& in) {
  WalkCorpus corpus;
  NodeIdMap ids;
  corpus.offsets.push_back(0);
  std::string line, token;
  std::size_t max_len = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t len = 0;
    while (ss >> token) {
      corpus.tokens.push_back(ids.add(token));
      ++len;
    }
    if (len == 0) continue;
    max_len = std::max(max_len, len);
    corpus.offsets.push_back(corpus.tokens.size());
  }
  if (corpus.walk_count() == 0)
    throw std::runtime_error("corpus: no walks in input");
  corpus.graph_node_count = ids.size();
  corpus.config.walk_length = static_cast<std::uint32_t>(max_len);
  corpus.config.walks_per_node = static_cast<std::uint32_t>(
      std::max<std::size_t>(1, corpus.walk_count() / ids.size()));
  return {std::move(corpus), std::move(ids)};
}

}  // namespace botdet
