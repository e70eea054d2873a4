#include "botdet/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace botdet {

std::uint32_t NodeIdMap::add(const std::string& label) {
  auto it = index_.find(label);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(labels_.size());
  labels_.push_back(label);
  index_.emplace(label, id);
  return id;
}

std::optional<std::uint32_t> NodeIdMap::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Graph Graph::from_edges(
    std::uint32_t node_count,
    const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges) {
  Graph g;
  g.node_count_ = node_count;
  g.offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);

  for (const auto& [u, v, w] : edges) {
    if (u >= node_count || v >= node_count)
      throw std::invalid_argument("graph: node index out of range");
    if (u == v) throw std::invalid_argument("graph: self-loop");
    if (!(w > 0.0)) throw std::invalid_argument("graph: nonpositive weight");
    ++g.offsets_[u + 1];
    ++g.offsets_[v + 1];
  }
  for (std::uint32_t v = 0; v < node_count; ++v)
    g.offsets_[v + 1] += g.offsets_[v];

  g.adj_.resize(g.offsets_[node_count]);
  g.weights_.resize(g.offsets_[node_count]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v, w] : edges) {
    g.adj_[cursor[u]] = v;
    g.weights_[cursor[u]++] = w;
    g.adj_[cursor[v]] = u;
    g.weights_[cursor[v]++] = w;
  }

  // Sort each adjacency block by neighbor index, carrying weights along.
  std::vector<std::pair<std::uint32_t, double>> block;
  for (std::uint32_t v = 0; v < node_count; ++v) {
    const std::size_t begin = g.offsets_[v], end = g.offsets_[v + 1];
    block.clear();
    for (std::size_t i = begin; i < end; ++i)
      block.emplace_back(g.adj_[i], g.weights_[i]);
    std::sort(block.begin(), block.end());
    for (std::size_t i = begin; i < end; ++i) {
      g.adj_[i] = block[i - begin].first;
      g.weights_[i] = block[i - begin].second;
      if (i > begin && g.adj_[i] == g.adj_[i - 1])
        throw std::invalid_argument("graph: duplicate edge");
    }
  }
  return g;
}

bool Graph::has_edge(std::uint32_t u, std::uint32_t v) const {
  const auto nbrs = neighbors(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t') continue;
    return c == '#';
  }
  return true;
}

std::vector<std::string> split_fields(const std::string& line, bool comma) {
  std::vector<std::string> fields;
  if (comma) {
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
      const auto first = field.find_first_not_of(" \t");
      if (first == std::string::npos) {
        fields.emplace_back();
      } else {
        const auto last = field.find_last_not_of(" \t");
        fields.push_back(field.substr(first, last - first + 1));
      }
    }
  } else {
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) fields.push_back(std::move(token));
  }
  return fields;
}

struct PairHash {
  std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& p) const {
    return (static_cast<std::size_t>(p.first) << 32) | p.second;
  }
};

}  // namespace

EdgeListLoadResult load_edge_list(std::istream& in, const std::string& source_name) {
  EdgeListLoadResult result;
  std::unordered_map<std::pair<std::uint32_t, std::uint32_t>, double, PairHash>
      seen;
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;

  std::string line;
  std::size_t line_no = 0;
  bool comma = false;
  bool detected = false;

  auto fail = [&](const std::string& what) {
    throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                             ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank_or_comment(line)) continue;
    if (!detected) {
      comma = line.find(',') != std::string::npos;
      detected = true;
    }

    const auto fields = split_fields(line, comma);
    if (fields.size() != 2 && fields.size() != 3)
      fail("expected `src dst [weight]`, got " + std::to_string(fields.size()) +
           " fields");

    double weight = 1.0;
    if (fields.size() == 3) {
      try {
        std::size_t pos = 0;
        weight = std::stod(fields[2], &pos);
        if (pos != fields[2].size()) fail("malformed weight `" + fields[2] + "`");
      } catch (const std::logic_error&) {
        fail("malformed weight `" + fields[2] + "`");
      }
      if (!(weight > 0.0)) fail("nonpositive weight " + fields[2]);
    }

    if (fields[0] == fields[1]) {
      ++result.self_loops_skipped;
      continue;
    }
    const std::uint32_t u = result.ids.add(fields[0]);
    const std::uint32_t v = result.ids.add(fields[1]);
    const auto key = std::minmax(u, v);
    auto [it, inserted] = seen.emplace(key, weight);
    if (!inserted) {
      if (it->second != weight)
        fail("duplicate edge `" + fields[0] + " " + fields[1] +
             "` with conflicting weight");
      ++result.duplicate_records;
      continue;
    }
    edges.emplace_back(key.first, key.second, weight);
  }

  result.graph = Graph::from_edges(result.ids.size(), edges);
  return result;
}

void write_edge_list(const Graph& g, const NodeIdMap& ids, std::ostream& out) {
  char buf[32];
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    const auto nbrs = g.neighbors(u);
    const auto ws = g.edge_weights(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (nbrs[i] < u) continue;  // each undirected edge once
      std::snprintf(buf, sizeof(buf), "%.17g", ws[i]);
      out << ids.label(u) << ' ' << ids.label(nbrs[i]) << ' ' << buf << '\n';
    }
  }
}

ComponentResult largest_connected_component(const Graph& g, const NodeIdMap& ids) {
  const std::uint32_t n = g.node_count();
  if (n == 0) throw std::invalid_argument("largest_connected_component: empty graph");

  std::vector<std::uint32_t> component(n, n);
  std::uint32_t n_components = 0;
  std::vector<std::size_t> component_size;
  std::vector<std::uint32_t> queue;
  queue.reserve(n);

  for (std::uint32_t seed = 0; seed < n; ++seed) {
    if (component[seed] != n) continue;
    const std::uint32_t c = n_components++;
    component_size.push_back(0);
    queue.clear();
    queue.push_back(seed);
    component[seed] = c;
    while (!queue.empty()) {
      const std::uint32_t v = queue.back();
      queue.pop_back();
      ++component_size[c];
      for (std::uint32_t w : g.neighbors(v)) {
        if (component[w] == n) {
          component[w] = c;
          queue.push_back(w);
        }
      }
    }
  }

  // Components are discovered in order of their smallest contained index,
  // so keeping the first maximum implements the tie rule.
  std::uint32_t best = 0;
  for (std::uint32_t c = 1; c < n_components; ++c)
    if (component_size[c] > component_size[best]) best = c;

  ComponentResult result;
  std::vector<std::uint32_t> dense(n, n);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (component[v] != best) continue;
    dense[v] = static_cast<std::uint32_t>(result.original_index.size());
    result.original_index.push_back(v);
    result.ids.add(ids.label(v));
  }

  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;
  for (std::uint32_t v : result.original_index) {
    const auto nbrs = g.neighbors(v);
    const auto ws = g.edge_weights(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (nbrs[i] < v) continue;
      edges.emplace_back(dense[v], dense[nbrs[i]], ws[i]);
    }
  }
  result.graph = Graph::from_edges(
      static_cast<std::uint32_t>(result.original_index.size()), edges);
  return result;
}

}  // namespace botdet
