#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "botdet/alias.hpp"
#include "botdet/graph.hpp"
#include "botdet/rng.hpp"
#include "botdet/walker.hpp"

namespace botdet {

struct EmbedConfig {
  std::uint32_t dims = 50;
  std::uint32_t context_size = 10;
  std::uint32_t negatives_per_positive = 5;
  std::uint32_t epochs = 10;                 // node2vec budget
  std::uint64_t total_samples = 1'000'000;   // attri2vec budget
  double lr_initial = 0.025;
  double lr_floor_fraction = 1e-4;  // lr never drops below lr_initial * this
  std::uint64_t seed = 0;
  unsigned threads = 1;  // >1 enables hogwild updates (non-deterministic)
  std::uint64_t progress_interval = 100'000;  // samples per progress line

  void validate() const;
};

struct EmbeddingMatrix {
  std::uint32_t dims = 0;
  std::vector<double> values;       // node_count x dims, row-major
  std::vector<std::string> labels;  // dense index -> external label

  std::size_t node_count() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dims, dims};
  }
  std::span<double> row(std::size_t i) {
    return {values.data() + i * dims, dims};
  }
};

// sigma(x) = 1 / (1 + exp(-x)), evaluated without overflow.
double stable_sigmoid(double x);
// log(1 + exp(x)) without overflow; -log sigma(x) == softplus(-x).
double softplus(double x);

// Learning rate after `consumed` of `total` samples: linear decay from
// lr_initial to the floor fraction.
inline double lr_at(const EmbedConfig& cfg, std::uint64_t consumed,
                    std::uint64_t total) {
  const double t = total == 0 ? 1.0
                              : static_cast<double>(consumed) /
                                    static_cast<double>(total);
  return cfg.lr_initial * std::max(1.0 - t, cfg.lr_floor_fraction);
}

// Skip-gram negative-sampling loss for one (center, context, negatives)
// sample: -log sigma(u.v) - sum_k log sigma(-u.n_k), plus exact gradients.
struct SgnsGradients {
  double loss = 0.0;
  std::vector<double> d_center;
  std::vector<double> d_context;
  std::vector<std::vector<double>> d_negatives;
};
SgnsGradients sgns_loss_and_grads(std::span<const double> center,
                                  std::span<const double> context,
                                  const std::vector<std::span<const double>>& negatives);

// All (center, context) pairs with distance <= context_size within a walk.
template <typename F>
void for_each_walk_pair(std::span<const std::uint32_t> walk,
                        std::uint32_t context_size, F&& f) {
  const auto len = static_cast<std::ptrdiff_t>(walk.size());
  const auto c = static_cast<std::ptrdiff_t>(context_size);
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - c);
    const std::ptrdiff_t hi = std::min(len - 1, i + c);
    for (std::ptrdiff_t j = lo; j <= hi; ++j)
      if (j != i) f(walk[static_cast<std::size_t>(i)], walk[static_cast<std::size_t>(j)]);
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> extract_pairs(
    const WalkCorpus& corpus, std::uint32_t context_size);

// Closed-form count of the pairs extract_pairs yields.
std::uint64_t pair_count(const WalkCorpus& corpus, std::uint32_t context_size);

// Unigram^power distribution over corpus token occurrences.
class NegativeSampler {
 public:
  static NegativeSampler from_corpus(const WalkCorpus& corpus,
                                     double power = 0.75);
  std::uint32_t sample(Rng& rng) const { return sample_alias(table_, rng); }
  const AliasTable& table() const { return table_; }

 private:
  AliasTable table_;
};

// Trains free center/context vectors over the corpus; the center table is
// the returned embedding. Deterministic (bit-reproducible) when
// cfg.threads == 1; epochs == 0 returns the seeded initialization.
// `progress` (optional) receives JSON lines with samples consumed,
// moving-average loss and current lr, plus one summary line per epoch.
EmbeddingMatrix train_node2vec(const WalkCorpus& corpus, const NodeIdMap& ids,
                               const EmbedConfig& cfg,
                               std::ostream* progress = nullptr);

enum class A2vMapping { kReLU, kSigmoid, kFourier };
const char* to_string(A2vMapping mapping);
A2vMapping a2v_mapping_from_string(const std::string& name);

// Embedding of a node is a learned mapping of its attribute vector:
// ReLU: max(0, Wx); Sigmoid: sigma(Wx); Fourier: cos(Wx + b).
// Context vectors are free parameters as in node2vec.
struct Attri2vecModel {
  std::uint32_t dims = 0;
  std::uint32_t attr_dim = 0;
  A2vMapping mapping = A2vMapping::kSigmoid;
  std::vector<double> w;                // dims x attr_dim, row-major
  std::vector<double> b;                // dims, Fourier only (else empty)
  std::vector<double> context_vectors;  // node_count x dims
};

// f(x) for one attribute vector; works for nodes unseen in training.
std::vector<double> attri2vec_forward(const Attri2vecModel& model,
                                      std::span<const double> x);

// Loss and exact parameter gradients for one sample; the reference for the
// trainer's fused update path.
struct A2vGradients {
  double loss = 0.0;
  std::vector<double> d_w;  // dims x attr_dim
  std::vector<double> d_b;  // dims, Fourier only
  std::vector<double> d_context;
  std::vector<std::vector<double>> d_negatives;
};
A2vGradients attri2vec_loss_and_grads(const Attri2vecModel& model,
                                      std::span<const double> x,
                                      std::uint32_t context_node,
                                      std::span<const std::uint32_t> negatives);

// attrs is row-major corpus.graph_node_count x attr_dim and must be finite.
// Consumes cfg.total_samples pairs by cycling the walk-shuffled pair stream.
Attri2vecModel train_attri2vec(const WalkCorpus& corpus,
                               std::span<const double> attrs,
                               std::uint32_t attr_dim, const EmbedConfig& cfg,
                               A2vMapping mapping,
                               std::ostream* progress = nullptr);

// Applies the learned mapping to every attribute row.
EmbeddingMatrix attri2vec_embed_all(const Attri2vecModel& model,
                                    std::span<const double> attrs,
                                    std::uint32_t attr_dim,
                                    const std::vector<std::string>& labels);

// word2vec text format: header `n d`, then `label v1 .. vd` per node.
void save_embeddings(const EmbeddingMatrix& embedding, std::ostream& out);
EmbeddingMatrix load_embeddings(std::istream& in);

}  // namespace botdet
