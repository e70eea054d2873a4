#include "botdet/embed.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace botdet {

namespace {

constexpr std::uint64_t kInitTag = 0x696e6974;     // parameter init stream
constexpr std::uint64_t kShuffleTag = 0x73687566;  // walk-order streams
constexpr std::uint64_t kTrainTag = 0x7472616e;    // negative-draw streams

inline double dot(const double* a, const double* b, std::uint32_t d) {
  double s = 0.0;
  for (std::uint32_t i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

void emit_progress(std::ostream& out, std::uint64_t samples,
                   std::uint64_t total, double loss_ma, double lr) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "{\"samples\":%llu,\"total\":%llu,\"loss_ma\":%.6g,\"lr\":%.6g}",
                static_cast<unsigned long long>(samples),
                static_cast<unsigned long long>(total), loss_ma, lr);
  out << buf << '\n';
}

void emit_epoch(std::ostream& out, std::uint32_t epoch, double mean_loss) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "{\"epoch\":%u,\"mean_loss\":%.6g}", epoch,
                mean_loss);
  out << buf << '\n';
}

// One fused SGNS step on raw parameter tables. The center row receives the
// accumulated gradient once at the end (word2vec update order). Returns the
// sample loss when track_loss, else 0.
inline double sgns_update(double* center_row, double* context_table,
                          std::uint32_t d, std::uint32_t positive,
                          const NegativeSampler& sampler, std::uint32_t k_neg,
                          double lr, Rng& rng, std::vector<double>& grad_buf,
                          bool track_loss) {
  grad_buf.assign(d, 0.0);
  double loss = 0.0;

  double* pos_row = context_table + static_cast<std::size_t>(positive) * d;
  const double f = dot(center_row, pos_row, d);
  const double g_pos = stable_sigmoid(f) - 1.0;
  if (track_loss) loss += softplus(-f);
  for (std::uint32_t i = 0; i < d; ++i) grad_buf[i] += g_pos * pos_row[i];
  for (std::uint32_t i = 0; i < d; ++i) pos_row[i] -= lr * g_pos * center_row[i];

  for (std::uint32_t k = 0; k < k_neg; ++k) {
    const std::uint32_t neg = sampler.sample(rng);
    if (neg == positive) continue;
    double* neg_row = context_table + static_cast<std::size_t>(neg) * d;
    const double fn = dot(center_row, neg_row, d);
    const double g_neg = stable_sigmoid(fn);
    if (track_loss) loss += softplus(fn);
    for (std::uint32_t i = 0; i < d; ++i) grad_buf[i] += g_neg * neg_row[i];
    for (std::uint32_t i = 0; i < d; ++i)
      neg_row[i] -= lr * g_neg * center_row[i];
  }
  for (std::uint32_t i = 0; i < d; ++i) center_row[i] -= lr * grad_buf[i];
  return loss;
}

}  // namespace

void EmbedConfig::validate() const {
  if (dims < 1) throw std::invalid_argument("embed config: dims must be >= 1");
  if (context_size < 1)
    throw std::invalid_argument("embed config: context_size must be >= 1");
  if (negatives_per_positive < 1)
    throw std::invalid_argument("embed config: negatives must be >= 1");
  if (!(lr_initial > 0.0))
    throw std::invalid_argument("embed config: lr_initial must be positive");
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

SgnsGradients sgns_loss_and_grads(
    std::span<const double> center, std::span<const double> context,
    const std::vector<std::span<const double>>& negatives) {
  const std::size_t d = center.size();
  if (context.size() != d)
    throw std::invalid_argument("sgns: center/context dimension mismatch");

  SgnsGradients g;
  g.d_center.assign(d, 0.0);
  g.d_context.assign(d, 0.0);

  const double f = std::inner_product(center.begin(), center.end(),
                                      context.begin(), 0.0);
  const double s = stable_sigmoid(f);
  g.loss = softplus(-f);
  for (std::size_t i = 0; i < d; ++i) {
    g.d_center[i] += (s - 1.0) * context[i];
    g.d_context[i] = (s - 1.0) * center[i];
  }

  g.d_negatives.reserve(negatives.size());
  for (const auto& neg : negatives) {
    if (neg.size() != d)
      throw std::invalid_argument("sgns: negative dimension mismatch");
    const double fn =
        std::inner_product(center.begin(), center.end(), neg.begin(), 0.0);
    const double sn = stable_sigmoid(fn);
    g.loss += softplus(fn);
    std::vector<double> d_neg(d);
    for (std::size_t i = 0; i < d; ++i) {
      d_neg[i] = sn * center[i];
      g.d_center[i] += sn * neg[i];
    }
    g.d_negatives.push_back(std::move(d_neg));
  }
  return g;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> extract_pairs(
    const WalkCorpus& corpus, std::uint32_t context_size) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(pair_count(corpus, context_size));
  for (std::size_t w = 0; w < corpus.walk_count(); ++w) {
    for_each_walk_pair(corpus.walk(w), context_size,
                       [&](std::uint32_t center, std::uint32_t context) {
                         pairs.emplace_back(center, context);
                       });
  }
  return pairs;
}

std::uint64_t pair_count(const WalkCorpus& corpus, std::uint32_t context_size) {
  const std::uint64_t c = context_size;
  std::uint64_t total = 0;
  for (std::size_t w = 0; w < corpus.walk_count(); ++w) {
    const std::uint64_t len = corpus.walk(w).size();
    if (len <= c + 1)
      total += len * (len - 1);
    else
      total += 2 * (c * len - c * (c + 1) / 2);
  }
  return total;
}

NegativeSampler NegativeSampler::from_corpus(const WalkCorpus& corpus,
                                             double power) {
  std::vector<double> counts(corpus.graph_node_count, 0.0);
  for (std::uint32_t token : corpus.tokens) counts[token] += 1.0;
  for (double& c : counts) c = std::pow(c, power);
  NegativeSampler sampler;
  sampler.table_ = build_alias_table(counts);
  return sampler;
}

EmbeddingMatrix train_node2vec(const WalkCorpus& corpus, const NodeIdMap& ids,
                               const EmbedConfig& cfg, std::ostream* progress) {
  cfg.validate();
  const std::uint32_t n = corpus.graph_node_count;
  if (n < 2)
    throw std::invalid_argument("train_node2vec: corpus needs >= 2 nodes");
  if (ids.size() != n)
    throw std::invalid_argument("train_node2vec: node map size mismatch");
  const std::uint32_t d = cfg.dims;

  EmbeddingMatrix emb;
  emb.dims = d;
  emb.labels = ids.labels();
  emb.values.resize(static_cast<std::size_t>(n) * d);
  Rng init_rng(derive_stream(cfg.seed, kInitTag));
  for (double& v : emb.values) v = (init_rng.next_double() - 0.5) / d;
  if (cfg.epochs == 0) return emb;

  std::vector<double> context(static_cast<std::size_t>(n) * d, 0.0);
  const NegativeSampler sampler = NegativeSampler::from_corpus(corpus);
  const std::uint64_t per_epoch = pair_count(corpus, cfg.context_size);
  const std::uint64_t total = per_epoch * cfg.epochs;
  if (total == 0) return emb;

  const bool track_loss = progress != nullptr;
  const unsigned threads = std::max(1u, cfg.threads);

  std::vector<std::size_t> order(corpus.walk_count());
  std::atomic<std::uint64_t> consumed{0};

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_stream(cfg.seed, kShuffleTag, epoch));
    shuffle(order, shuffle_rng);

    std::vector<double> epoch_loss(threads, 0.0);

    auto run_slice = [&](unsigned t, std::size_t begin, std::size_t end) {
      Rng rng(derive_stream(cfg.seed, kTrainTag,
                            static_cast<std::uint64_t>(epoch) * threads + t));
      std::vector<double> grad_buf(d);
      double interval_loss = 0.0;
      std::uint64_t interval_count = 0;
      for (std::size_t idx = begin; idx < end; ++idx) {
        const auto walk = corpus.walk(order[idx]);
        for_each_walk_pair(
            walk, cfg.context_size, [&](std::uint32_t ci, std::uint32_t co) {
              const std::uint64_t done =
                  consumed.fetch_add(1, std::memory_order_relaxed);
              const double lr = lr_at(cfg, done, total);
              const double loss =
                  sgns_update(emb.values.data() + static_cast<std::size_t>(ci) * d,
                              context.data(), d, co, sampler,
                              cfg.negatives_per_positive, lr, rng, grad_buf,
                              track_loss);
              if (track_loss) {
                epoch_loss[t] += loss;
                interval_loss += loss;
                ++interval_count;
                if (threads == 1 && cfg.progress_interval > 0 &&
                    interval_count >= cfg.progress_interval) {
                  emit_progress(*progress, done + 1, total,
                                interval_loss / static_cast<double>(interval_count),
                                lr);
                  interval_loss = 0.0;
                  interval_count = 0;
                }
              }
            });
      }
    };

    if (threads == 1) {
      run_slice(0, 0, order.size());
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = order.size() * t / threads;
        const std::size_t end = order.size() * (t + 1) / threads;
        pool.emplace_back(run_slice, t, begin, end);
      }
      for (auto& th : pool) th.join();
    }

    if (track_loss && per_epoch > 0) {
      const double sum = std::accumulate(epoch_loss.begin(), epoch_loss.end(), 0.0);
      emit_epoch(*progress, epoch, sum / static_cast<double>(per_epoch));
    }
  }
  return emb;
}

const char* to_string(A2vMapping mapping) {
  switch (mapping) {
    case A2vMapping::kReLU: return "relu";
    case A2vMapping::kSigmoid: return "sigmoid";
    case A2vMapping::kFourier: return "fourier";
  }
  return "?";
}

A2vMapping a2v_mapping_from_string(const std::string& name) {
  if (name == "relu") return A2vMapping::kReLU;
  if (name == "sigmoid") return A2vMapping::kSigmoid;
  if (name == "fourier") return A2vMapping::kFourier;
  throw std::invalid_argument("unknown attri2vec mapping `" + name +
                              "` (expected relu|sigmoid|fourier)");
}

namespace {

// Forward pass into caller buffers: z = Wx (+b), h = act(z), dact = act'(z).
void a2v_forward_into(const Attri2vecModel& model, const double* x, double* z,
                      double* h, double* dact) {
  const std::uint32_t d = model.dims, m = model.attr_dim;
  for (std::uint32_t i = 0; i < d; ++i) {
    double zi = dot(model.w.data() + static_cast<std::size_t>(i) * m, x, m);
    if (model.mapping == A2vMapping::kFourier) zi += model.b[i];
    z[i] = zi;
    switch (model.mapping) {
      case A2vMapping::kReLU:
        h[i] = zi > 0.0 ? zi : 0.0;
        if (dact != nullptr) dact[i] = zi > 0.0 ? 1.0 : 0.0;
        break;
      case A2vMapping::kSigmoid: {
        const double s = stable_sigmoid(zi);
        h[i] = s;
        if (dact != nullptr) dact[i] = s * (1.0 - s);
        break;
      }
      case A2vMapping::kFourier:
        h[i] = std::cos(zi);
        if (dact != nullptr) dact[i] = -std::sin(zi);
        break;
    }
  }
}

struct A2vBuffers {
  std::vector<double> z, h, dact, dh, dz;
  explicit A2vBuffers(std::uint32_t d)
      : z(d), h(d), dact(d), dh(d), dz(d) {}
};

// Fused train step mirroring attri2vec_loss_and_grads.
double a2v_update(Attri2vecModel& model, const double* x,
                  std::uint32_t positive, const NegativeSampler& sampler,
                  std::uint32_t k_neg, double lr, Rng& rng, A2vBuffers& buf,
                  bool track_loss) {
  const std::uint32_t d = model.dims, m = model.attr_dim;
  a2v_forward_into(model, x, buf.z.data(), buf.h.data(), buf.dact.data());
  double* ctx = model.context_vectors.data();
  const double* h = buf.h.data();
  double loss = 0.0;

  std::fill(buf.dh.begin(), buf.dh.end(), 0.0);
  double* pos_row = ctx + static_cast<std::size_t>(positive) * d;
  const double f = dot(h, pos_row, d);
  const double g_pos = stable_sigmoid(f) - 1.0;
  if (track_loss) loss += softplus(-f);
  for (std::uint32_t i = 0; i < d; ++i) buf.dh[i] += g_pos * pos_row[i];
  for (std::uint32_t i = 0; i < d; ++i) pos_row[i] -= lr * g_pos * h[i];

  for (std::uint32_t k = 0; k < k_neg; ++k) {
    const std::uint32_t neg = sampler.sample(rng);
    if (neg == positive) continue;
    double* neg_row = ctx + static_cast<std::size_t>(neg) * d;
    const double fn = dot(h, neg_row, d);
    const double g_neg = stable_sigmoid(fn);
    if (track_loss) loss += softplus(fn);
    for (std::uint32_t i = 0; i < d; ++i) buf.dh[i] += g_neg * neg_row[i];
    for (std::uint32_t i = 0; i < d; ++i) neg_row[i] -= lr * g_neg * h[i];
  }

  for (std::uint32_t i = 0; i < d; ++i) buf.dz[i] = buf.dh[i] * buf.dact[i];
  for (std::uint32_t i = 0; i < d; ++i) {
    const double g = lr * buf.dz[i];
    if (g == 0.0) continue;
    double* w_row = model.w.data() + static_cast<std::size_t>(i) * m;
    for (std::uint32_t j = 0; j < m; ++j) w_row[j] -= g * x[j];
  }
  if (model.mapping == A2vMapping::kFourier)
    for (std::uint32_t i = 0; i < d; ++i) model.b[i] -= lr * buf.dz[i];
  return loss;
}

}  // namespace

std::vector<double> attri2vec_forward(const Attri2vecModel& model,
                                      std::span<const double> x) {
  if (x.size() != model.attr_dim)
    throw std::invalid_argument("attri2vec_forward: attribute dimension mismatch");
  std::vector<double> z(model.dims), h(model.dims);
  a2v_forward_into(model, x.data(), z.data(), h.data(), nullptr);
  return h;
}

A2vGradients attri2vec_loss_and_grads(const Attri2vecModel& model,
                                      std::span<const double> x,
                                      std::uint32_t context_node,
                                      std::span<const std::uint32_t> negatives) {
  if (x.size() != model.attr_dim)
    throw std::invalid_argument("attri2vec grads: attribute dimension mismatch");
  const std::uint32_t d = model.dims, m = model.attr_dim;

  std::vector<double> z(d), h(d), dact(d);
  a2v_forward_into(model, x.data(), z.data(), h.data(), dact.data());

  const double* ctx = model.context_vectors.data();
  std::vector<std::span<const double>> neg_rows;
  neg_rows.reserve(negatives.size());
  for (std::uint32_t neg : negatives)
    neg_rows.emplace_back(ctx + static_cast<std::size_t>(neg) * d, d);

  SgnsGradients sg = sgns_loss_and_grads(
      h, {ctx + static_cast<std::size_t>(context_node) * d, d}, neg_rows);

  A2vGradients g;
  g.loss = sg.loss;
  g.d_context = std::move(sg.d_context);
  g.d_negatives = std::move(sg.d_negatives);
  g.d_w.assign(static_cast<std::size_t>(d) * m, 0.0);
  if (model.mapping == A2vMapping::kFourier) g.d_b.assign(d, 0.0);
  for (std::uint32_t i = 0; i < d; ++i) {
    const double dz = sg.d_center[i] * dact[i];
    for (std::uint32_t j = 0; j < m; ++j)
      g.d_w[static_cast<std::size_t>(i) * m + j] = dz * x[j];
    if (model.mapping == A2vMapping::kFourier) g.d_b[i] = dz;
  }
  return g;
}

Attri2vecModel train_attri2vec(const WalkCorpus& corpus,
                               std::span<const double> attrs,
                               std::uint32_t attr_dim, const EmbedConfig& cfg,
                               A2vMapping mapping, std::ostream* progress) {
  cfg.validate();
  const std::uint32_t n = corpus.graph_node_count;
  if (attr_dim == 0)
    throw std::invalid_argument("train_attri2vec: attr_dim must be >= 1");
  if (attrs.size() != static_cast<std::size_t>(n) * attr_dim)
    throw std::invalid_argument("train_attri2vec: attrs size mismatch");
  for (double v : attrs)
    if (!std::isfinite(v))
      throw std::invalid_argument("train_attri2vec: non-finite attribute value");

  const std::uint32_t d = cfg.dims, m = attr_dim;
  Attri2vecModel model;
  model.dims = d;
  model.attr_dim = m;
  model.mapping = mapping;
  model.w.resize(static_cast<std::size_t>(d) * m);
  model.context_vectors.assign(static_cast<std::size_t>(n) * d, 0.0);

  Rng init_rng(derive_stream(cfg.seed, kInitTag));
  if (mapping == A2vMapping::kFourier) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(m));
    for (double& v : model.w) v = init_rng.next_gaussian() * sd;
    model.b.resize(d);
    for (double& v : model.b)
      v = init_rng.next_double() * 2.0 * 3.14159265358979323846;
  } else {
    for (double& v : model.w) v = (init_rng.next_double() - 0.5) / d;
  }

  const std::uint64_t total = cfg.total_samples;
  if (total == 0) return model;

  const NegativeSampler sampler = NegativeSampler::from_corpus(corpus);
  const bool track_loss = progress != nullptr;

  A2vBuffers buf(d);
  std::vector<std::size_t> order(corpus.walk_count());
  std::uint64_t consumed = 0;
  double interval_loss = 0.0;
  std::uint64_t interval_count = 0;

  for (std::uint64_t cycle = 0; consumed < total; ++cycle) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_stream(cfg.seed, kShuffleTag, cycle));
    shuffle(order, shuffle_rng);
    Rng rng(derive_stream(cfg.seed, kTrainTag, cycle));

    for (std::size_t idx = 0; idx < order.size() && consumed < total; ++idx) {
      const auto walk = corpus.walk(order[idx]);
      for_each_walk_pair(
          walk, cfg.context_size, [&](std::uint32_t ci, std::uint32_t co) {
            if (consumed >= total) return;
            const double lr = lr_at(cfg, consumed, total);
            const double loss = a2v_update(
                model, attrs.data() + static_cast<std::size_t>(ci) * m, co,
                sampler, cfg.negatives_per_positive, lr, rng, buf, track_loss);
            ++consumed;
            if (track_loss) {
              interval_loss += loss;
              ++interval_count;
              if (cfg.progress_interval > 0 &&
                  interval_count >= cfg.progress_interval) {
                emit_progress(*progress, consumed, total,
                              interval_loss / static_cast<double>(interval_count),
                              lr);
                interval_loss = 0.0;
                interval_count = 0;
              }
            }
          });
    }
    if (pair_count(corpus, cfg.context_size) == 0) break;  // nothing to cycle
  }
  return model;
}

EmbeddingMatrix attri2vec_embed_all(const Attri2vecModel& model,
                                    std::span<const double> attrs,
                                    std::uint32_t attr_dim,
                                    const std::vector<std::string>& labels) {
  if (attr_dim != model.attr_dim)
    throw std::invalid_argument("attri2vec_embed_all: attr_dim mismatch");
  if (attrs.size() != labels.size() * static_cast<std::size_t>(attr_dim))
    throw std::invalid_argument("attri2vec_embed_all: attrs size mismatch");
  EmbeddingMatrix emb;
  emb.dims = model.dims;
  emb.labels = labels;
  emb.values.resize(labels.size() * static_cast<std::size_t>(model.dims));
  std::vector<double> z(model.dims);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    a2v_forward_into(model, attrs.data() + i * attr_dim, z.data(),
                     emb.values.data() + i * model.dims, nullptr);
  }
  return emb;
}

void save_embeddings(const EmbeddingMatrix& embedding, std::ostream& out) {
  if (embedding.node_count() == 0)
    throw std::invalid_argument("save_embeddings: empty embedding");
  if (embedding.dims == 0)
    throw std::invalid_argument("save_embeddings: zero dimensions");
  out << embedding.node_count() << ' ' << embedding.dims << '\n';
  char buf[40];
  for (std::size_t i = 0; i < embedding.node_count(); ++i) {
    out << embedding.labels[i];
    const auto row = embedding.row(i);
    for (double v : row) {
      std::snprintf(buf, sizeof(buf), "%.8g", v);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

EmbeddingMatrix load_embeddings(std::istream& in) {
  std::size_t n = 0;
  std::uint32_t d = 0;
  if (!(in >> n >> d))
    throw std::runtime_error("embeddings: malformed header (expected `n d`)");
  if (n == 0 || d == 0)
    throw std::runtime_error("embeddings: empty embedding rejected");

  EmbeddingMatrix emb;
  emb.dims = d;
  emb.labels.reserve(n);
  emb.values.reserve(n * static_cast<std::size_t>(d));
  std::string label;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> label))
      throw std::runtime_error("embeddings: body shorter than header (row " +
                               std::to_string(i) + ")");
    emb.labels.push_back(label);
    for (std::uint32_t j = 0; j < d; ++j) {
      double v = 0.0;
      if (!(in >> v))
        throw std::runtime_error("embeddings: non-numeric or missing value at row " +
                                 std::to_string(i));
      emb.values.push_back(v);
    }
  }
  std::string extra;
  if (in >> extra)
    throw std::runtime_error("embeddings: body longer than header");
  return emb;
}

}  // namespace botdet
