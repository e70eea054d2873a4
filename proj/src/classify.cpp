#include "botdet/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "botdet/embed.hpp"

namespace botdet {

void LabeledDataset::validate() const {
  if (features.rows != labels.size())
    throw std::invalid_argument("dataset: feature/label row count mismatch");
  if (features.has_mask())
    throw std::invalid_argument("dataset: features must be imputed");
  for (int y : labels)
    if (y != 0 && y != 1)
      throw std::invalid_argument("dataset: labels must be 0/1");
}

LabeledDataset subset(const LabeledDataset& ds,
                      std::span<const std::size_t> rows) {
  LabeledDataset out;
  out.features = select_rows(ds.features, rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(ds.labels[r]);
  return out;
}

SplitIndices stratified_split(std::span<const int> labels, double test_fraction,
                              std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("stratified_split: test_fraction must be in (0, 1)");

  std::vector<std::size_t> class_rows[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("stratified_split: labels must be 0/1");
    class_rows[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c)
    if (class_rows[c].size() < 2)
      throw std::invalid_argument(
          "stratified_split: class " + std::to_string(c) +
          " has fewer than 2 members (" + std::to_string(class_rows[c].size()) + ")");

  SplitIndices split;
  for (int c = 0; c < 2; ++c) {
    auto& rows = class_rows[c];
    Rng rng(derive_stream(seed, 0x73706c69, static_cast<std::uint64_t>(c)));
    shuffle(rows, rng);
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(rows.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + n_test);
    split.train.insert(split.train.end(), rows.begin() + n_test, rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

namespace {

// Margin m_i = w.x_i + b for every row.
void compute_margins(const FeatureMatrix& fm, std::span<const double> w,
                     double bias, std::vector<double>& margins) {
  margins.resize(fm.rows);
  for (std::size_t r = 0; r < fm.rows; ++r) {
    const double* x = fm.values.data() + r * fm.cols;
    double m = bias;
    for (std::uint32_t c = 0; c < fm.cols; ++c) m += w[c] * x[c];
    margins[r] = m;
  }
}

}  // namespace

double logreg_objective(const LabeledDataset& ds, std::span<const double> w,
                        double bias, double l2_lambda) {
  if (w.size() != ds.features.cols)
    throw std::invalid_argument("logreg_objective: weight width mismatch");
  std::vector<double> margins;
  compute_margins(ds.features, w, bias, margins);
  double loss = 0.0;
  for (std::size_t r = 0; r < ds.labels.size(); ++r) {
    const double y = ds.labels[r] == 1 ? 1.0 : -1.0;
    loss += softplus(-y * margins[r]);
  }
  loss /= static_cast<double>(ds.labels.size());
  double penalty = 0.0;
  for (double wi : w) penalty += wi * wi;
  return loss + l2_lambda * penalty;
}

void logreg_gradient(const LabeledDataset& ds, std::span<const double> w,
                     double bias, double l2_lambda, std::span<double> grad_w,
                     double& grad_bias) {
  if (w.size() != ds.features.cols || grad_w.size() != ds.features.cols)
    throw std::invalid_argument("logreg_gradient: width mismatch");
  std::vector<double> margins;
  compute_margins(ds.features, w, bias, margins);

  std::fill(grad_w.begin(), grad_w.end(), 0.0);
  grad_bias = 0.0;
  const double inv_n = 1.0 / static_cast<double>(ds.labels.size());
  for (std::size_t r = 0; r < ds.labels.size(); ++r) {
    const double y = ds.labels[r] == 1 ? 1.0 : -1.0;
    // d/dm log(1 + exp(-y m)) = -y sigma(-y m)
    const double coeff = -y * stable_sigmoid(-y * margins[r]) * inv_n;
    const double* x = ds.features.values.data() + r * ds.features.cols;
    for (std::uint32_t c = 0; c < ds.features.cols; ++c)
      grad_w[c] += coeff * x[c];
    grad_bias += coeff;
  }
  for (std::uint32_t c = 0; c < ds.features.cols; ++c)
    grad_w[c] += 2.0 * l2_lambda * w[c];
}

LogRegModel train_logreg(const LabeledDataset& train, const LogRegConfig& cfg) {
  train.validate();
  bool has_pos = false, has_neg = false;
  for (int y : train.labels) (y == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw std::invalid_argument("train_logreg: training set needs both classes");
  for (double v : train.features.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("train_logreg: non-finite feature value");

  const std::uint32_t d = train.features.cols;
  LogRegModel model;
  model.weights.assign(d, 0.0);
  model.l2_lambda = cfg.l2_lambda;

  std::vector<double> grad(d), candidate(d);
  double objective = logreg_objective(train, model.weights, model.bias, cfg.l2_lambda);
  double step = 1.0;

  for (std::uint32_t iter = 0; iter < cfg.max_iterations; ++iter) {
    double grad_bias = 0.0;
    logreg_gradient(train, model.weights, model.bias, cfg.l2_lambda, grad,
                    grad_bias);
    double grad_max = std::abs(grad_bias);
    double grad_sq = grad_bias * grad_bias;
    for (double g : grad) {
      grad_max = std::max(grad_max, std::abs(g));
      grad_sq += g * g;
    }
    if (grad_max < cfg.tol) break;

    // Backtracking line search; the initial step warm-starts from the last
    // accepted step so well-scaled problems take few objective evaluations.
    step = std::min(step * 2.0, 1e8);
    bool accepted = false;
    double cand_bias = model.bias;
    while (step > 1e-20) {
      for (std::uint32_t c = 0; c < d; ++c)
        candidate[c] = model.weights[c] - step * grad[c];
      cand_bias = model.bias - step * grad_bias;
      const double cand_obj =
          logreg_objective(train, candidate, cand_bias, cfg.l2_lambda);
      if (cand_obj <= objective - 1e-4 * step * grad_sq) {
        model.weights.swap(candidate);
        model.bias = cand_bias;
        objective = cand_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction at representable step size
    model.iterations = iter + 1;
    model.objective_trace.push_back(objective);
  }
  model.final_objective = objective;
  return model;
}

std::vector<double> predict_scores(const LogRegModel& model,
                                   const FeatureMatrix& fm) {
  if (model.weights.size() != fm.cols)
    throw std::invalid_argument("predict_scores: feature width mismatch");
  std::vector<double> margins;
  compute_margins(fm, model.weights, model.bias, margins);
  for (double& m : margins) m = stable_sigmoid(m);
  return margins;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("roc_auc: score/label size mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) {
    if (y == 1)
      ++n_pos;
    else if (y == 0)
      ++n_neg;
    else
      throw std::invalid_argument("roc_auc: labels must be 0/1");
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: both classes required");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank summation with average ranks over tie groups (Mann-Whitney).
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    i = j;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["track"] = track;
  j["mode"] = mode;
  j["roc_auc"] = roc_auc;
  j["n_train"] = n_train;
  j["n_test"] = n_test;
  j["n_pos_train"] = n_pos_train;
  j["n_pos_test"] = n_pos_test;
  nlohmann::ordered_json hp;
  hp["p"] = p;
  hp["q"] = q;
  hp["dims"] = dims;
  hp["impute"] = impute_strategy;
  if (!a2v_mapping.empty()) hp["a2v_mapping"] = a2v_mapping;
  hp["l2_lambda"] = l2_lambda;
  hp["test_fraction"] = test_fraction;
  j["hyperparameters"] = hp;
  j["seed"] = seed;
  return j.dump();
}

namespace {

std::string format_grid_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string format_auc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string GridResult::to_text() const {
  const std::size_t width = 10;
  std::ostringstream out;
  out << std::string(width, ' ');
  for (double p : p_grid) {
    std::string head = "p=" + format_grid_value(p);
    out << head << std::string(width > head.size() ? width - head.size() : 1, ' ');
  }
  out << '\n';
  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    std::string head = "q=" + format_grid_value(q_grid[qi]);
    out << head << std::string(width > head.size() ? width - head.size() : 1, ' ');
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi) {
      const std::size_t idx = qi * p_grid.size() + pi;
      std::string cell = format_auc(cells[idx].report.roc_auc);
      if (idx == best_index) cell += '*';
      out << cell << std::string(width > cell.size() ? width - cell.size() : 1, ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::string GridResult::to_csv() const {
  std::ostringstream out;
  out << "q\\p";
  for (double p : p_grid) out << ',' << format_grid_value(p);
  out << '\n';
  for (std::size_t qi = 0; qi < q_grid.size(); ++qi) {
    out << format_grid_value(q_grid[qi]);
    for (std::size_t pi = 0; pi < p_grid.size(); ++pi)
      out << ',' << format_auc(cells[qi * p_grid.size() + pi].report.roc_auc);
    out << '\n';
  }
  return out.str();
}

GridResult grid_search(const Graph& g, const NodeIdMap& ids,
                       std::span<const std::size_t> labeled_rows,
                       std::span<const int> labels,
                       const FeatureMatrix* attrs,
                       std::span<const double> p_grid,
                       std::span<const double> q_grid,
                       const GridSettings& settings) {
  if (labeled_rows.size() != labels.size())
    throw std::invalid_argument("grid_search: row/label size mismatch");
  if (p_grid.empty() || q_grid.empty())
    throw std::invalid_argument("grid_search: empty grid");
  if (attrs != nullptr && attrs->rows != g.node_count())
    throw std::invalid_argument("grid_search: attrs rows must match graph nodes");

  // One split, shared by every cell.
  const SplitIndices split =
      stratified_split(labels, settings.test_fraction, settings.split_seed);

  GridResult result;
  result.p_grid.assign(p_grid.begin(), p_grid.end());
  result.q_grid.assign(q_grid.begin(), q_grid.end());
  result.cells.resize(p_grid.size() * q_grid.size());

  auto run_cell = [&](std::size_t qi, std::size_t pi) {
    WalkConfig walk = settings.walk;
    walk.p = p_grid[pi];
    walk.q = q_grid[qi];
    const WalkCorpus corpus = generate_corpus(g, walk);
    const EmbeddingMatrix emb =
        train_node2vec(corpus, ids, settings.embed, nullptr);

    LabeledDataset ds;
    ds.labels.assign(labels.begin(), labels.end());
    ds.features.rows = labeled_rows.size();
    ds.features.cols = emb.dims + (attrs != nullptr ? attrs->cols : 0);
    ds.features.values.resize(ds.features.rows *
                              static_cast<std::size_t>(ds.features.cols));
    for (std::size_t i = 0; i < labeled_rows.size(); ++i) {
      const std::size_t node = labeled_rows[i];
      ds.features.row_ids.push_back(ids.label(static_cast<std::uint32_t>(node)));
      double* dst = ds.features.values.data() + i * ds.features.cols;
      const auto row = emb.row(node);
      std::copy(row.begin(), row.end(), dst);
      if (attrs != nullptr) {
        const auto arow = attrs->row(node);
        std::copy(arow.begin(), arow.end(), dst + emb.dims);
      }
    }
    for (std::uint32_t j = 0; j < ds.features.cols; ++j)
      ds.features.column_names.push_back("c" + std::to_string(j));

    const LabeledDataset train_ds = subset(ds, split.train);
    const LabeledDataset test_ds = subset(ds, split.test);
    const LogRegModel model = train_logreg(train_ds, settings.logreg);
    const std::vector<double> scores = predict_scores(model, test_ds.features);

    GridCell& cell = result.cells[qi * p_grid.size() + pi];
    cell.p = walk.p;
    cell.q = walk.q;
    EvalReport& rep = cell.report;
    rep.roc_auc = roc_auc(scores, test_ds.labels);
    rep.n_train = train_ds.labels.size();
    rep.n_test = test_ds.labels.size();
    rep.n_pos_train = static_cast<std::size_t>(
        std::count(train_ds.labels.begin(), train_ds.labels.end(), 1));
    rep.n_pos_test = static_cast<std::size_t>(
        std::count(test_ds.labels.begin(), test_ds.labels.end(), 1));
    rep.mode = attrs != nullptr ? "concat" : "n2v-only";
    rep.p = walk.p;
    rep.q = walk.q;
    rep.dims = settings.embed.dims;
    rep.impute_strategy = attrs != nullptr ? "median" : "";
    rep.l2_lambda = settings.logreg.l2_lambda;
    rep.test_fraction = settings.test_fraction;
    rep.seed = settings.split_seed;
  };

  const std::size_t n_cells = result.cells.size();
  const unsigned workers =
      std::min<unsigned>(std::max(1u, settings.cell_threads),
                         static_cast<unsigned>(n_cells));
  if (workers == 1) {
    for (std::size_t qi = 0; qi < q_grid.size(); ++qi)
      for (std::size_t pi = 0; pi < p_grid.size(); ++pi) run_cell(qi, pi);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= n_cells) return;
        run_cell(idx / p_grid.size(), idx % p_grid.size());
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.best_index = 0;
  for (std::size_t i = 1; i < result.cells.size(); ++i)
    if (result.cells[i].report.roc_auc >
        result.cells[result.best_index].report.roc_auc)
      result.best_index = i;
  return result;
}

}  // namespace botdet
