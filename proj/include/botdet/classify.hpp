#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botdet/features.hpp"
#include "botdet/walker.hpp"

namespace botdet {

struct LabeledDataset {
  FeatureMatrix features;   // imputed (no mask)
  std::vector<int> labels;  // 0 / 1, row-aligned

  void validate() const;
};

LabeledDataset subset(const LabeledDataset& ds,
                      std::span<const std::size_t> rows);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded stratified split preserving per-class proportions within rounding;
// every class keeps at least one member on each side. Throws if any class
// has fewer than 2 members or test_fraction is outside (0, 1).
SplitIndices stratified_split(std::span<const int> labels, double test_fraction,
                              std::uint64_t seed);

struct LogRegConfig {
  double l2_lambda = 1e-4;
  double tol = 1e-6;  // max-norm of the gradient
  std::uint32_t max_iterations = 5000;
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_lambda = 0.0;
  std::uint32_t iterations = 0;
  double final_objective = 0.0;
  std::vector<double> objective_trace;  // objective after each iteration
};

// Mean logistic loss with L2 penalty on the weights (bias unregularized):
//   (1/n) sum log(1 + exp(-y_i (w.x_i + b))) + lambda ||w||^2,  y in {-1,+1}.
double logreg_objective(const LabeledDataset& ds, std::span<const double> w,
                        double bias, double l2_lambda);
// Gradient of the same objective; grad_w must have width cols.
void logreg_gradient(const LabeledDataset& ds, std::span<const double> w,
                     double bias, double l2_lambda, std::span<double> grad_w,
                     double& grad_bias);

// Full-batch gradient descent with backtracking (Armijo) line search.
// Deterministic; stops when the gradient max-norm drops below cfg.tol.
LogRegModel train_logreg(const LabeledDataset& train, const LogRegConfig& cfg);

// sigma(w.x + b) per row.
std::vector<double> predict_scores(const LogRegModel& model,
                                   const FeatureMatrix& fm);

// P(score_pos > score_neg) + 0.5 P(tie), via rank summation with average
// ranks for ties (O(n log n)). Throws if either class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  double roc_auc = 0.0;
  std::size_t n_train = 0, n_test = 0;
  std::size_t n_pos_train = 0, n_pos_test = 0;
  std::string track;  // technical | sophisticated
  std::string mode;   // features-only | n2v-only | a2v | concat
  double p = 1.0, q = 1.0;
  std::uint32_t dims = 0;
  std::string impute_strategy;
  std::string a2v_mapping;  // empty unless mode == a2v
  double l2_lambda = 0.0;
  double test_fraction = 0.0;
  std::uint64_t seed = 0;

  std::string to_json() const;  // single deterministic JSON line
};

struct GridSettings {
  WalkConfig walk;        // p, q overridden per cell
  EmbedConfig embed;
  LogRegConfig logreg;
  double test_fraction = 0.3;
  std::uint64_t split_seed = 0;
  unsigned cell_threads = 1;  // concurrent grid cells
};

struct GridCell {
  double p = 1.0, q = 1.0;
  EvalReport report;
};

struct GridResult {
  std::vector<double> p_grid, q_grid;
  std::vector<GridCell> cells;  // row-major over (q, p)
  std::size_t best_index = 0;

  std::string to_text() const;  // aligned table, best cell starred
  std::string to_csv() const;
};

// Trains one node2vec model per (p, q) cell over the given graph, evaluates
// a logistic regression on the labeled rows, and tabulates AUCs. All cells
// share the same stratified split and seed. `attrs`, when given, is a
// preprocessed feature matrix concatenated to each cell's embeddings
// (rows aligned with graph node indices).
GridResult grid_search(const Graph& g, const NodeIdMap& ids,
                       std::span<const std::size_t> labeled_rows,
                       std::span<const int> labels,
                       const FeatureMatrix* attrs,
                       std::span<const double> p_grid,
                       std::span<const double> q_grid,
                       const GridSettings& settings);

}  // namespace botdet
