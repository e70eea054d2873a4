#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "botdet/classify.hpp"
#include "botdet/embed.hpp"
#include "botdet/features.hpp"
#include "botdet/synthgen.hpp"
#include "botdet/walker.hpp"

namespace botdet {

// Resolved configuration for one CLI invocation. Stages communicate only
// through the artifact files named here, so any stage can be re-run in
// isolation against a previous run's output directory.
struct PipelineConfig {
  // Inputs: supply an on-disk dataset or let `synth` generate one.
  std::string edges_path;
  std::string profiles_path;
  std::string labels_path;
  bool use_synth = false;
  SynthConfig synth;

  std::string track = "technical";  // technical | sophisticated
  std::string mode = "n2v-only";    // features-only | n2v-only | a2v | concat

  WalkConfig walk;
  EmbedConfig embed;
  std::string a2v_mapping = "sigmoid";
  ImputeStrategy impute = ImputeStrategy::MedianOfObserved();
  std::uint32_t city_min_count = 10;
  LogRegConfig logreg;
  double test_fraction = 0.3;
  std::vector<double> p_grid{0.25, 0.5, 1, 2, 4};
  std::vector<double> q_grid{0.25, 0.5, 1, 2, 4};

  // Transition-table precomputation budget in entries; 0 keeps walk
  // generation on the fly.
  std::size_t transition_budget = 0;

  std::string out_dir = "out";
  std::uint64_t seed = 42;
  unsigned threads = 1;
  bool hogwild = false;  // allow racy multi-worker embedding updates
  bool progress = false; // emit training progress JSON lines

  // Artifact locations; empty -> default path under out_dir.
  std::string corpus_path;
  std::string embeddings_path;
  std::string features_path;
  std::string report_path;

  std::string resolved_corpus_path() const;
  std::string resolved_embeddings_path() const;
  std::string resolved_features_path() const;
  std::string resolved_report_path() const;

  void validate() const;
};

// Each command reads its inputs from files, writes its artifacts atomically
// and records a manifest `manifest-<command>.json` in out_dir with the
// resolved config, input content hashes, artifact paths and timings.
void cmd_synth(const PipelineConfig& cfg);
void cmd_walk(const PipelineConfig& cfg);
void cmd_embed_n2v(const PipelineConfig& cfg);
void cmd_embed_a2v(const PipelineConfig& cfg);
void cmd_features(const PipelineConfig& cfg);
EvalReport cmd_train_eval(const PipelineConfig& cfg);
GridResult cmd_grid(const PipelineConfig& cfg);
// Chains synth (optional) -> walk -> embed -> features -> train-eval.
EvalReport cmd_run_all(const PipelineConfig& cfg);

}  // namespace botdet
