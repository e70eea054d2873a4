#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "botdet/io_util.hpp"
#include "botdet/pipeline.hpp"

using namespace botdet;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("botdet_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

PipelineConfig tiny_config(const fs::path& out_dir) {
  PipelineConfig cfg;
  cfg.use_synth = true;
  cfg.synth.n_humans = 200;
  cfg.synth.n_communities = 4;
  cfg.synth.intra_p = 0.12;
  cfg.synth.inter_p = 0.005;
  cfg.synth.n_technical = 8;
  cfg.synth.n_sophisticated = 6;
  cfg.synth.technical_degree = 6.0;
  cfg.synth.seed = 900;
  cfg.walk.walk_length = 15;
  cfg.walk.walks_per_node = 4;
  cfg.embed.dims = 8;
  cfg.embed.epochs = 2;
  cfg.embed.context_size = 5;
  cfg.embed.total_samples = 30'000;
  cfg.city_min_count = 5;
  cfg.seed = 900;
  cfg.out_dir = out_dir.string();
  return cfg;
}

bool no_tmp_left(const fs::path& dir) {
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.path().string().ends_with(".tmp")) return false;
  return true;
}

}  // namespace

TEST_CASE("run-all: every mode produces a finite AUC and a report file") {
  for (const std::string mode :
       {std::string("features-only"), std::string("n2v-only"),
        std::string("a2v"), std::string("concat")}) {
    const fs::path dir = fresh_dir("runall_" + mode);
    PipelineConfig cfg = tiny_config(dir);
    cfg.mode = mode;
    const EvalReport report = cmd_run_all(cfg);
    CHECK(report.roc_auc >= 0.0);
    CHECK(report.roc_auc <= 1.0);
    CHECK(report.mode == mode);

    const std::string report_text = read_text_file(dir / "report.jsonl");
    const auto parsed = nlohmann::json::parse(report_text);
    CHECK(parsed["roc_auc"].get<double>() == report.roc_auc);
    CHECK(no_tmp_left(dir));
    fs::remove_all(dir);
  }
}

TEST_CASE("run-all: deterministic mode is byte-identical across runs") {
  const fs::path dir1 = fresh_dir("det1");
  const fs::path dir2 = fresh_dir("det2");
  PipelineConfig cfg1 = tiny_config(dir1);
  cfg1.mode = "concat";
  PipelineConfig cfg2 = cfg1;
  cfg2.out_dir = dir2.string();
  cmd_run_all(cfg1);
  cmd_run_all(cfg2);
  CHECK(read_text_file(dir1 / "report.jsonl") ==
        read_text_file(dir2 / "report.jsonl"));
  CHECK(read_text_file(dir1 / "embeddings_n2v.txt") ==
        read_text_file(dir2 / "embeddings_n2v.txt"));
  CHECK(read_text_file(dir1 / "corpus.txt") == read_text_file(dir2 / "corpus.txt"));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("stages compose through files when run one at a time") {
  const fs::path dir = fresh_dir("staged");
  PipelineConfig cfg = tiny_config(dir);
  cfg.mode = "n2v-only";
  cmd_synth(cfg);
  CHECK(fs::exists(dir / "edges.tsv"));
  CHECK(fs::exists(dir / "profiles.csv"));
  CHECK(fs::exists(dir / "labels.csv"));

  cmd_walk(cfg);
  CHECK(fs::exists(dir / "corpus.txt"));

  cmd_embed_n2v(cfg);
  CHECK(fs::exists(dir / "embeddings_n2v.txt"));

  cmd_features(cfg);
  CHECK(fs::exists(dir / "features.csv"));
  std::ifstream feats(dir / "features.csv");
  const FeatureMatrix fm = read_feature_matrix(feats, "features.csv");
  CHECK(fm.rows == 214);  // every node gets a row
  CHECK(fm.has_mask());

  const EvalReport report = cmd_train_eval(cfg);
  CHECK(report.roc_auc >= 0.0);
  CHECK(report.roc_auc <= 1.0);

  // manifests exist and parse
  for (const char* name :
       {"manifest-synth.json", "manifest-walk.json", "manifest-embed-n2v.json",
        "manifest-features.json", "manifest-train-eval.json"}) {
    const auto manifest = nlohmann::json::parse(read_text_file(dir / name));
    CHECK(manifest.contains("command"));
    CHECK(manifest.contains("config"));
    CHECK(manifest.contains("inputs"));
    CHECK(manifest.contains("artifacts"));
    CHECK(manifest.contains("timings_ms"));
  }
  fs::remove_all(dir);
}

TEST_CASE("train-eval without upstream artifacts fails with a clear error") {
  const fs::path dir = fresh_dir("missing");
  PipelineConfig cfg = tiny_config(dir);
  cfg.mode = "n2v-only";
  cmd_synth(cfg);
  CHECK_THROWS_WITH_AS(cmd_train_eval(cfg), doctest::Contains("embed stage"),
                       std::runtime_error);

  PipelineConfig no_inputs;
  no_inputs.mode = "features-only";
  CHECK_THROWS_WITH_AS(cmd_train_eval(no_inputs), doctest::Contains("--edges"),
                       std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("grid: writes table artifacts with the argmax starred") {
  const fs::path dir = fresh_dir("grid");
  PipelineConfig cfg = tiny_config(dir);
  cfg.mode = "n2v-only";
  cfg.p_grid = {0.5, 2.0};
  cfg.q_grid = {0.5, 2.0};
  cfg.threads = 2;
  cmd_synth(cfg);
  const GridResult result = cmd_grid(cfg);
  CHECK(result.cells.size() == 4);

  const std::string table = read_text_file(dir / "grid.txt");
  CHECK(table.find("p=0.5") != std::string::npos);
  CHECK(table.find("q=2") != std::string::npos);
  CHECK(table.find('*') != std::string::npos);
  CHECK(fs::exists(dir / "grid.csv"));

  std::size_t lines = 0;
  std::istringstream jsonl(read_text_file(dir / "grid.jsonl"));
  std::string line;
  while (std::getline(jsonl, line)) {
    const auto parsed = nlohmann::json::parse(line);
    CHECK(parsed["hyperparameters"]["dims"].get<int>() == 8);
    ++lines;
  }
  CHECK(lines == 4);
  fs::remove_all(dir);
}

TEST_CASE("imputation strategies produce comparable reports on shared input") {
  const fs::path dir = fresh_dir("impute_cmp");
  PipelineConfig cfg = tiny_config(dir);
  cfg.mode = "features-only";
  cfg.track = "technical";
  cmd_synth(cfg);

  cfg.impute = ImputeStrategy::MedianOfObserved();
  const EvalReport median = cmd_train_eval(cfg);
  cfg.impute = ImputeStrategy::Constant(0.0);
  const EvalReport constant = cmd_train_eval(cfg);

  CHECK(median.impute_strategy == "median");
  CHECK(constant.impute_strategy == "constant(0)");
  // identical split: same counts on both runs
  CHECK(median.n_train == constant.n_train);
  CHECK(median.n_test == constant.n_test);
  fs::remove_all(dir);
}
