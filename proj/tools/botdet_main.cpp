#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "botdet/pipeline.hpp"

namespace {

void print_report(const botdet::EvalReport& report) {
  std::cout << report.to_json() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"botdet: bot detection on social graphs via biased random "
               "walks, node2vec/attri2vec embeddings and logistic regression"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file; command-line flags win");

  botdet::PipelineConfig cfg;
  std::string impute_name = "median";
  double impute_constant = 0.0;

  app.add_option("--seed", cfg.seed, "Global seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker cap for parallel stages")
      ->capture_default_str();
  app.add_option("--out-dir", cfg.out_dir, "Artifact directory")
      ->capture_default_str();

  app.add_option("--edges", cfg.edges_path, "Edge-list file (src dst [weight])");
  app.add_option("--profiles", cfg.profiles_path, "Profile CSV/TSV");
  app.add_option("--labels", cfg.labels_path, "Labels CSV (id,class)");
  app.add_flag("--synth", cfg.use_synth,
               "Generate a synthetic dataset into --out-dir and use it");

  app.add_option("--synth-humans", cfg.synth.n_humans)->capture_default_str();
  app.add_option("--synth-communities", cfg.synth.n_communities)
      ->capture_default_str();
  app.add_option("--synth-intra", cfg.synth.intra_p,
                 "Intra-community edge probability")->capture_default_str();
  app.add_option("--synth-inter", cfg.synth.inter_p,
                 "Inter-community edge probability")->capture_default_str();
  app.add_option("--synth-technical", cfg.synth.n_technical)->capture_default_str();
  app.add_option("--synth-sophisticated", cfg.synth.n_sophisticated)
      ->capture_default_str();
  app.add_option("--synth-degree", cfg.synth.technical_degree,
                 "Mean technical-bot degree")->capture_default_str();
  app.add_option("--synth-mimic", cfg.synth.sophisticated_mimic_fraction,
                 "Fraction of template neighbors a sophisticated bot clones")
      ->capture_default_str();
  app.add_option("--synth-cities", cfg.synth.n_cities)->capture_default_str();

  app.add_option("--track", cfg.track, "technical | sophisticated")
      ->capture_default_str();
  app.add_option("--mode", cfg.mode, "features-only | n2v-only | a2v | concat")
      ->capture_default_str();

  app.add_option("-p,--p", cfg.walk.p, "Return parameter")->capture_default_str();
  app.add_option("-q,--q", cfg.walk.q, "In-out parameter")->capture_default_str();
  app.add_option("--walk-length", cfg.walk.walk_length)->capture_default_str();
  app.add_option("--walks-per-node", cfg.walk.walks_per_node)->capture_default_str();
  app.add_option("--transition-budget", cfg.transition_budget,
                 "Precomputed transition-table entry budget (0 = on the fly)")
      ->capture_default_str();

  app.add_option("--dims", cfg.embed.dims, "Embedding dimensions")
      ->capture_default_str();
  app.add_option("--context", cfg.embed.context_size)->capture_default_str();
  app.add_option("--negatives", cfg.embed.negatives_per_positive)
      ->capture_default_str();
  app.add_option("--epochs", cfg.embed.epochs, "node2vec SGD epochs")
      ->capture_default_str();
  app.add_option("--samples", cfg.embed.total_samples, "attri2vec sample budget")
      ->capture_default_str();
  app.add_option("--lr", cfg.embed.lr_initial)->capture_default_str();
  app.add_option("--mapping", cfg.a2v_mapping, "relu | sigmoid | fourier")
      ->capture_default_str();
  app.add_flag("--hogwild", cfg.hogwild,
               "Multi-worker embedding updates (non-deterministic)");
  app.add_flag("--progress", cfg.progress,
               "Emit JSON training progress on stderr");

  app.add_option("--impute", impute_name, "median | constant")
      ->capture_default_str();
  app.add_option("--impute-constant", impute_constant,
                 "Fill value for --impute constant")->capture_default_str();
  app.add_option("--city-min-count", cfg.city_min_count,
                 "City vocabulary frequency threshold")->capture_default_str();
  app.add_option("--lambda", cfg.logreg.l2_lambda, "L2 strength")
      ->capture_default_str();
  app.add_option("--max-iterations", cfg.logreg.max_iterations)
      ->capture_default_str();
  app.add_option("--test-fraction", cfg.test_fraction)->capture_default_str();

  app.add_option("--p-grid", cfg.p_grid, "Grid values for p")
      ->delimiter(',')->capture_default_str();
  app.add_option("--q-grid", cfg.q_grid, "Grid values for q")
      ->delimiter(',')->capture_default_str();

  app.add_option("--corpus", cfg.corpus_path, "Walk corpus path override");
  app.add_option("--embeddings", cfg.embeddings_path, "Embedding file override");
  app.add_option("--features-file", cfg.features_path,
                 "Feature matrix path override");
  app.add_option("--report", cfg.report_path, "Report path override");

  auto add_cmd = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    return sub;
  };
  CLI::App* c_synth = add_cmd("synth", "Generate a labeled synthetic dataset");
  CLI::App* c_walk = add_cmd("walk", "Generate the biased walk corpus");
  CLI::App* c_embed_n2v = add_cmd("embed-n2v", "Train node2vec embeddings");
  CLI::App* c_embed_a2v = add_cmd("embed-a2v", "Train attri2vec embeddings");
  CLI::App* c_features = add_cmd("features", "Encode profile features");
  CLI::App* c_train = add_cmd("train-eval", "Train the classifier and report AUC");
  CLI::App* c_grid = add_cmd("grid", "AUC grid search over p and q");
  CLI::App* c_run_all = add_cmd("run-all", "Chain all stages end to end");

  CLI11_PARSE(app, argc, argv);

  cfg.synth.seed = cfg.seed;
  if (impute_name == "median") {
    cfg.impute = botdet::ImputeStrategy::MedianOfObserved();
  } else if (impute_name == "constant") {
    cfg.impute = botdet::ImputeStrategy::Constant(impute_constant);
  } else {
    std::cerr << "{\"error\":\"unknown --impute value (median|constant)\"}\n";
    return 1;
  }

  try {
    if (c_synth->parsed()) {
      cfg.use_synth = true;
      botdet::cmd_synth(cfg);
    } else if (c_walk->parsed()) {
      botdet::cmd_walk(cfg);
    } else if (c_embed_n2v->parsed()) {
      botdet::cmd_embed_n2v(cfg);
    } else if (c_embed_a2v->parsed()) {
      botdet::cmd_embed_a2v(cfg);
    } else if (c_features->parsed()) {
      botdet::cmd_features(cfg);
    } else if (c_train->parsed()) {
      print_report(botdet::cmd_train_eval(cfg));
    } else if (c_grid->parsed()) {
      const botdet::GridResult result = botdet::cmd_grid(cfg);
      std::cout << result.to_text();
      const auto& best = result.cells[result.best_index];
      std::cout << "best: p=" << best.p << " q=" << best.q
                << " auc=" << best.report.roc_auc << '\n';
    } else if (c_run_all->parsed()) {
      print_report(botdet::cmd_run_all(cfg));
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
