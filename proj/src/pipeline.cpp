#include "botdet/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#include "botdet/io_util.hpp"

namespace botdet {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::string iso_utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string impute_to_string(const ImputeStrategy& s) {
  if (s.kind == ImputeStrategy::Kind::kMedianOfObserved) return "median";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "constant(%g)", s.constant);
  return buf;
}

ordered_json config_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["track"] = cfg.track;
  j["mode"] = cfg.mode;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["hogwild"] = cfg.hogwild;
  j["out_dir"] = cfg.out_dir;
  ordered_json walk;
  walk["p"] = cfg.walk.p;
  walk["q"] = cfg.walk.q;
  walk["walk_length"] = cfg.walk.walk_length;
  walk["walks_per_node"] = cfg.walk.walks_per_node;
  walk["transition_budget"] = cfg.transition_budget;
  j["walk"] = walk;
  ordered_json embed;
  embed["dims"] = cfg.embed.dims;
  embed["context_size"] = cfg.embed.context_size;
  embed["negatives"] = cfg.embed.negatives_per_positive;
  embed["epochs"] = cfg.embed.epochs;
  embed["total_samples"] = cfg.embed.total_samples;
  embed["lr_initial"] = cfg.embed.lr_initial;
  embed["a2v_mapping"] = cfg.a2v_mapping;
  j["embed"] = embed;
  ordered_json cls;
  cls["impute"] = impute_to_string(cfg.impute);
  cls["city_min_count"] = cfg.city_min_count;
  cls["l2_lambda"] = cfg.logreg.l2_lambda;
  cls["test_fraction"] = cfg.test_fraction;
  j["classify"] = cls;
  j["p_grid"] = cfg.p_grid;
  j["q_grid"] = cfg.q_grid;
  if (cfg.use_synth) {
    ordered_json s;
    s["n_humans"] = cfg.synth.n_humans;
    s["n_communities"] = cfg.synth.n_communities;
    s["intra_p"] = cfg.synth.intra_p;
    s["inter_p"] = cfg.synth.inter_p;
    s["n_technical"] = cfg.synth.n_technical;
    s["n_sophisticated"] = cfg.synth.n_sophisticated;
    s["technical_degree"] = cfg.synth.technical_degree;
    s["sophisticated_mimic_fraction"] = cfg.synth.sophisticated_mimic_fraction;
    s["n_cities"] = cfg.synth.n_cities;
    s["seed"] = cfg.synth.seed;
    s["attribute_models"] = "built-in per-class defaults";
    j["synth"] = s;
  }
  return j;
}

class ManifestBuilder {
 public:
  explicit ManifestBuilder(std::string command) : command_(std::move(command)) {}

  // Call after the stage has opened the file, so missing-input errors come
  // from the stage itself with actionable wording.
  void add_input(const std::string& name, const std::string& path) {
    ordered_json e;
    e["path"] = path;
    e["fnv1a64"] = fnv1a64_file_hex(path);
    inputs_[name] = e;
  }
  void add_artifact(const std::string& path) { artifacts_.push_back(path); }
  void add_timing(const std::string& stage, double ms) { timings_[stage] = ms; }
  void add_note(const std::string& note) { notes_.push_back(note); }

  void write(const PipelineConfig& cfg) const {
    ordered_json j;
    j["command"] = command_;
    j["created"] = iso_utc_now();
    j["config"] = config_to_json(cfg);
    j["inputs"] = inputs_;
    j["artifacts"] = artifacts_;
    j["timings_ms"] = timings_;
    if (!notes_.empty()) j["notes"] = notes_;
    const std::string path =
        join(cfg.out_dir, ("manifest-" + command_ + ".json").c_str());
    atomic_write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

 private:
  std::string command_;
  ordered_json inputs_ = ordered_json::object();
  std::vector<std::string> artifacts_;
  ordered_json timings_ = ordered_json::object();
  std::vector<std::string> notes_;
};

class StageClock {
 public:
  StageClock() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string require_input(const std::string& explicit_path,
                          const PipelineConfig& cfg, const char* synth_name,
                          const char* flag) {
  if (!explicit_path.empty()) return explicit_path;
  if (cfg.use_synth) return join(cfg.out_dir, synth_name);
  throw std::runtime_error(std::string("missing input: pass ") + flag +
                           " or --synth");
}
std::string input_edges(const PipelineConfig& cfg) {
  return require_input(cfg.edges_path, cfg, "edges.tsv", "--edges");
}
std::string input_profiles(const PipelineConfig& cfg) {
  return require_input(cfg.profiles_path, cfg, "profiles.csv", "--profiles");
}
std::string input_labels(const PipelineConfig& cfg) {
  return require_input(cfg.labels_path, cfg, "labels.csv", "--labels");
}

struct LoadedGraph {
  Graph graph;
  NodeIdMap ids;
  std::size_t nodes_before_lcc = 0;
};

LoadedGraph load_graph_lcc(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edges file `" + path + "`");
  EdgeListLoadResult loaded = load_edge_list(in, path);
  if (loaded.self_loops_skipped > 0)
    std::cerr << "warning: skipped " << loaded.self_loops_skipped
              << " self-loop(s) in " << path << '\n';
  ComponentResult lcc = largest_connected_component(loaded.graph, loaded.ids);
  return {std::move(lcc.graph), std::move(lcc.ids), loaded.graph.node_count()};
}

std::vector<LabelRecord> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open labels file `" + path + "`");
  return read_labels_csv(in, path);
}

std::vector<ProfileRecord> load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profiles file `" + path + "`");
  return read_profiles_csv(in, path);
}

NodeClass track_bot_class(const std::string& track) {
  if (track == "technical") return NodeClass::kTechnical;
  if (track == "sophisticated") return NodeClass::kSophisticated;
  throw std::runtime_error("unknown track `" + track +
                           "` (expected technical|sophisticated)");
}

struct TrackData {
  std::vector<std::size_t> rows;  // dense node indices, ascending
  std::vector<int> labels;        // 1 = bot of the current track
  std::size_t dropped = 0;        // labeled ids absent from the LCC
};

TrackData select_track_rows(const NodeIdMap& ids,
                            const std::vector<LabelRecord>& labels,
                            const std::string& track) {
  const NodeClass bot = track_bot_class(track);
  std::vector<std::pair<std::size_t, int>> picked;
  TrackData data;
  for (const auto& l : labels) {
    const auto idx = ids.find(l.id);
    if (!idx) {
      ++data.dropped;
      continue;
    }
    if (l.node_class == NodeClass::kHuman)
      picked.emplace_back(*idx, 0);
    else if (l.node_class == bot)
      picked.emplace_back(*idx, 1);
    // bots of the other track stay in the graph but out of this dataset
  }
  std::sort(picked.begin(), picked.end());
  data.rows.reserve(picked.size());
  data.labels.reserve(picked.size());
  for (const auto& [row, y] : picked) {
    data.rows.push_back(row);
    data.labels.push_back(y);
  }
  return data;
}

// Profile records aligned with the given node rows; every node must have one.
std::vector<ProfileRecord> align_records(
    const std::vector<ProfileRecord>& records, const NodeIdMap& ids,
    std::span<const std::size_t> rows, const std::string& source) {
  std::unordered_map<std::string, const ProfileRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<ProfileRecord> aligned;
  aligned.reserve(rows.size());
  std::size_t missing = 0;
  std::string first_missing;
  for (std::size_t row : rows) {
    const std::string& label = ids.label(static_cast<std::uint32_t>(row));
    auto it = by_id.find(label);
    if (it == by_id.end()) {
      if (missing == 0) first_missing = label;
      ++missing;
      aligned.emplace_back();
      continue;
    }
    aligned.push_back(*it->second);
  }
  if (missing > 0)
    throw std::runtime_error(source + ": " + std::to_string(missing) +
                             " graph node(s) without a profile record (first: `" +
                             first_missing + "`)");
  return aligned;
}

// Train-split schema, encode, impute, standardize with train statistics.
FeatureMatrix build_track_features(const std::vector<ProfileRecord>& track_records,
                                   const SplitIndices& split,
                                   const ImputeStrategy& strategy,
                                   std::uint32_t city_min_count) {
  std::vector<ProfileRecord> train_records;
  train_records.reserve(split.train.size());
  for (std::size_t r : split.train) train_records.push_back(track_records[r]);
  const EncodingSchema schema = fit_schema(train_records, city_min_count);
  const FeatureMatrix encoded = encode(track_records, schema);
  const FeatureMatrix imputed = impute(encoded, strategy);
  const FeatureMatrix train_fm = select_rows(imputed, split.train);
  const auto [unused, stats] = standardize(train_fm);
  auto [full, unused2] = standardize(imputed, &stats);
  return std::move(full);
}

EmbeddingMatrix load_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open embeddings file `" + path +
                             "` (run the embed stage first)");
  return load_embeddings(in);
}

// Rows of `emb` for the given graph nodes, as an EmbeddingMatrix.
EmbeddingMatrix embedding_for_rows(const EmbeddingMatrix& emb,
                                   const NodeIdMap& ids,
                                   std::span<const std::size_t> rows) {
  std::unordered_map<std::string, std::size_t> emb_row;
  for (std::size_t i = 0; i < emb.labels.size(); ++i) emb_row[emb.labels[i]] = i;
  EmbeddingMatrix out;
  out.dims = emb.dims;
  out.values.reserve(rows.size() * static_cast<std::size_t>(emb.dims));
  std::size_t missing = 0;
  std::string first_missing;
  for (std::size_t row : rows) {
    const std::string& label = ids.label(static_cast<std::uint32_t>(row));
    auto it = emb_row.find(label);
    if (it == emb_row.end()) {
      if (missing == 0) first_missing = label;
      ++missing;
      continue;
    }
    out.labels.push_back(label);
    const auto src = emb.row(it->second);
    out.values.insert(out.values.end(), src.begin(), src.end());
  }
  if (missing > 0)
    throw std::runtime_error("embeddings: " + std::to_string(missing) +
                             " graph node(s) missing (first: `" + first_missing +
                             "`); regenerate the embedding for this graph");
  return out;
}

FeatureMatrix embedding_as_features(const EmbeddingMatrix& emb) {
  FeatureMatrix fm;
  fm.rows = emb.node_count();
  fm.cols = emb.dims;
  fm.values = emb.values;
  fm.row_ids = emb.labels;
  for (std::uint32_t j = 0; j < emb.dims; ++j)
    fm.column_names.push_back("emb_" + std::to_string(j));
  return fm;
}

}  // namespace

std::string PipelineConfig::resolved_corpus_path() const {
  return corpus_path.empty() ? join(out_dir, "corpus.txt") : corpus_path;
}
std::string PipelineConfig::resolved_embeddings_path() const {
  if (!embeddings_path.empty()) return embeddings_path;
  return join(out_dir, mode == "a2v" ? "embeddings_a2v.txt" : "embeddings_n2v.txt");
}
std::string PipelineConfig::resolved_features_path() const {
  return features_path.empty() ? join(out_dir, "features.csv") : features_path;
}
std::string PipelineConfig::resolved_report_path() const {
  return report_path.empty() ? join(out_dir, "report.jsonl") : report_path;
}

void PipelineConfig::validate() const {
  track_bot_class(track);
  if (mode != "features-only" && mode != "n2v-only" && mode != "a2v" &&
      mode != "concat")
    throw std::runtime_error(
        "unknown mode `" + mode +
        "` (expected features-only|n2v-only|a2v|concat)");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::runtime_error("test_fraction must be in (0, 1)");
  walk.validate();
  embed.validate();
  a2v_mapping_from_string(a2v_mapping);
}

void cmd_synth(const PipelineConfig& cfg) {
  cfg.validate();
  ManifestBuilder manifest("synth");
  StageClock clock;
  SynthConfig synth = cfg.synth;
  const SynthDataset ds = generate(synth);
  export_dataset(ds, cfg.out_dir);
  manifest.add_timing("synth", clock.ms());
  manifest.add_artifact(join(cfg.out_dir, "edges.tsv"));
  manifest.add_artifact(join(cfg.out_dir, "profiles.csv"));
  manifest.add_artifact(join(cfg.out_dir, "labels.csv"));
  manifest.add_note("nodes=" + std::to_string(ds.graph.node_count()) +
                    " edges=" + std::to_string(ds.graph.edge_count()));
  manifest.write(cfg);
}

void cmd_walk(const PipelineConfig& cfg) {
  cfg.validate();
  ManifestBuilder manifest("walk");
  const std::string edges = input_edges(cfg);

  StageClock clock;
  const LoadedGraph lg = load_graph_lcc(edges);
  manifest.add_input("edges", edges);

  WalkConfig walk = cfg.walk;
  walk.seed = cfg.seed;
  TransitionStore store;
  const TransitionStore* store_ptr = nullptr;
  if (cfg.transition_budget > 0) {
    const std::size_t entries = TransitionStore::entry_count(lg.graph);
    if (entries <= cfg.transition_budget) {
      store = TransitionStore::build(lg.graph, walk.p, walk.q,
                                     cfg.transition_budget);
      store_ptr = &store;
      manifest.add_note("transition store: precomputed (" +
                        std::to_string(entries) + " entries)");
    } else {
      manifest.add_note("transition store: on-the-fly fallback (" +
                        std::to_string(entries) + " entries > budget " +
                        std::to_string(cfg.transition_budget) + ")");
    }
  }

  const WalkCorpus corpus = generate_corpus(lg.graph, walk, cfg.threads, store_ptr);
  const std::string out_path = cfg.resolved_corpus_path();
  atomic_write_file(out_path, [&](std::ostream& out) {
    write_corpus(corpus, lg.ids, out);
  });
  manifest.add_timing("walk", clock.ms());
  manifest.add_artifact(out_path);
  manifest.write(cfg);
}

void cmd_embed_n2v(const PipelineConfig& cfg) {
  cfg.validate();
  ManifestBuilder manifest("embed-n2v");
  const std::string corpus_path = cfg.resolved_corpus_path();

  StageClock clock;
  std::ifstream in(corpus_path);
  if (!in)
    throw std::runtime_error("cannot open corpus file `" + corpus_path +
                             "` (run the walk stage first)");
  auto [corpus, ids] = load_corpus(in);
  manifest.add_input("corpus", corpus_path);
  EmbedConfig embed = cfg.embed;
  embed.seed = cfg.seed;
  embed.threads = cfg.hogwild ? cfg.threads : 1;
  const EmbeddingMatrix emb =
      train_node2vec(corpus, ids, embed, cfg.progress ? &std::cerr : nullptr);

  const std::string out_path = cfg.resolved_embeddings_path();
  atomic_write_file(out_path, [&](std::ostream& out) { save_embeddings(emb, out); });
  manifest.add_timing("embed-n2v", clock.ms());
  manifest.add_artifact(out_path);
  manifest.write(cfg);
}

void cmd_embed_a2v(const PipelineConfig& cfg) {
  cfg.validate();
  ManifestBuilder manifest("embed-a2v");
  const std::string corpus_path = cfg.resolved_corpus_path();
  const std::string profiles_path = input_profiles(cfg);

  StageClock clock;
  std::ifstream in(corpus_path);
  if (!in)
    throw std::runtime_error("cannot open corpus file `" + corpus_path +
                             "` (run the walk stage first)");
  auto [corpus, ids] = load_corpus(in);
  manifest.add_input("corpus", corpus_path);

  const std::vector<ProfileRecord> records = load_profiles(profiles_path);
  manifest.add_input("profiles", profiles_path);
  std::vector<std::size_t> all_rows(ids.size());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  const std::vector<ProfileRecord> aligned =
      align_records(records, ids, all_rows, profiles_path);

  // Attribute preprocessing for the unsupervised trainer uses all rows.
  const EncodingSchema schema = fit_schema(aligned, cfg.city_min_count);
  const FeatureMatrix encoded = encode(aligned, schema);
  const FeatureMatrix imputed = impute(encoded, cfg.impute);
  auto [attrs, stats] = standardize(imputed);

  EmbedConfig embed = cfg.embed;
  embed.seed = cfg.seed;
  const A2vMapping mapping = a2v_mapping_from_string(cfg.a2v_mapping);
  const Attri2vecModel model =
      train_attri2vec(corpus, attrs.values, attrs.cols, embed, mapping,
                      cfg.progress ? &std::cerr : nullptr);
  const EmbeddingMatrix emb =
      attri2vec_embed_all(model, attrs.values, attrs.cols, ids.labels());

  const std::string out_path = cfg.resolved_embeddings_path();
  atomic_write_file(out_path, [&](std::ostream& out) { save_embeddings(emb, out); });
  manifest.add_timing("embed-a2v", clock.ms());
  manifest.add_artifact(out_path);
  manifest.write(cfg);
}

void cmd_features(const PipelineConfig& cfg) {
  cfg.validate();
  ManifestBuilder manifest("features");
  const std::string profiles_path = input_profiles(cfg);

  StageClock clock;
  const std::vector<ProfileRecord> records = load_profiles(profiles_path);
  manifest.add_input("profiles", profiles_path);
  const EncodingSchema schema = fit_schema(records, cfg.city_min_count);
  const FeatureMatrix encoded = encode(records, schema);

  const std::string out_path = cfg.resolved_features_path();
  atomic_write_file(out_path, [&](std::ostream& out) {
    write_feature_matrix(encoded, out);
  });
  manifest.add_timing("features", clock.ms());
  manifest.add_artifact(out_path);
  manifest.add_note("schema width " + std::to_string(schema.width()) + " (" +
                    std::to_string(schema.numeric_columns.size()) + " numeric + " +
                    std::to_string(schema.city_vocab.size()) + " city + 2 gender)");
  manifest.write(cfg);
}

EvalReport cmd_train_eval(const PipelineConfig& cfg) {
  cfg.validate();
  ManifestBuilder manifest("train-eval");
  const std::string edges_path = input_edges(cfg);
  const std::string labels_path = input_labels(cfg);

  const bool needs_features = cfg.mode == "features-only" || cfg.mode == "concat";
  const bool needs_embedding = cfg.mode != "features-only";

  StageClock clock;
  const LoadedGraph lg = load_graph_lcc(edges_path);
  manifest.add_input("edges", edges_path);
  const TrackData track = select_track_rows(lg.ids, load_labels(labels_path), cfg.track);
  manifest.add_input("labels", labels_path);
  if (track.dropped > 0)
    manifest.add_note(std::to_string(track.dropped) +
                      " labeled id(s) outside the largest component, dropped");

  const SplitIndices split =
      stratified_split(track.labels, cfg.test_fraction, cfg.seed);

  FeatureMatrix features;
  if (needs_features) {
    const std::string profiles_path = input_profiles(cfg);
    const std::vector<ProfileRecord> aligned = align_records(
        load_profiles(profiles_path), lg.ids, track.rows, profiles_path);
    manifest.add_input("profiles", profiles_path);
    features = build_track_features(aligned, split, cfg.impute, cfg.city_min_count);
  }

  FeatureMatrix x;
  if (needs_embedding) {
    const std::string emb_path = cfg.resolved_embeddings_path();
    const EmbeddingMatrix emb = embedding_for_rows(
        load_embeddings_file(emb_path), lg.ids, track.rows);
    manifest.add_input("embeddings", emb_path);
    x = cfg.mode == "concat" ? concat(emb, features) : embedding_as_features(emb);
  } else {
    x = std::move(features);
  }

  LabeledDataset ds{std::move(x), track.labels};
  const LabeledDataset train_ds = subset(ds, split.train);
  const LabeledDataset test_ds = subset(ds, split.test);
  const LogRegModel model = train_logreg(train_ds, cfg.logreg);
  const std::vector<double> scores = predict_scores(model, test_ds.features);

  EvalReport report;
  report.roc_auc = roc_auc(scores, test_ds.labels);
  report.n_train = train_ds.labels.size();
  report.n_test = test_ds.labels.size();
  report.n_pos_train = static_cast<std::size_t>(
      std::count(train_ds.labels.begin(), train_ds.labels.end(), 1));
  report.n_pos_test = static_cast<std::size_t>(
      std::count(test_ds.labels.begin(), test_ds.labels.end(), 1));
  report.track = cfg.track;
  report.mode = cfg.mode;
  report.p = cfg.walk.p;
  report.q = cfg.walk.q;
  report.dims = needs_embedding ? cfg.embed.dims : 0;
  report.impute_strategy = needs_features ? impute_to_string(cfg.impute) : "";
  report.a2v_mapping = cfg.mode == "a2v" ? cfg.a2v_mapping : "";
  report.l2_lambda = cfg.logreg.l2_lambda;
  report.test_fraction = cfg.test_fraction;
  report.seed = cfg.seed;

  const std::string report_path = cfg.resolved_report_path();
  atomic_write_file(report_path, [&](std::ostream& out) {
    out << report.to_json() << '\n';
  });
  manifest.add_timing("train-eval", clock.ms());
  manifest.add_artifact(report_path);
  manifest.write(cfg);
  return report;
}

GridResult cmd_grid(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.mode != "n2v-only" && cfg.mode != "concat")
    throw std::runtime_error("grid supports modes n2v-only and concat");
  ManifestBuilder manifest("grid");
  const std::string edges_path = input_edges(cfg);
  const std::string labels_path = input_labels(cfg);

  StageClock clock;
  const LoadedGraph lg = load_graph_lcc(edges_path);
  manifest.add_input("edges", edges_path);
  const TrackData track = select_track_rows(lg.ids, load_labels(labels_path), cfg.track);
  manifest.add_input("labels", labels_path);

  FeatureMatrix attrs;
  const FeatureMatrix* attrs_ptr = nullptr;
  if (cfg.mode == "concat") {
    // Shared split -> schema and standardization fitted on train rows only,
    // then applied to every graph node so each cell can concatenate.
    const std::string profiles_path = input_profiles(cfg);
    const std::vector<ProfileRecord> records = load_profiles(profiles_path);
    manifest.add_input("profiles", profiles_path);
    const SplitIndices split =
        stratified_split(track.labels, cfg.test_fraction, cfg.seed);
    std::vector<ProfileRecord> train_records;
    const std::vector<ProfileRecord> track_aligned =
        align_records(records, lg.ids, track.rows, profiles_path);
    for (std::size_t r : split.train) train_records.push_back(track_aligned[r]);
    const EncodingSchema schema = fit_schema(train_records, cfg.city_min_count);

    std::vector<std::size_t> all_rows(lg.ids.size());
    for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
    const std::vector<ProfileRecord> aligned =
        align_records(records, lg.ids, all_rows, profiles_path);
    const FeatureMatrix imputed = impute(encode(aligned, schema), cfg.impute);

    std::vector<std::size_t> train_nodes;
    for (std::size_t r : split.train) train_nodes.push_back(track.rows[r]);
    const auto [unused, stats] = standardize(select_rows(imputed, train_nodes));
    auto [full, unused2] = standardize(imputed, &stats);
    attrs = std::move(full);
    attrs_ptr = &attrs;
  }

  GridSettings settings;
  settings.walk = cfg.walk;
  settings.walk.seed = cfg.seed;
  settings.embed = cfg.embed;
  settings.embed.seed = cfg.seed;
  settings.embed.threads = 1;
  settings.logreg = cfg.logreg;
  settings.test_fraction = cfg.test_fraction;
  settings.split_seed = cfg.seed;
  settings.cell_threads = cfg.threads;

  GridResult result = grid_search(lg.graph, lg.ids, track.rows, track.labels,
                                  attrs_ptr, cfg.p_grid, cfg.q_grid, settings);
  for (auto& cell : result.cells) {
    cell.report.track = cfg.track;
    if (cfg.mode == "concat") cell.report.impute_strategy = impute_to_string(cfg.impute);
  }

  const std::string text_path = join(cfg.out_dir, "grid.txt");
  const std::string csv_path = join(cfg.out_dir, "grid.csv");
  const std::string jsonl_path = join(cfg.out_dir, "grid.jsonl");
  atomic_write_file(text_path, [&](std::ostream& out) { out << result.to_text(); });
  atomic_write_file(csv_path, [&](std::ostream& out) { out << result.to_csv(); });
  atomic_write_file(jsonl_path, [&](std::ostream& out) {
    for (const auto& cell : result.cells) out << cell.report.to_json() << '\n';
  });
  manifest.add_timing("grid", clock.ms());
  manifest.add_artifact(text_path);
  manifest.add_artifact(csv_path);
  manifest.add_artifact(jsonl_path);
  manifest.write(cfg);
  return result;
}

EvalReport cmd_run_all(const PipelineConfig& cfg) {
  cfg.validate();
  ManifestBuilder manifest("run-all");
  StageClock total;

  if (cfg.use_synth) {
    StageClock clock;
    cmd_synth(cfg);
    manifest.add_timing("synth", clock.ms());
  }
  if (cfg.mode != "features-only") {
    StageClock clock;
    cmd_walk(cfg);
    manifest.add_timing("walk", clock.ms());
    StageClock embed_clock;
    if (cfg.mode == "a2v")
      cmd_embed_a2v(cfg);
    else
      cmd_embed_n2v(cfg);
    manifest.add_timing("embed", embed_clock.ms());
  }
  if (cfg.mode == "features-only" || cfg.mode == "concat") {
    StageClock clock;
    cmd_features(cfg);
    manifest.add_timing("features", clock.ms());
  }
  StageClock eval_clock;
  const EvalReport report = cmd_train_eval(cfg);
  manifest.add_timing("train-eval", eval_clock.ms());
  manifest.add_timing("total", total.ms());
  manifest.add_artifact(cfg.resolved_report_path());
  manifest.write(cfg);
  return report;
}

}  // namespace botdet
