#include "botdet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include "botdet/io_util.hpp"
#include "botdet/rng.hpp"

namespace botdet {

namespace {

constexpr std::uint64_t kEdgeTag = 0x65646765;
constexpr std::uint64_t kAttrTag = 0x61747472;

}  // namespace

ClassProfileModel human_profile_model() { return {}; }

ClassProfileModel technical_profile_model() {
  // Poorly filled, young, low-activity profiles; always-online automation.
  ClassProfileModel m;
  m.fill_age = 0.25;
  m.fill_phone = 0.15;
  m.fill_nickname = 0.05;
  m.fill_website = 0.02;
  m.fill_facebook = 0.03;
  m.fill_instagram = 0.05;
  m.fill_twitter = 0.02;
  m.fill_photo = 0.45;
  m.fill_subscriptions = 0.5;
  m.fill_videos = 0.1;
  m.fill_audios = 0.1;
  m.fill_days = 0.95;
  m.fill_status = 0.1;
  m.fill_friends = 0.9;
  m.fill_city = 0.3;
  m.flag_true_p = 0.4;
  m.age_mean = 24.0;
  m.age_sd = 4.0;
  m.friends_log_mean = 3.4;
  m.subscriptions_log_mean = 2.5;
  m.videos_log_mean = 0.7;
  m.audios_log_mean = 0.7;
  m.days_mean = 1.0;
  m.city_zipf_exponent = 0.5;  // farm accounts spread flat across cities
  m.gender_male_p = 0.3;
  m.gender_female_p = 0.3;
  return m;
}

ClassProfileModel sophisticated_profile_model() {
  // Fill rates equal the human model; the residual signal is a more
  // concentrated city distribution (accounts farmed in few locations).
  ClassProfileModel m = human_profile_model();
  m.city_zipf_exponent = 2.5;
  return m;
}

void SynthConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (n_humans == 0) throw std::invalid_argument("synth: n_humans must be > 0");
  if (n_communities == 0 || n_communities > n_humans)
    throw std::invalid_argument("synth: n_communities must be in [1, n_humans]");
  if (!prob(intra_p) || !prob(inter_p) || !prob(sophisticated_mimic_fraction))
    throw std::invalid_argument("synth: probabilities must be in [0, 1]");
  if (technical_degree <= 0.0)
    throw std::invalid_argument("synth: technical_degree must be positive");
  if (n_cities == 0) throw std::invalid_argument("synth: n_cities must be > 0");
}

namespace {

// Bernoulli(p) subset of {(u, j) : j in [begin, end)} by geometric skipping.
template <typename Emit>
void sample_row(Rng& rng, std::uint32_t u, std::uint32_t begin,
                std::uint32_t end, double p, Emit&& emit) {
  if (begin >= end || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::uint32_t j = begin; j < end; ++j) emit(u, j);
    return;
  }
  const double log1mp = std::log1p(-p);
  std::uint64_t j = begin;
  for (;;) {
    const double u01 = 1.0 - rng.next_double();  // (0, 1]
    j += static_cast<std::uint64_t>(std::floor(std::log(u01) / log1mp));
    if (j >= end) return;
    emit(u, static_cast<std::uint32_t>(j));
    ++j;
  }
}

std::uint32_t sample_poisson(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  std::uint32_t k = 0;
  double prod = rng.next_double();
  while (prod > limit) {
    ++k;
    prod *= rng.next_double();
  }
  return k;
}

// Cumulative Zipf(s) distribution over ranks 1..n.
std::vector<double> zipf_cdf(std::uint32_t n, double exponent) {
  std::vector<double> cdf(n);
  double total = 0.0;
  for (std::uint32_t r = 0; r < n; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    cdf[r] = total;
  }
  for (double& v : cdf) v /= total;
  return cdf;
}

std::uint32_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.next_double();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(
      it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

ProfileRecord make_profile(const std::string& id, const ClassProfileModel& m,
                           const std::vector<double>& city_cdf,
                           const std::vector<std::string>& cities, Rng& rng) {
  ProfileRecord r;
  r.id = id;

  auto flag = [&](double fill) -> std::optional<bool> {
    if (!rng.next_bernoulli(fill)) return std::nullopt;
    return rng.next_bernoulli(m.flag_true_p);
  };
  auto count = [&](double fill, double log_mean) -> std::optional<double> {
    if (!rng.next_bernoulli(fill)) return std::nullopt;
    return std::floor(std::exp(log_mean + m.count_log_sd * rng.next_gaussian()));
  };

  if (rng.next_bernoulli(m.fill_age)) {
    const double age = std::clamp(m.age_mean + m.age_sd * rng.next_gaussian(),
                                  14.0, 90.0);
    r.age = std::round(age);
  }
  r.phone_verified = flag(m.fill_phone);
  r.has_nickname = flag(m.fill_nickname);
  r.has_website = flag(m.fill_website);
  r.has_facebook = flag(m.fill_facebook);
  r.has_instagram = flag(m.fill_instagram);
  r.has_twitter = flag(m.fill_twitter);
  r.has_photo = flag(m.fill_photo);
  r.n_subscriptions = count(m.fill_subscriptions, m.subscriptions_log_mean);
  r.n_videos = count(m.fill_videos, m.videos_log_mean);
  r.n_audios = count(m.fill_audios, m.audios_log_mean);
  if (rng.next_bernoulli(m.fill_days))
    r.days_since_login = std::floor(-m.days_mean * std::log1p(-rng.next_double()));
  r.status_filled = flag(m.fill_status);
  r.n_friends = count(m.fill_friends, m.friends_log_mean);
  if (rng.next_bernoulli(m.fill_city)) r.city = cities[sample_cdf(city_cdf, rng)];

  const double g = rng.next_double();
  if (g < m.gender_male_p)
    r.gender = Gender::kMale;
  else if (g < m.gender_male_p + m.gender_female_p)
    r.gender = Gender::kFemale;
  else
    r.gender = Gender::kUnknown;
  return r;
}

}  // namespace

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::uint32_t h = cfg.n_humans;
  const std::uint32_t n_total = h + cfg.n_technical + cfg.n_sophisticated;

  Rng edge_rng(derive_stream(cfg.seed, kEdgeTag));
  std::vector<std::vector<std::uint32_t>> human_adj(h);
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;

  // Humans: stochastic block model over contiguous community chunks.
  auto block_begin = [&](std::uint32_t b) {
    return static_cast<std::uint32_t>(
        static_cast<std::uint64_t>(b) * h / cfg.n_communities);
  };
  auto emit_human_edge = [&](std::uint32_t u, std::uint32_t v) {
    edges.emplace_back(u, v, 1.0);
    human_adj[u].push_back(v);
    human_adj[v].push_back(u);
  };
  for (std::uint32_t b = 0; b < cfg.n_communities; ++b) {
    const std::uint32_t begin = block_begin(b), end = block_begin(b + 1);
    for (std::uint32_t u = begin; u < end; ++u)
      sample_row(edge_rng, u, u + 1, end, cfg.intra_p, emit_human_edge);
  }
  for (std::uint32_t b1 = 0; b1 < cfg.n_communities; ++b1) {
    for (std::uint32_t b2 = b1 + 1; b2 < cfg.n_communities; ++b2) {
      const std::uint32_t begin2 = block_begin(b2), end2 = block_begin(b2 + 1);
      for (std::uint32_t u = block_begin(b1); u < block_begin(b1 + 1); ++u)
        sample_row(edge_rng, u, begin2, end2, cfg.inter_p, emit_human_edge);
    }
  }

  // Technical bots: attach to uniformly random humans across all
  // communities (no community preference, so neighborhoods stay sparse
  // and mutually unconnected).
  for (std::uint32_t t = 0; t < cfg.n_technical; ++t) {
    const std::uint32_t bot = h + t;
    const std::uint32_t k = std::min(
        h, std::max<std::uint32_t>(1, sample_poisson(edge_rng, cfg.technical_degree)));
    std::unordered_set<std::uint32_t> picked;
    while (picked.size() < k)
      picked.insert(static_cast<std::uint32_t>(edge_rng.next_below(h)));
    std::vector<std::uint32_t> sorted(picked.begin(), picked.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t target : sorted) edges.emplace_back(bot, target, 1.0);
  }

  // Sophisticated bots: clone a random template's neighborhood.
  for (std::uint32_t s = 0; s < cfg.n_sophisticated; ++s) {
    const std::uint32_t bot = h + cfg.n_technical + s;
    std::uint32_t tmpl = 0;
    bool found = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      tmpl = static_cast<std::uint32_t>(edge_rng.next_below(h));
      if (!human_adj[tmpl].empty()) {
        found = true;
        break;
      }
    }
    if (!found)
      throw std::runtime_error(
          "synth: could not find a connected human template for a "
          "sophisticated bot; increase intra_p or n_humans");

    const auto& tmpl_nbrs = human_adj[tmpl];
    const auto deg = static_cast<std::uint32_t>(tmpl_nbrs.size());
    const auto n_mimic = static_cast<std::uint32_t>(std::min<double>(
        deg, std::ceil(cfg.sophisticated_mimic_fraction * deg)));

    std::vector<std::uint32_t> pool = tmpl_nbrs;
    shuffle(pool, edge_rng);
    std::unordered_set<std::uint32_t> picked(pool.begin(), pool.begin() + n_mimic);
    while (picked.size() < deg) {
      const auto extra = static_cast<std::uint32_t>(edge_rng.next_below(h));
      if (extra != tmpl) picked.insert(extra);
    }
    std::vector<std::uint32_t> sorted(picked.begin(), picked.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t target : sorted) edges.emplace_back(bot, target, 1.0);
  }

  SynthDataset ds;
  for (std::uint32_t i = 0; i < h; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "u%05u", i);
    ds.ids.add(buf);
    ds.labels.push_back(NodeClass::kHuman);
  }
  for (std::uint32_t i = 0; i < cfg.n_technical; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%04u", i);
    ds.ids.add(buf);
    ds.labels.push_back(NodeClass::kTechnical);
  }
  for (std::uint32_t i = 0; i < cfg.n_sophisticated; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%04u", i);
    ds.ids.add(buf);
    ds.labels.push_back(NodeClass::kSophisticated);
  }
  ds.graph = Graph::from_edges(n_total, edges);

  // Profiles, one deterministic stream over all nodes in order.
  Rng attr_rng(derive_stream(cfg.seed, kAttrTag));
  std::vector<std::string> cities(cfg.n_cities);
  for (std::uint32_t c = 0; c < cfg.n_cities; ++c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%02u", c);
    cities[c] = buf;
  }
  const std::vector<double> human_cdf = zipf_cdf(cfg.n_cities, cfg.human.city_zipf_exponent);
  const std::vector<double> tech_cdf = zipf_cdf(cfg.n_cities, cfg.technical.city_zipf_exponent);
  const std::vector<double> soph_cdf =
      zipf_cdf(cfg.n_cities, cfg.sophisticated.city_zipf_exponent);

  ds.profiles.reserve(n_total);
  for (std::uint32_t i = 0; i < n_total; ++i) {
    switch (ds.labels[i]) {
      case NodeClass::kHuman:
        ds.profiles.push_back(
            make_profile(ds.ids.label(i), cfg.human, human_cdf, cities, attr_rng));
        break;
      case NodeClass::kTechnical:
        ds.profiles.push_back(make_profile(ds.ids.label(i), cfg.technical,
                                           tech_cdf, cities, attr_rng));
        break;
      case NodeClass::kSophisticated:
        ds.profiles.push_back(make_profile(ds.ids.label(i), cfg.sophisticated,
                                           soph_cdf, cities, attr_rng));
        break;
    }
  }

  // Every requested bot must survive the largest-component step the
  // pipeline applies.
  const ComponentResult lcc = largest_connected_component(ds.graph, ds.ids);
  std::size_t tech_in = 0, soph_in = 0;
  for (std::uint32_t orig : lcc.original_index) {
    if (ds.labels[orig] == NodeClass::kTechnical) ++tech_in;
    if (ds.labels[orig] == NodeClass::kSophisticated) ++soph_in;
  }
  if (tech_in != cfg.n_technical || soph_in != cfg.n_sophisticated)
    throw std::runtime_error(
        "synth: bots outside the largest connected component (technical " +
        std::to_string(tech_in) + "/" + std::to_string(cfg.n_technical) +
        ", sophisticated " + std::to_string(soph_in) + "/" +
        std::to_string(cfg.n_sophisticated) + "); adjust the config");
  return ds;
}

void export_dataset(const SynthDataset& ds, const std::filesystem::path& dir) {
  atomic_write_file(dir / "edges.tsv", [&](std::ostream& out) {
    write_edge_list(ds.graph, ds.ids, out);
  });
  atomic_write_file(dir / "profiles.csv", [&](std::ostream& out) {
    write_profiles_csv(ds.profiles, out);
  });
  atomic_write_file(dir / "labels.csv", [&](std::ostream& out) {
    std::vector<LabelRecord> labels;
    labels.reserve(ds.labels.size());
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
      labels.push_back({ds.ids.label(static_cast<std::uint32_t>(i)), ds.labels[i]});
    write_labels_csv(labels, out);
  });
}

}  // namespace botdet
