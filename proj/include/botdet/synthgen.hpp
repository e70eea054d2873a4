#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "botdet/features.hpp"
#include "botdet/graph.hpp"

namespace botdet {

// Per-class profile generator: presence probability for each optional field
// plus value distributions. Counts are lognormal, last-login gaps are
// exponential, cities follow a Zipf law over the shared city list.
struct ClassProfileModel {
  double fill_age = 0.7;
  double fill_phone = 0.8;
  double fill_nickname = 0.3;
  double fill_website = 0.15;
  double fill_facebook = 0.2;
  double fill_instagram = 0.35;
  double fill_twitter = 0.1;
  double fill_photo = 0.9;
  double fill_subscriptions = 0.85;
  double fill_videos = 0.6;
  double fill_audios = 0.6;
  double fill_days = 0.95;
  double fill_status = 0.5;
  double fill_friends = 0.98;
  double fill_city = 0.8;

  double flag_true_p = 0.75;
  double age_mean = 35.0, age_sd = 12.0;
  double friends_log_mean = 5.0;        // exp(5) ~ 148
  double subscriptions_log_mean = 4.0;  // ~55
  double videos_log_mean = 2.5;
  double audios_log_mean = 3.0;
  double count_log_sd = 0.8;
  double days_mean = 7.0;
  double city_zipf_exponent = 1.1;
  double gender_male_p = 0.45, gender_female_p = 0.45;
};

ClassProfileModel human_profile_model();
ClassProfileModel technical_profile_model();
ClassProfileModel sophisticated_profile_model();

struct SynthConfig {
  std::uint32_t n_humans = 5000;
  std::uint32_t n_communities = 10;
  double intra_p = 0.03;   // edge probability within a community
  double inter_p = 0.001;  // edge probability across communities
  std::uint32_t n_technical = 30;
  std::uint32_t n_sophisticated = 20;
  double technical_degree = 10.0;            // mean edges per technical bot
  double sophisticated_mimic_fraction = 0.7; // template neighbors cloned
  std::uint32_t n_cities = 40;
  ClassProfileModel human = human_profile_model();
  ClassProfileModel technical = technical_profile_model();
  ClassProfileModel sophisticated = sophisticated_profile_model();
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthDataset {
  Graph graph;
  NodeIdMap ids;
  std::vector<ProfileRecord> profiles;  // one per node, same order as ids
  std::vector<NodeClass> labels;
};

// Humans form a stochastic block model over n_communities blocks. Technical
// bots attach to uniformly random humans, ignoring community structure.
// Each sophisticated bot clones a random human template: it connects to
// mimic_fraction of the template's neighbors plus random extras up to the
// template's degree, and draws its profile from the human attribute model.
// Deterministic per seed. Throws if a requested bot class ends up absent
// from or disconnected from the largest component.
SynthDataset generate(const SynthConfig& cfg);

// Writes edges.tsv, profiles.csv and labels.csv (id,class) in the formats
// the loaders consume. Byte-identical for identical datasets.
void export_dataset(const SynthDataset& ds, const std::filesystem::path& dir);

}  // namespace botdet
