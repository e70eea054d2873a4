#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "botdet/embed.hpp"

namespace botdet {

enum class Gender { kMale, kFemale, kUnknown };

enum class NodeClass { kHuman, kTechnical, kSophisticated };
const char* to_string(NodeClass c);
NodeClass node_class_from_string(const std::string& name);

// One account profile row. Every field except id and gender may be absent;
// gender always carries a value (unknown is a value, not a gap).
struct ProfileRecord {
  std::string id;
  std::optional<double> age;
  std::optional<bool> phone_verified;
  std::optional<bool> has_nickname;
  std::optional<bool> has_website;
  std::optional<bool> has_facebook;
  std::optional<bool> has_instagram;
  std::optional<bool> has_twitter;
  std::optional<bool> has_photo;
  std::optional<double> n_subscriptions;  // public-page subscriptions
  std::optional<double> n_videos;
  std::optional<double> n_audios;
  std::optional<double> days_since_login;
  std::optional<bool> status_filled;
  std::optional<double> n_friends;
  std::optional<std::string> city;
  Gender gender = Gender::kUnknown;
};

// Canonical profile CSV/TSV header, in column order.
const std::vector<std::string>& profile_csv_columns();

// Header-driven CSV or TSV (delimiter auto-detected from the header line);
// empty string means missing. Throws with the offending line number on
// malformed values or a header missing required columns.
std::vector<ProfileRecord> read_profiles_csv(std::istream& in,
                                             const std::string& source_name = "<stream>");
void write_profiles_csv(std::span<const ProfileRecord> records,
                        std::ostream& out);

// Column layout fitted on training records: declared numeric columns, then
// sorted city tokens with frequency >= city_min_count, then two gender
// columns. Width = |numeric| + |city vocab| + 2.
struct EncodingSchema {
  std::vector<std::string> numeric_columns;
  std::vector<std::string> city_vocab;  // sorted tokens

  std::uint32_t width() const {
    return static_cast<std::uint32_t>(numeric_columns.size() +
                                      city_vocab.size() + 2);
  }
  std::vector<std::string> column_names() const;
};

EncodingSchema fit_schema(std::span<const ProfileRecord> records,
                          std::uint32_t city_min_count = 10);

// Dense row-major feature matrix with an optional missingness mask
// (missing[i] nonzero => values slot i is a gap, valid only pre-imputation).
struct FeatureMatrix {
  std::size_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> missing;  // empty once imputed
  std::vector<std::string> column_names;
  std::vector<std::string> row_ids;

  bool has_mask() const { return !missing.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
  double at(std::size_t r, std::uint32_t c) const { return values[r * cols + c]; }
  bool is_missing(std::size_t r, std::uint32_t c) const {
    return has_mask() && missing[r * cols + c] != 0;
  }
};

// Numeric fields copy through with the mask set where absent; city one-hot
// over the schema vocabulary (unseen cities encode to an all-zero block);
// gender maps male -> (1,0), female -> (0,1), unknown -> (0,0). One-hot
// blocks are never masked. Rejects records with negative counts or ages,
// reporting the offending rows.
FeatureMatrix encode(std::span<const ProfileRecord> records,
                     const EncodingSchema& schema);

struct ImputeStrategy {
  enum class Kind { kConstant, kMedianOfObserved };
  Kind kind = Kind::kMedianOfObserved;
  double constant = 0.0;

  static ImputeStrategy Constant(double c) {
    return {Kind::kConstant, c};
  }
  static ImputeStrategy MedianOfObserved() {
    return {Kind::kMedianOfObserved, 0.0};
  }
};

// Fills every masked cell and drops the mask; observed cells are untouched.
// A column with no observed values falls back to constant 0 and is reported
// through `warnings` when given. Even-count medians take the midpoint of
// the central pair.
FeatureMatrix impute(const FeatureMatrix& fm, const ImputeStrategy& strategy,
                     std::vector<std::string>* warnings = nullptr);

struct StandardizeStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std; 0 for constant columns
};

// Per-column z-score. With stats == nullptr the stats are fitted on fm
// itself; pass fitted stats to transform a held-out split with training
// statistics. Zero-variance columns map to 0. Requires an imputed matrix.
std::pair<FeatureMatrix, StandardizeStats> standardize(
    const FeatureMatrix& fm, const StandardizeStats* stats = nullptr);

// Row-aligned [embedding | features] concatenation, matched by row id.
// Throws listing ids present on only one side.
FeatureMatrix concat(const EmbeddingMatrix& embedding, const FeatureMatrix& fm);

FeatureMatrix select_rows(const FeatureMatrix& fm,
                          std::span<const std::size_t> row_indices);

// CSV dump with header; pre-imputation matrices carry one `<col>_missing`
// column per feature column.
void write_feature_matrix(const FeatureMatrix& fm, std::ostream& out);
FeatureMatrix read_feature_matrix(std::istream& in,
                                  const std::string& source_name = "<stream>");

// Labels file: `id,class` header, class in {human, technical, sophisticated}.
struct LabelRecord {
  std::string id;
  NodeClass node_class = NodeClass::kHuman;
};
std::vector<LabelRecord> read_labels_csv(std::istream& in,
                                         const std::string& source_name = "<stream>");
void write_labels_csv(std::span<const LabelRecord> labels, std::ostream& out);

}  // namespace botdet
