#include "botdet/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace botdet {

namespace {

const std::vector<std::string> kProfileColumns = {
    "id",          "age",          "phone_verified", "has_nickname",
    "has_website", "has_facebook", "has_instagram",  "has_twitter",
    "has_photo",   "n_subscriptions", "n_videos",    "n_audios",
    "days_since_login", "status_filled", "n_friends", "city", "gender"};

// Encoded numeric columns, in declared order.
const std::vector<std::string> kNumericColumns = {
    "age",          "phone_verified", "has_nickname", "has_website",
    "has_facebook", "has_instagram",  "has_twitter",  "has_photo",
    "n_subscriptions", "n_videos",    "n_audios",     "days_since_login",
    "status_filled",   "n_friends"};

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.emplace_back();
  return fields;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<double> parse_opt_double(const std::string& s,
                                       const std::string& context) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw std::runtime_error(context + ": malformed number `" + s + "`");
  }
}

std::optional<bool> parse_opt_bool(const std::string& s,
                                   const std::string& context) {
  if (s.empty()) return std::nullopt;
  const std::string v = lower(s);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::runtime_error(context + ": malformed flag `" + s + "`");
}

Gender parse_gender(const std::string& s, const std::string& context) {
  const std::string v = lower(s);
  if (v.empty() || v == "unknown") return Gender::kUnknown;
  if (v == "male" || v == "m") return Gender::kMale;
  if (v == "female" || v == "f") return Gender::kFemale;
  throw std::runtime_error(context + ": malformed gender `" + s + "`");
}

const char* gender_to_string(Gender g) {
  switch (g) {
    case Gender::kMale: return "male";
    case Gender::kFemale: return "female";
    case Gender::kUnknown: return "unknown";
  }
  return "?";
}

std::string format_double(double v) {
  char buf[40];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
  }
  return buf;
}

void append_opt(std::string& line, const std::optional<double>& v) {
  if (v) line += format_double(*v);
}
void append_opt(std::string& line, const std::optional<bool>& v) {
  if (v) line += *v ? '1' : '0';
}

}  // namespace

const std::vector<std::string>& profile_csv_columns() { return kProfileColumns; }

const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::kHuman: return "human";
    case NodeClass::kTechnical: return "technical";
    case NodeClass::kSophisticated: return "sophisticated";
  }
  return "?";
}

NodeClass node_class_from_string(const std::string& name) {
  if (name == "human") return NodeClass::kHuman;
  if (name == "technical") return NodeClass::kTechnical;
  if (name == "sophisticated") return NodeClass::kSophisticated;
  throw std::invalid_argument("unknown node class `" + name + "`");
}

std::vector<LabelRecord> read_labels_csv(std::istream& in,
                                         const std::string& source_name) {
  std::vector<LabelRecord> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto fields = split_line(line, delim);
    if (fields.size() != 2)
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": expected `id,class`");
    if (line_no == 1 && fields[1] == "class") continue;  // header
    if (fields[0].empty())
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": empty id");
    try {
      labels.push_back({fields[0], node_class_from_string(fields[1])});
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return labels;
}

void write_labels_csv(std::span<const LabelRecord> labels, std::ostream& out) {
  out << "id,class\n";
  for (const auto& l : labels)
    out << l.id << ',' << to_string(l.node_class) << '\n';
}

std::vector<ProfileRecord> read_profiles_csv(std::istream& in,
                                             const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(source_name + ": empty profile file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';

  const auto header = split_line(line, delim);
  std::unordered_map<std::string, std::size_t> col_of;
  for (std::size_t i = 0; i < header.size(); ++i) col_of[header[i]] = i;
  for (const auto& name : kProfileColumns) {
    if (!col_of.count(name))
      throw std::runtime_error(source_name + ": header missing column `" +
                               name + "`");
  }

  std::vector<ProfileRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line, delim);
    if (fields.size() != header.size())
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    const std::string ctx = source_name + ":" + std::to_string(line_no);
    auto field = [&](const std::string& name) -> const std::string& {
      return fields[col_of.at(name)];
    };

    ProfileRecord r;
    r.id = field("id");
    if (r.id.empty()) throw std::runtime_error(ctx + ": empty id");
    r.age = parse_opt_double(field("age"), ctx);
    r.phone_verified = parse_opt_bool(field("phone_verified"), ctx);
    r.has_nickname = parse_opt_bool(field("has_nickname"), ctx);
    r.has_website = parse_opt_bool(field("has_website"), ctx);
    r.has_facebook = parse_opt_bool(field("has_facebook"), ctx);
    r.has_instagram = parse_opt_bool(field("has_instagram"), ctx);
    r.has_twitter = parse_opt_bool(field("has_twitter"), ctx);
    r.has_photo = parse_opt_bool(field("has_photo"), ctx);
    r.n_subscriptions = parse_opt_double(field("n_subscriptions"), ctx);
    r.n_videos = parse_opt_double(field("n_videos"), ctx);
    r.n_audios = parse_opt_double(field("n_audios"), ctx);
    r.days_since_login = parse_opt_double(field("days_since_login"), ctx);
    r.status_filled = parse_opt_bool(field("status_filled"), ctx);
    r.n_friends = parse_opt_double(field("n_friends"), ctx);
    if (!field("city").empty()) r.city = field("city");
    r.gender = parse_gender(field("gender"), ctx);
    records.push_back(std::move(r));
  }
  return records;
}

void write_profiles_csv(std::span<const ProfileRecord> records,
                        std::ostream& out) {
  for (std::size_t i = 0; i < kProfileColumns.size(); ++i) {
    if (i > 0) out << ',';
    out << kProfileColumns[i];
  }
  out << '\n';
  std::string line;
  for (const auto& r : records) {
    line.clear();
    line += r.id;
    line += ',';
    append_opt(line, r.age);
    line += ',';
    append_opt(line, r.phone_verified);
    line += ',';
    append_opt(line, r.has_nickname);
    line += ',';
    append_opt(line, r.has_website);
    line += ',';
    append_opt(line, r.has_facebook);
    line += ',';
    append_opt(line, r.has_instagram);
    line += ',';
    append_opt(line, r.has_twitter);
    line += ',';
    append_opt(line, r.has_photo);
    line += ',';
    append_opt(line, r.n_subscriptions);
    line += ',';
    append_opt(line, r.n_videos);
    line += ',';
    append_opt(line, r.n_audios);
    line += ',';
    append_opt(line, r.days_since_login);
    line += ',';
    append_opt(line, r.status_filled);
    line += ',';
    append_opt(line, r.n_friends);
    line += ',';
    if (r.city) line += *r.city;
    line += ',';
    line += gender_to_string(r.gender);
    out << line << '\n';
  }
}

std::vector<std::string> EncodingSchema::column_names() const {
  std::vector<std::string> names = numeric_columns;
  names.reserve(width());
  for (const auto& city : city_vocab) names.push_back("city=" + city);
  names.emplace_back("gender=male");
  names.emplace_back("gender=female");
  return names;
}

EncodingSchema fit_schema(std::span<const ProfileRecord> records,
                          std::uint32_t city_min_count) {
  if (records.empty())
    throw std::invalid_argument("fit_schema: empty record set");
  std::map<std::string, std::uint32_t> city_counts;
  for (const auto& r : records)
    if (r.city && !r.city->empty()) ++city_counts[*r.city];

  EncodingSchema schema;
  schema.numeric_columns = kNumericColumns;
  for (const auto& [city, count] : city_counts)
    if (count >= city_min_count) schema.city_vocab.push_back(city);
  return schema;  // map iteration is sorted, so the vocab is sorted
}

FeatureMatrix encode(std::span<const ProfileRecord> records,
                     const EncodingSchema& schema) {
  if (schema.numeric_columns != kNumericColumns)
    throw std::invalid_argument(
        "encode: schema numeric columns must be the declared list");
  FeatureMatrix fm;
  fm.rows = records.size();
  fm.cols = schema.width();
  fm.column_names = schema.column_names();
  fm.values.assign(fm.rows * fm.cols, 0.0);
  fm.missing.assign(fm.rows * fm.cols, 0);
  fm.row_ids.reserve(fm.rows);

  std::unordered_map<std::string, std::uint32_t> city_col;
  for (std::size_t i = 0; i < schema.city_vocab.size(); ++i)
    city_col[schema.city_vocab[i]] =
        static_cast<std::uint32_t>(schema.numeric_columns.size() + i);
  const std::uint32_t gender_col = fm.cols - 2;

  std::vector<std::string> bad_rows;
  for (std::size_t row = 0; row < records.size(); ++row) {
    const ProfileRecord& r = records[row];
    fm.row_ids.push_back(r.id);
    double* out = fm.values.data() + row * fm.cols;
    std::uint8_t* mask = fm.missing.data() + row * fm.cols;

    bool negative = false;
    std::uint32_t col = 0;
    auto put = [&](const std::optional<double>& v, bool must_be_nonneg) {
      if (v) {
        if (must_be_nonneg && *v < 0.0) negative = true;
        out[col] = *v;
      } else {
        mask[col] = 1;
      }
      ++col;
    };
    auto put_flag = [&](const std::optional<bool>& v) {
      if (v)
        out[col] = *v ? 1.0 : 0.0;
      else
        mask[col] = 1;
      ++col;
    };

    put(r.age, true);
    put_flag(r.phone_verified);
    put_flag(r.has_nickname);
    put_flag(r.has_website);
    put_flag(r.has_facebook);
    put_flag(r.has_instagram);
    put_flag(r.has_twitter);
    put_flag(r.has_photo);
    put(r.n_subscriptions, true);
    put(r.n_videos, true);
    put(r.n_audios, true);
    put(r.days_since_login, true);
    put_flag(r.status_filled);
    put(r.n_friends, true);

    if (r.city) {
      auto it = city_col.find(*r.city);
      if (it != city_col.end()) out[it->second] = 1.0;
      // unseen or rare city: all-zero block
    }
    if (r.gender == Gender::kMale) out[gender_col] = 1.0;
    if (r.gender == Gender::kFemale) out[gender_col + 1] = 1.0;

    if (negative)
      bad_rows.push_back(r.id + " (row " + std::to_string(row) + ")");
  }
  if (!bad_rows.empty()) {
    std::string msg = "encode: negative count/age in " +
                      std::to_string(bad_rows.size()) + " record(s):";
    for (std::size_t i = 0; i < bad_rows.size() && i < 10; ++i)
      msg += " " + bad_rows[i];
    throw std::runtime_error(msg);
  }
  return fm;
}

FeatureMatrix impute(const FeatureMatrix& fm, const ImputeStrategy& strategy,
                     std::vector<std::string>* warnings) {
  FeatureMatrix out = fm;
  out.missing.clear();
  if (!fm.has_mask()) return out;

  std::vector<double> observed;
  for (std::uint32_t c = 0; c < fm.cols; ++c) {
    double fill = strategy.constant;
    if (strategy.kind == ImputeStrategy::Kind::kMedianOfObserved) {
      observed.clear();
      for (std::size_t r = 0; r < fm.rows; ++r)
        if (!fm.missing[r * fm.cols + c]) observed.push_back(fm.values[r * fm.cols + c]);
      if (observed.empty()) {
        fill = 0.0;
        if (warnings != nullptr)
          warnings->push_back("column `" + fm.column_names[c] +
                              "` has no observed values; imputed with 0");
      } else {
        std::sort(observed.begin(), observed.end());
        const std::size_t mid = observed.size() / 2;
        fill = observed.size() % 2 == 1
                   ? observed[mid]
                   : 0.5 * (observed[mid - 1] + observed[mid]);
      }
    }
    for (std::size_t r = 0; r < fm.rows; ++r)
      if (fm.missing[r * fm.cols + c]) out.values[r * fm.cols + c] = fill;
  }
  return out;
}

std::pair<FeatureMatrix, StandardizeStats> standardize(
    const FeatureMatrix& fm, const StandardizeStats* stats) {
  if (fm.has_mask())
    throw std::invalid_argument("standardize: matrix must be imputed first");

  StandardizeStats fitted;
  if (stats != nullptr) {
    if (stats->mean.size() != fm.cols || stats->stddev.size() != fm.cols)
      throw std::invalid_argument("standardize: stats width mismatch");
    fitted = *stats;
  } else {
    fitted.mean.assign(fm.cols, 0.0);
    fitted.stddev.assign(fm.cols, 0.0);
    if (fm.rows == 0)
      throw std::invalid_argument("standardize: cannot fit stats on empty matrix");
    for (std::size_t r = 0; r < fm.rows; ++r)
      for (std::uint32_t c = 0; c < fm.cols; ++c)
        fitted.mean[c] += fm.values[r * fm.cols + c];
    for (std::uint32_t c = 0; c < fm.cols; ++c)
      fitted.mean[c] /= static_cast<double>(fm.rows);
    for (std::size_t r = 0; r < fm.rows; ++r)
      for (std::uint32_t c = 0; c < fm.cols; ++c) {
        const double dev = fm.values[r * fm.cols + c] - fitted.mean[c];
        fitted.stddev[c] += dev * dev;
      }
    for (std::uint32_t c = 0; c < fm.cols; ++c)
      fitted.stddev[c] = std::sqrt(fitted.stddev[c] / static_cast<double>(fm.rows));
  }

  FeatureMatrix out = fm;
  for (std::size_t r = 0; r < fm.rows; ++r)
    for (std::uint32_t c = 0; c < fm.cols; ++c) {
      const double sd = fitted.stddev[c];
      out.values[r * fm.cols + c] =
          sd > 0.0 ? (fm.values[r * fm.cols + c] - fitted.mean[c]) / sd : 0.0;
    }
  return {std::move(out), std::move(fitted)};
}

FeatureMatrix concat(const EmbeddingMatrix& embedding, const FeatureMatrix& fm) {
  if (fm.has_mask())
    throw std::invalid_argument("concat: feature matrix must be imputed first");
  std::unordered_map<std::string, std::size_t> fm_row;
  for (std::size_t i = 0; i < fm.row_ids.size(); ++i) fm_row[fm.row_ids[i]] = i;

  std::vector<std::string> missing;
  for (const auto& label : embedding.labels)
    if (!fm_row.count(label)) missing.push_back(label + " (no features)");
  if (fm.rows != embedding.node_count()) {
    std::unordered_map<std::string, bool> emb_has;
    for (const auto& label : embedding.labels) emb_has[label] = true;
    for (const auto& id : fm.row_ids)
      if (!emb_has.count(id)) missing.push_back(id + " (no embedding)");
  }
  if (!missing.empty()) {
    std::string msg = "concat: " + std::to_string(missing.size()) +
                      " node(s) present on only one side:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i)
      msg += " " + missing[i];
    throw std::runtime_error(msg);
  }

  FeatureMatrix out;
  out.rows = embedding.node_count();
  out.cols = embedding.dims + fm.cols;
  out.row_ids = embedding.labels;
  out.column_names.reserve(out.cols);
  for (std::uint32_t j = 0; j < embedding.dims; ++j)
    out.column_names.push_back("emb_" + std::to_string(j));
  out.column_names.insert(out.column_names.end(), fm.column_names.begin(),
                          fm.column_names.end());
  out.values.resize(out.rows * static_cast<std::size_t>(out.cols));
  for (std::size_t r = 0; r < out.rows; ++r) {
    double* dst = out.values.data() + r * out.cols;
    const auto emb_row = embedding.row(r);
    std::copy(emb_row.begin(), emb_row.end(), dst);
    const auto feat_row = fm.row(fm_row.at(embedding.labels[r]));
    std::copy(feat_row.begin(), feat_row.end(), dst + embedding.dims);
  }
  return out;
}

FeatureMatrix select_rows(const FeatureMatrix& fm,
                          std::span<const std::size_t> row_indices) {
  FeatureMatrix out;
  out.rows = row_indices.size();
  out.cols = fm.cols;
  out.column_names = fm.column_names;
  out.values.resize(out.rows * static_cast<std::size_t>(fm.cols));
  if (fm.has_mask()) out.missing.resize(out.rows * static_cast<std::size_t>(fm.cols));
  out.row_ids.reserve(out.rows);
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const std::size_t r = row_indices[i];
    out.row_ids.push_back(fm.row_ids[r]);
    std::copy_n(fm.values.begin() + r * fm.cols, fm.cols,
                out.values.begin() + i * fm.cols);
    if (fm.has_mask())
      std::copy_n(fm.missing.begin() + r * fm.cols, fm.cols,
                  out.missing.begin() + i * fm.cols);
  }
  return out;
}

void write_feature_matrix(const FeatureMatrix& fm, std::ostream& out) {
  out << "id";
  for (const auto& name : fm.column_names) out << ',' << name;
  if (fm.has_mask())
    for (const auto& name : fm.column_names) out << ',' << name << "_missing";
  out << '\n';
  for (std::size_t r = 0; r < fm.rows; ++r) {
    out << fm.row_ids[r];
    for (std::uint32_t c = 0; c < fm.cols; ++c)
      out << ',' << format_double(fm.is_missing(r, c) ? 0.0 : fm.at(r, c));
    if (fm.has_mask())
      for (std::uint32_t c = 0; c < fm.cols; ++c)
        out << ',' << (fm.is_missing(r, c) ? '1' : '0');
    out << '\n';
  }
}

FeatureMatrix read_feature_matrix(std::istream& in,
                                  const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(source_name + ": empty feature matrix file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_line(line, ',');
  if (header.empty() || header[0] != "id")
    throw std::runtime_error(source_name + ": feature header must start with `id`");
  header.erase(header.begin());

  // A trailing block of `<col>_missing` columns mirrors the value columns.
  std::size_t value_cols = header.size();
  if (!header.empty() && header.back().size() > 8 &&
      header.back().ends_with("_missing")) {
    value_cols = header.size() / 2;
    if (header.size() != 2 * value_cols)
      throw std::runtime_error(source_name + ": unbalanced mask columns");
    for (std::size_t c = 0; c < value_cols; ++c)
      if (header[value_cols + c] != header[c] + "_missing")
        throw std::runtime_error(source_name + ": mask column `" +
                                 header[value_cols + c] +
                                 "` does not mirror `" + header[c] + "`");
  }

  FeatureMatrix fm;
  fm.cols = static_cast<std::uint32_t>(value_cols);
  fm.column_names.assign(header.begin(), header.begin() + value_cols);
  const bool has_mask = value_cols != header.size();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_line(line, ',');
    if (fields.size() != header.size() + 1)
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                               ": wrong field count");
    fm.row_ids.push_back(fields[0]);
    const std::string ctx = source_name + ":" + std::to_string(line_no);
    for (std::size_t c = 0; c < value_cols; ++c) {
      const auto v = parse_opt_double(fields[1 + c], ctx);
      fm.values.push_back(v.value_or(0.0));
    }
    if (has_mask)
      for (std::size_t c = 0; c < value_cols; ++c)
        fm.missing.push_back(fields[1 + value_cols + c] == "1" ? 1 : 0);
    ++fm.rows;
  }
  return fm;
}

}  // namespace botdet
