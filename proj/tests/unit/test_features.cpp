#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "botdet/features.hpp"
#include "botdet/rng.hpp"

using namespace botdet;

namespace {

ProfileRecord record_with_city(const std::string& id, const std::string& city) {
  ProfileRecord r;
  r.id = id;
  r.city = city;
  return r;
}

std::uint32_t column_index(const FeatureMatrix& fm, const std::string& name) {
  for (std::uint32_t c = 0; c < fm.cols; ++c)
    if (fm.column_names[c] == name) return c;
  FAIL("column not found: ", name);
  return 0;
}

}  // namespace

TEST_CASE("profiles csv round-trips and reports malformed rows") {
  std::vector<ProfileRecord> records(2);
  records[0].id = "a";
  records[0].age = 33;
  records[0].phone_verified = true;
  records[0].n_friends = 150;
  records[0].city = "minsk";
  records[0].gender = Gender::kFemale;
  records[1].id = "b";
  records[1].status_filled = false;
  records[1].gender = Gender::kUnknown;

  std::stringstream buffer;
  write_profiles_csv(records, buffer);
  const auto back = read_profiles_csv(buffer, "mem");
  REQUIRE(back.size() == 2);
  CHECK(back[0].age == 33.0);
  CHECK(back[0].phone_verified == true);
  CHECK(back[0].n_friends == 150.0);
  CHECK(back[0].city == "minsk");
  CHECK(back[0].gender == Gender::kFemale);
  CHECK(!back[1].age.has_value());
  CHECK(back[1].status_filled == false);
  CHECK(back[1].gender == Gender::kUnknown);

  std::istringstream missing_column("id,age\nx,3\n");
  CHECK_THROWS_WITH_AS(read_profiles_csv(missing_column, "mem"),
                       doctest::Contains("missing column"), std::runtime_error);

  std::stringstream bad;
  write_profiles_csv(records, bad);
  std::string text = bad.str();
  text.replace(text.find("33"), 2, "xx");
  std::istringstream bad_in(text);
  CHECK_THROWS_WITH_AS(read_profiles_csv(bad_in, "mem"),
                       doctest::Contains("mem:2"), std::runtime_error);
}

TEST_CASE("fit_schema: city vocabulary frequency threshold") {
  std::vector<ProfileRecord> records;
  for (int i = 0; i < 12; ++i)
    records.push_back(record_with_city("x" + std::to_string(i), "X"));
  for (int i = 0; i < 9; ++i)
    records.push_back(record_with_city("y" + std::to_string(i), "Y"));
  const EncodingSchema schema = fit_schema(records, 10);
  REQUIRE(schema.city_vocab.size() == 1);
  CHECK(schema.city_vocab[0] == "X");
  CHECK(schema.width() == schema.numeric_columns.size() + 1 + 2);
}

TEST_CASE("fit_schema: no cities at all -> width = numeric + 2") {
  std::vector<ProfileRecord> records(3);
  for (int i = 0; i < 3; ++i) records[i].id = "r" + std::to_string(i);
  const EncodingSchema schema = fit_schema(records, 10);
  CHECK(schema.city_vocab.empty());
  CHECK(schema.width() == schema.numeric_columns.size() + 2);
  const std::vector<ProfileRecord> empty;
  CHECK_THROWS_AS(fit_schema(empty, 10), std::invalid_argument);
}

TEST_CASE("encode: gender one-hot and unknown as (0,0)") {
  std::vector<ProfileRecord> records(3);
  records[0].id = "m";
  records[0].gender = Gender::kMale;
  records[1].id = "f";
  records[1].gender = Gender::kFemale;
  records[2].id = "u";
  records[2].gender = Gender::kUnknown;
  const EncodingSchema schema = fit_schema(records, 10);
  const FeatureMatrix fm = encode(records, schema);
  const auto male_col = column_index(fm, "gender=male");
  const auto female_col = column_index(fm, "gender=female");
  CHECK(fm.at(0, male_col) == 1.0);
  CHECK(fm.at(0, female_col) == 0.0);
  CHECK(fm.at(1, male_col) == 0.0);
  CHECK(fm.at(1, female_col) == 1.0);
  CHECK(fm.at(2, male_col) == 0.0);
  CHECK(fm.at(2, female_col) == 0.0);
  // one-hot blocks never masked
  for (std::uint32_t c = 0; c < fm.cols; ++c) {
    if (fm.column_names[c].rfind("gender=", 0) == 0 ||
        fm.column_names[c].rfind("city=", 0) == 0)
      for (std::size_t r = 0; r < fm.rows; ++r) CHECK(!fm.is_missing(r, c));
  }
}

TEST_CASE("encode: record with all optionals absent") {
  std::vector<ProfileRecord> seed(11);
  for (std::size_t i = 0; i < seed.size(); ++i) {
    seed[i].id = "s" + std::to_string(i);
    seed[i].city = "K";
  }
  ProfileRecord empty;
  empty.id = "empty";
  std::vector<ProfileRecord> all = seed;
  all.push_back(empty);

  const EncodingSchema schema = fit_schema(all, 10);
  const FeatureMatrix fm = encode(all, schema);
  const std::size_t row = all.size() - 1;
  for (const auto& name : schema.numeric_columns)
    CHECK(fm.is_missing(row, column_index(fm, name)));
  CHECK(fm.at(row, column_index(fm, "city=K")) == 0.0);
  CHECK(fm.at(row, column_index(fm, "gender=male")) == 0.0);
  CHECK(fm.at(row, column_index(fm, "gender=female")) == 0.0);
}

TEST_CASE("encode: hand-built records check cell by cell") {
  std::vector<ProfileRecord> records(3);
  records[0].id = "r0";
  records[0].age = 40;
  records[0].phone_verified = true;
  records[0].has_photo = false;
  records[0].n_friends = 120;
  records[0].city = "A";
  records[0].gender = Gender::kMale;
  records[1].id = "r1";
  records[1].n_videos = 7;
  records[1].city = "B";  // rare -> zero block
  records[1].gender = Gender::kFemale;
  records[2].id = "r2";
  records[2].days_since_login = 3;
  records[2].gender = Gender::kUnknown;

  // threshold 1 keeps both cities; layout: 14 numeric, city A, city B,
  // gender male, gender female
  const EncodingSchema schema = fit_schema(records, 1);
  const FeatureMatrix fm = encode(records, schema);
  REQUIRE(fm.cols == 18);

  const std::vector<double> expected_values{
      40, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 120, 1, 0, 1, 0,  // r0
      0,  0, 0, 0, 0, 0, 0, 0, 0, 7, 0, 0, 0, 0,   0, 1, 0, 1,  // r1
      0,  0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 3, 0, 0,   0, 0, 0, 0,  // r2
  };
  const std::vector<std::uint8_t> expected_missing{
      0, 0, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0,  // r0
      1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 0, 0,  // r1
      1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 0,  // r2
  };
  CHECK(fm.values == expected_values);
  CHECK(fm.missing == expected_missing);
}

TEST_CASE("encode rejects negative counts, reporting rows") {
  std::vector<ProfileRecord> records(2);
  records[0].id = "good";
  records[1].id = "bad";
  records[1].n_friends = -5;
  const EncodingSchema schema = fit_schema(records, 10);
  CHECK_THROWS_WITH_AS(encode(records, schema), doctest::Contains("bad"),
                       std::runtime_error);
}

TEST_CASE("impute: median of observed") {
  FeatureMatrix fm;
  fm.rows = 4;
  fm.cols = 1;
  fm.column_names = {"x"};
  fm.row_ids = {"a", "b", "c", "d"};
  fm.values = {1, 2, 3, 0};
  fm.missing = {0, 0, 0, 1};
  const FeatureMatrix out = impute(fm, ImputeStrategy::MedianOfObserved());
  CHECK(!out.has_mask());
  CHECK(out.values[3] == 2.0);  // odd count -> middle value
  CHECK(out.values[0] == 1.0);

  FeatureMatrix even = fm;
  even.rows = 5;
  even.values = {1, 2, 3, 4, 0};
  even.missing = {0, 0, 0, 0, 1};
  even.row_ids.push_back("e");
  const FeatureMatrix out_even = impute(even, ImputeStrategy::MedianOfObserved());
  CHECK(out_even.values[4] == 2.5);  // even count -> midpoint
}

TEST_CASE("impute: constant strategy and identity on observed cells") {
  FeatureMatrix fm;
  fm.rows = 2;
  fm.cols = 2;
  fm.column_names = {"x", "y"};
  fm.row_ids = {"a", "b"};
  fm.values = {5, 0, 7, 8};
  fm.missing = {0, 1, 0, 0};
  const FeatureMatrix out = impute(fm, ImputeStrategy::Constant(-1.0));
  CHECK(out.values == std::vector<double>{5, -1, 7, 8});

  // fully observed matrix: Constant(0) is the identity
  FeatureMatrix observed = fm;
  observed.missing.assign(4, 0);
  const FeatureMatrix same = impute(observed, ImputeStrategy::Constant(0.0));
  CHECK(same.values == observed.values);
}

TEST_CASE("impute: never modifies observed cells on random matrices") {
  Rng rng(88);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureMatrix fm;
    fm.rows = 1 + rng.next_below(20);
    fm.cols = static_cast<std::uint32_t>(1 + rng.next_below(6));
    fm.values.resize(fm.rows * fm.cols);
    fm.missing.resize(fm.rows * fm.cols);
    fm.column_names.resize(fm.cols, "c");
    fm.row_ids.resize(fm.rows, "r");
    for (std::size_t i = 0; i < fm.values.size(); ++i) {
      fm.values[i] = rng.next_double() * 100.0;
      fm.missing[i] = rng.next_bernoulli(0.3) ? 1 : 0;
    }
    const auto strategy = trial % 2 == 0 ? ImputeStrategy::MedianOfObserved()
                                         : ImputeStrategy::Constant(9.0);
    const FeatureMatrix out = impute(fm, strategy);
    for (std::size_t i = 0; i < fm.values.size(); ++i) {
      if (!fm.missing[i]) CHECK(out.values[i] == fm.values[i]);
      CHECK(std::isfinite(out.values[i]));
    }
  }
}

TEST_CASE("impute: column with no observations falls back to 0 with warning") {
  FeatureMatrix fm;
  fm.rows = 2;
  fm.cols = 1;
  fm.column_names = {"ghost"};
  fm.row_ids = {"a", "b"};
  fm.values = {4, 2};
  fm.missing = {1, 1};
  std::vector<std::string> warnings;
  const FeatureMatrix out =
      impute(fm, ImputeStrategy::MedianOfObserved(), &warnings);
  CHECK(out.values == std::vector<double>{0, 0});
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("ghost") != std::string::npos);
}

TEST_CASE("standardize: z-scores with population std") {
  FeatureMatrix fm;
  fm.rows = 2;
  fm.cols = 2;
  fm.column_names = {"x", "const"};
  fm.row_ids = {"a", "b"};
  fm.values = {1, 7, 3, 7};
  const auto [out, stats] = standardize(fm);
  CHECK(out.values[0] == doctest::Approx(-1.0));
  CHECK(out.values[2] == doctest::Approx(1.0));
  CHECK(out.values[1] == 0.0);  // zero-variance column maps to 0
  CHECK(out.values[3] == 0.0);
  CHECK(stats.mean[0] == doctest::Approx(2.0));
  CHECK(stats.stddev[0] == doctest::Approx(1.0));
}

TEST_CASE("standardize: train stats applied to a shifted test split") {
  FeatureMatrix train;
  train.rows = 4;
  train.cols = 1;
  train.column_names = {"x"};
  train.row_ids = {"a", "b", "c", "d"};
  train.values = {0, 1, 2, 3};
  const auto [train_std, stats] = standardize(train);

  FeatureMatrix test = train;
  test.values = {10, 11, 12, 13};  // shifted split
  const auto [test_std, stats2] = standardize(test, &stats);
  // not re-centered on its own mean: all values stay far from zero
  for (double v : test_std.values) CHECK(v > 5.0);
  CHECK(stats2.mean == stats.mean);

  // fitting-split moments: mean 0, variance 1
  for (std::uint32_t c = 0; c < train_std.cols; ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < train_std.rows; ++r) mean += train_std.at(r, c);
    mean /= train_std.rows;
    for (std::size_t r = 0; r < train_std.rows; ++r) {
      const double d = train_std.at(r, c) - mean;
      var += d * d;
    }
    var /= train_std.rows;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(var - 1.0) < 1e-6);
  }
}

TEST_CASE("standardize requires an imputed matrix") {
  FeatureMatrix fm;
  fm.rows = 1;
  fm.cols = 1;
  fm.column_names = {"x"};
  fm.row_ids = {"a"};
  fm.values = {1};
  fm.missing = {1};
  CHECK_THROWS_AS(standardize(fm), std::invalid_argument);
}

TEST_CASE("concat: embedding columns first, rows aligned by id") {
  EmbeddingMatrix emb;
  emb.dims = 2;
  emb.labels = {"a", "b"};
  emb.values = {1, 2, 3, 4};

  FeatureMatrix fm;
  fm.rows = 2;
  fm.cols = 3;
  fm.column_names = {"f0", "f1", "f2"};
  fm.row_ids = {"b", "a"};  // deliberately permuted
  fm.values = {10, 11, 12, 20, 21, 22};

  const FeatureMatrix out = concat(emb, fm);
  CHECK(out.cols == 5);
  REQUIRE(out.rows == 2);
  CHECK(out.row_ids == std::vector<std::string>{"a", "b"});
  CHECK(out.values == std::vector<double>{1, 2, 20, 21, 22, 3, 4, 10, 11, 12});

  FeatureMatrix mismatched = fm;
  mismatched.row_ids = {"b", "zz"};
  CHECK_THROWS_WITH_AS(concat(emb, mismatched), doctest::Contains("only one side"),
                       std::runtime_error);
}

TEST_CASE("feature matrix csv round-trip, with and without mask") {
  FeatureMatrix fm;
  fm.rows = 2;
  fm.cols = 2;
  fm.column_names = {"x", "y"};
  fm.row_ids = {"a", "b"};
  fm.values = {1.5, 0, 2.25, -3};
  fm.missing = {0, 1, 0, 0};

  std::stringstream buffer;
  write_feature_matrix(fm, buffer);
  const FeatureMatrix back = read_feature_matrix(buffer, "mem");
  CHECK(back.rows == 2);
  CHECK(back.cols == 2);
  CHECK(back.column_names == fm.column_names);
  CHECK(back.row_ids == fm.row_ids);
  CHECK(back.missing == fm.missing);
  CHECK(back.values[0] == 1.5);
  CHECK(back.values[3] == -3.0);

  const FeatureMatrix imputed = impute(fm, ImputeStrategy::Constant(0.0));
  std::stringstream buffer2;
  write_feature_matrix(imputed, buffer2);
  const FeatureMatrix back2 = read_feature_matrix(buffer2, "mem");
  CHECK(!back2.has_mask());
  CHECK(back2.values == imputed.values);
}

TEST_CASE("labels csv parses and round-trips") {
  std::vector<LabelRecord> labels{{"a", NodeClass::kHuman},
                                  {"b", NodeClass::kTechnical},
                                  {"c", NodeClass::kSophisticated}};
  std::stringstream buffer;
  write_labels_csv(labels, buffer);
  const auto back = read_labels_csv(buffer, "mem");
  REQUIRE(back.size() == 3);
  CHECK(back[1].id == "b");
  CHECK(back[1].node_class == NodeClass::kTechnical);

  std::istringstream bad("id,class\nx,robot\n");
  CHECK_THROWS_WITH_AS(read_labels_csv(bad, "mem"), doctest::Contains("mem:2"),
                       std::runtime_error);
}
