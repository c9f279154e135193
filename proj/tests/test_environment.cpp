// Copyright 2026 The metaprior Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "metaprior/environment.hpp"
#include "metaprior/errors.hpp"
#include "metaprior/math.hpp"
#include "metaprior/meta_prior.hpp"
#include "support/oracles.hpp"

using namespace metaprior;

namespace {

FeatureSchema small_schema(int features, int levels) {
  std::vector<CategoricalFeature> fs;
  for (int f = 0; f < features; ++f) {
    CategoricalFeature cf;
    cf.name = "f" + std::to_string(f);
    for (int l = 0; l < levels; ++l) cf.levels.push_back(std::to_string(l));
    fs.push_back(std::move(cf));
  }
  return FeatureSchema::with_all_pairs(std::move(fs));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generate_environment") {
  SUBCASE("degenerate tau^2 pins weights to nu") {
    EnvironmentSpec spec;
    spec.schema = small_schema(2, 3);
    spec.category_priors[kBiasCategory] = {0.3, 0.0};
    spec.category_priors[kFirstOrderCategory] = {-0.2, 0.0};
    spec.category_priors[kSecondOrderCategory] = {0.1, 0.0};
    const Environment env = generate_environment(spec);
    CHECK(env.true_weights[0] == doctest::Approx(0.3));
    for (std::size_t i = 1; i <= spec.schema.first_order_count(); ++i) {
      CHECK(env.true_weights[i] == doctest::Approx(-0.2));
    }
    CHECK(env.true_weights.back() == doctest::Approx(0.1));
  }

  SUBCASE("same seed twice gives identical weights") {
    EnvironmentSpec spec;
    spec.schema = small_schema(3, 4);
    spec.seed = 31;
    const Environment a = generate_environment(spec);
    const Environment b = generate_environment(spec);
    CHECK(a.true_weights == b.true_weights);
    spec.seed = 32;
    CHECK(generate_environment(spec).true_weights != a.true_weights);
  }

  SUBCASE("drawn first-order weights concentrate at tau1^2 = 0.6") {
    // One feature with 1e4 levels gives 1e4 first-order draws.
    std::vector<CategoricalFeature> fs(1);
    fs[0].name = "wide";
    for (int l = 0; l < 10000; ++l) fs[0].levels.push_back(std::to_string(l));
    EnvironmentSpec spec;
    spec.schema = FeatureSchema(std::move(fs), {});
    spec.category_priors[kFirstOrderCategory] = {0.0, 0.6};
    spec.seed = 2718;
    const Environment env = generate_environment(spec);
    double sum = 0.0, sum_sq = 0.0;
    const std::size_t n = spec.schema.first_order_count();
    for (std::size_t i = 1; i <= n; ++i) {
      sum += env.true_weights[i];
      sum_sq += env.true_weights[i] * env.true_weights[i];
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(var >= 0.57);
    CHECK(var <= 0.63);
  }
}

TEST_CASE("sample_reward frequencies") {
  EnvironmentSpec spec;
  spec.schema = small_schema(1, 2);
  spec.category_priors[kBiasCategory] = {0.0, 0.0};
  spec.category_priors[kFirstOrderCategory] = {0.0, 0.0};
  spec.category_priors[kSecondOrderCategory] = {0.0, 0.0};
  Environment env = generate_environment(spec);

  auto frequency = [&](double score, std::size_t draws) {
    Rng rng = make_rng(90);
    std::size_t hits = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < draws; ++i) {
      if (reward_from_uniform(score, unit(rng)) == 1) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(draws);
  };

  // 5-sigma band around p for n draws.
  auto band = [](double p, std::size_t n) {
    return 5.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  };

  CHECK(std::abs(frequency(0.0, 100000) - 0.5) <= band(0.5, 100000));
  CHECK(frequency(8.0, 100000) >= 0.9999);
  // Phi(1) = 0.841344746 frozen from the quadrature oracle.
  const double phi1 = oracles::quadrature_norm_cdf(1.0);
  CHECK(std::abs(frequency(1.0, 100000) - phi1) <= band(phi1, 100000));
}

TEST_CASE("generate_supervised_stream shapes") {
  EnvironmentSpec spec;
  spec.schema = small_schema(3, 3);
  spec.category_priors[kFirstOrderCategory] = {0.0, 0.85};
  spec.category_priors[kSecondOrderCategory] = {0.0, 0.24};
  spec.seed = 5;
  const Environment env = generate_environment(spec);

  SUBCASE("six batches of 5027") {
    const auto stream = generate_supervised_stream(env, 5027, 6, 100, 7);
    CHECK(stream.batches.size() == 6);
    for (const auto& b : stream.batches) CHECK(b.size() == 5027);
    CHECK(stream.total_train() == 6 * 5027);
    CHECK(stream.provenance == "synthetic");
  }

  SUBCASE("thirty batches of 1000") {
    const auto stream = generate_supervised_stream(env, 1000, 30, 100, 7);
    CHECK(stream.batches.size() == 30);
    for (const auto& b : stream.batches) CHECK(b.size() == 1000);
  }

  SUBCASE("default spec base rate stays inside the guard band") {
    const auto stream = generate_supervised_stream(env, 2000, 3, 100, 7);
    CHECK(stream.warning.empty());
  }

  SUBCASE("extreme bias trips the regenerate warning") {
    EnvironmentSpec biased = spec;
    biased.category_priors[kBiasCategory] = {8.0, 0.0};
    const auto stream = generate_supervised_stream(
        generate_environment(biased), 500, 2, 10, 7);
    CHECK_FALSE(stream.warning.empty());
  }

  SUBCASE("zero sizes are rejected") {
    CHECK_THROWS_AS(generate_supervised_stream(env, 0, 3, 10, 7), ConfigError);
  }
}

TEST_CASE("generated hierarchies are recovered by the estimator") {
  // End to end across modules: draw true weights from (0.852, 0.241)
  // hyper-variances, fake posteriors around them with known noise, and ask
  // the estimator for the hyper-variances back. Median relative error over
  // 50 replications within 10% for each category; the estimated ordering
  // matches the true one in at least 95% of replications.
  std::vector<CategoricalFeature> fs(2);
  fs[0].name = "wide1";
  fs[1].name = "wide2";
  for (int l = 0; l < 200; ++l) {
    fs[0].levels.push_back(std::to_string(l));
    fs[1].levels.push_back(std::to_string(l));
  }
  EnvironmentSpec spec;
  spec.schema = FeatureSchema::with_all_pairs(std::move(fs));
  spec.category_priors[kFirstOrderCategory] = {0.0, 0.852};
  spec.category_priors[kSecondOrderCategory] = {0.0, 0.241};

  const CategoryMap map = spec.schema.category_map();
  MetaPriorEstimateOptions zero_mean;
  Rng noise_rng = make_rng(424242);
  std::normal_distribution<double> standard(0.0, 1.0);
  std::uniform_real_distribution<double> noise_var(0.05, 0.2);

  std::vector<double> err1, err2;
  int ordered = 0;
  for (int rep = 0; rep < 50; ++rep) {
    spec.seed = 9000 + rep;
    const Environment env = generate_environment(spec);
    std::vector<WeightPosterior> posteriors(env.true_weights.size());
    for (std::size_t i = 0; i < posteriors.size(); ++i) {
      const double v = noise_var(noise_rng);
      posteriors[i] = {env.true_weights[i] + std::sqrt(v) * standard(noise_rng),
                       v};
    }
    const auto estimates = estimate_meta_prior(
        posteriors, map, {kFirstOrderCategory, kSecondOrderCategory},
        zero_mean);
    err1.push_back(std::abs(estimates[0].tau_sq_hat - 0.852) / 0.852);
    err2.push_back(std::abs(estimates[1].tau_sq_hat - 0.241) / 0.241);
    if (estimates[0].tau_sq_hat > estimates[1].tau_sq_hat) ++ordered;
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(median(err1) <= 0.10);
  CHECK(median(err2) <= 0.10);
  CHECK(ordered >= 48);  // >= 95% of 50
}

TEST_CASE("stream serialization is byte-stable and lossless") {
  EnvironmentSpec spec;
  spec.schema = small_schema(2, 2);
  spec.seed = 12;
  const Environment env = generate_environment(spec);
  const auto stream = generate_supervised_stream(env, 50, 2, 20, 3);

  const std::string path_a = "stream_a.jsonl";
  const std::string path_b = "stream_b.jsonl";
  write_stream(stream, path_a);
  write_stream(stream, path_b);
  CHECK(read_file(path_a) == read_file(path_b));

  const DatasetStream loaded = read_stream(path_a);
  REQUIRE(loaded.batches.size() == stream.batches.size());
  CHECK(loaded.test.size() == stream.test.size());
  for (std::size_t b = 0; b < stream.batches.size(); ++b) {
    REQUIRE(loaded.batches[b].size() == stream.batches[b].size());
    for (std::size_t i = 0; i < stream.batches[b].size(); ++i) {
      CHECK(loaded.batches[b][i].x.indices == stream.batches[b][i].x.indices);
      CHECK(loaded.batches[b][i].label == stream.batches[b][i].label);
    }
  }
  std::remove(path_a.c_str());
  std::remove(path_b.c_str());
}

TEST_CASE("csv ingestion") {
  const std::string path = "toy.csv";
  {
    std::ofstream out(path);
    out << "color,size,bought\n";
    out << "red,small,yes\n";
    out << "blue,large,no\n";
    out << "red,large,yes\n";
  }

  SUBCASE("hand-checked encoding with all pairs") {
    CsvIngestOptions options;
    options.label_column = "bought";
    options.positive_label = "yes";
    const auto result = ingest_csv(path, options);
    // 2 features with 2 levels each: 1 + 4 + 4 = 9 columns.
    CHECK(result.schema.dimension() == 9);
    CHECK(result.stream.batches.size() == 1);
    REQUIRE(result.stream.batches[0].size() == 3);
    // Levels are sorted: blue=0, red=1; large=0, small=1.
    const auto& first = result.stream.batches[0][0];  // red, small, yes
    CHECK(first.label == 1);
    CHECK(first.x.indices ==
          std::vector<std::int32_t>{0, 2, 4, 5 + 1 * 2 + 1});
    const auto& second = result.stream.batches[0][1];  // blue, large, no
    CHECK(second.label == -1);
    CHECK(second.x.indices == std::vector<std::int32_t>{0, 1, 3, 5});
  }

  SUBCASE("interaction mode none drops second-order terms") {
    CsvIngestOptions options;
    options.label_column = "bought";
    options.positive_label = "yes";
    options.interactions = InteractionMode::kNone;
    const auto result = ingest_csv(path, options);
    CHECK(result.schema.second_order_count() == 0);
    CHECK(result.schema.dimension() == 5);
  }

  SUBCASE("missing label column") {
    CsvIngestOptions options;
    options.label_column = "nope";
    options.positive_label = "yes";
    CHECK_THROWS_WITH_AS(ingest_csv(path, options), doctest::Contains("nope"),
                         ConfigError);
  }

  SUBCASE("unseen test level is listed") {
    CsvIngestOptions options;
    options.label_column = "bought";
    options.positive_label = "yes";
    const auto result = ingest_csv(path, options);
    const std::string test_path = "toy_test.csv";
    {
      std::ofstream out(test_path);
      out << "color,size,bought\n";
      out << "green,small,yes\n";
    }
    CHECK_THROWS_WITH_AS(
        encode_csv_with_schema(test_path, result.schema, "bought", "yes"),
        doctest::Contains("green"), ConfigError);
    std::remove(test_path.c_str());
  }

  SUBCASE("rows with empty values are dropped") {
    const std::string sparse_path = "toy_sparse.csv";
    {
      std::ofstream out(sparse_path);
      out << "color,size,bought\n";
      out << "red,,yes\n";
      out << "blue,large,no\n";
    }
    CsvIngestOptions options;
    options.label_column = "bought";
    options.positive_label = "yes";
    const auto result = ingest_csv(sparse_path, options);
    CHECK(result.rows_dropped == 1);
    CHECK(result.stream.batches[0].size() == 1);
    std::remove(sparse_path.c_str());
  }

  SUBCASE("thirteen features yield 78 interaction pairs") {
    const std::string wide_path = "toy_wide.csv";
    {
      std::ofstream out(wide_path);
      for (int f = 0; f < 13; ++f) out << "f" << f << ",";
      out << "y\n";
      for (int r = 0; r < 4; ++r) {
        for (int f = 0; f < 13; ++f) out << "v" << (r % 2) << ",";
        out << (r % 2 == 0 ? "yes" : "no") << "\n";
      }
    }
    CsvIngestOptions options;
    options.label_column = "y";
    options.positive_label = "yes";
    const auto result = ingest_csv(wide_path, options);
    CHECK(result.schema.interactions().size() == 78);
    std::remove(wide_path.c_str());
  }

  std::remove(path.c_str());
}
