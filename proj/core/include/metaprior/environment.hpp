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

#ifndef METAPRIOR_ENVIRONMENT_HPP_
#define METAPRIOR_ENVIRONMENT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metaprior/feature_space.hpp"
#include "metaprior/probit.hpp"
#include "metaprior/rng.hpp"

namespace metaprior {

// Ground-truth generator: every feature's true effect is drawn from its
// category's hyper-Gaussian N(nu_k, tau_k^2). The bias term is its own
// category with an N(0, 1) default so it never contaminates the other
// categories' variance estimates.
struct EnvironmentSpec {
  FeatureSchema schema;
  std::optional<LayoutSpace> layout;  // set when the env backs a bandit
  bool normalize_layout = false;
  std::map<std::string, GaussianPrior> category_priors = {
      {kBiasCategory, {0.0, 1.0}},
      {kFirstOrderCategory, {0.0, 1.0}},
      {kSecondOrderCategory, {0.0, 1.0}},
  };
  std::uint64_t seed = 0;
};

struct Environment {
  EnvironmentSpec spec;
  std::vector<double> true_weights;  // one per encoded index
  double weight_norm = 0.0;          // ||mu*||, for the Lemma-style S bound

  double true_score(const SparseVector& x) const;
};

// Draws mu*_i ~ N(nu_k, tau_k^2) independently per category, in index
// order, reproducibly under spec.seed. tau_k^2 = 0 degenerates to nu_k.
Environment generate_environment(const EnvironmentSpec& spec);

// Binary probit reward: +1 with probability Phi(mu*' x).
std::int8_t sample_reward(const Environment& env, const SparseVector& x,
                          Rng& rng);
// Common-random-numbers variant: decides from a pre-drawn uniform.
std::int8_t reward_from_uniform(double true_score, double u);

struct DatasetStream {
  std::vector<std::vector<LabeledExample>> batches;
  std::vector<LabeledExample> test;
  std::string provenance;  // "synthetic" or "csv"
  std::string warning;     // set e.g. when the label base rate is extreme

  std::size_t total_train() const;
};

// Synthetic supervised stream: rows drawn uniformly over each feature's
// levels, labels sampled from the environment's probit truth, plus a fixed
// holdout test set. Warns (stream.warning) when the label base rate falls
// outside (0.05, 0.95).
DatasetStream generate_supervised_stream(const Environment& env,
                                         std::size_t n_per_batch,
                                         std::size_t n_batches,
                                         std::size_t n_test,
                                         std::uint64_t seed);

enum class InteractionMode { kAllPairs, kNone };

struct CsvIngestOptions {
  std::string label_column;
  std::string positive_label;
  InteractionMode interactions = InteractionMode::kAllPairs;
  std::size_t n_batches = 1;  // train split into this many equal batches
};

struct CsvIngestResult {
  DatasetStream stream;
  FeatureSchema schema;
  std::size_t rows_dropped = 0;  // rows with empty values
};

// Reads a categorical CSV (header row, quoted fields allowed), drops rows
// with empty values, builds a FeatureSchema from the observed levels
// (sorted), and encodes every row. Labels map to +1 when equal to
// options.positive_label, else -1.
CsvIngestResult ingest_csv(const std::string& path,
                           const CsvIngestOptions& options);

// Encodes a CSV against an existing schema (e.g. a test file against the
// training schema). A level unseen at schema-build time raises ConfigError
// listing it.
std::vector<LabeledExample> encode_csv_with_schema(
    const std::string& path, const FeatureSchema& schema,
    const std::string& label_column, const std::string& positive_label);

// Line-delimited stream serialization: {"batch": id, "indices": [...],
// "label": -1|1} with batch -1 for test rows. Byte-stable under a fixed
// stream.
void write_stream(const DatasetStream& stream, const std::string& path);
DatasetStream read_stream(const std::string& path);

}  // namespace metaprior

#endif  // METAPRIOR_ENVIRONMENT_HPP_
