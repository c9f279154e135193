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

#include "metaprior/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metaprior/errors.hpp"
#include "metaprior/math.hpp"

namespace metaprior {

using nlohmann::json;

double Environment::true_score(const SparseVector& x) const {
  double score = 0.0;
  for (std::size_t k = 0; k < x.indices.size(); ++k) {
    const auto i = static_cast<std::size_t>(x.indices[k]);
    if (i >= true_weights.size()) {
      throw ModelError("true_score: index out of range");
    }
    score += true_weights[i] * x.values[k];
  }
  return score;
}

Environment generate_environment(const EnvironmentSpec& spec) {
  const CategoryMap categories = spec.schema.category_map();
  for (const auto& [name, prior] : spec.category_priors) {
    if (prior.variance < 0.0) {
      throw ConfigError("environment: negative tau^2 for category " + name);
    }
  }
  Environment env;
  env.spec = spec;
  env.true_weights.resize(spec.schema.dimension());
  Rng rng = make_rng(derive_seed(spec.seed, "environment_weights"));
  std::normal_distribution<double> standard(0.0, 1.0);
  for (std::size_t i = 0; i < env.true_weights.size(); ++i) {
    const std::string& name = categories.names[categories.of_feature[i]];
    const auto it = spec.category_priors.find(name);
    if (it == spec.category_priors.end()) {
      throw ConfigError("environment: no true prior for category " + name);
    }
    const double sd = std::sqrt(it->second.variance);
    env.true_weights[i] = it->second.mean + sd * standard(rng);
  }
  double norm_sq = 0.0;
  for (double w : env.true_weights) norm_sq += w * w;
  env.weight_norm = std::sqrt(norm_sq);
  return env;
}

std::int8_t sample_reward(const Environment& env, const SparseVector& x,
                          Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return reward_from_uniform(env.true_score(x), unit(rng));
}

std::int8_t reward_from_uniform(double true_score, double u) {
  return u < math::probit_cdf(true_score) ? std::int8_t{1} : std::int8_t{-1};
}

std::size_t DatasetStream::total_train() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.size();
  return n;
}

DatasetStream generate_supervised_stream(const Environment& env,
                                         std::size_t n_per_batch,
                                         std::size_t n_batches,
                                         std::size_t n_test,
                                         std::uint64_t seed) {
  if (n_per_batch == 0 || n_batches == 0) {
    throw ConfigError("generate_supervised_stream: sizes must be positive");
  }
  const auto& schema = env.spec.schema;
  Rng rng = make_rng(derive_seed(seed, "supervised_stream"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto draw_row = [&]() {
    std::vector<std::string> row;
    row.reserve(schema.features().size());
    for (const auto& f : schema.features()) {
      std::uniform_int_distribution<std::size_t> pick(0, f.levels.size() - 1);
      row.push_back(f.levels[pick(rng)]);
    }
    LabeledExample ex;
    ex.x = schema.encode_row(row);
    ex.label = reward_from_uniform(env.true_score(ex.x), unit(rng));
    return ex;
  };

  DatasetStream stream;
  stream.provenance = "synthetic";
  std::size_t positives = 0;
  stream.batches.resize(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    stream.batches[b].reserve(n_per_batch);
    for (std::size_t i = 0; i < n_per_batch; ++i) {
      stream.batches[b].push_back(draw_row());
      if (stream.batches[b].back().label == 1) ++positives;
    }
  }
  stream.test.reserve(n_test);
  for (std::size_t i = 0; i < n_test; ++i) stream.test.push_back(draw_row());

  const double base_rate =
      static_cast<double>(positives) / static_cast<double>(stream.total_train());
  if (base_rate <= 0.05 || base_rate >= 0.95) {
    std::ostringstream msg;
    msg << "label base rate " << base_rate
        << " outside (0.05, 0.95); consider regenerating the environment";
    stream.warning = msg.str();
  }
  return stream;
}

namespace {

// Minimal CSV reader: comma separated, double-quoted fields allowed,
// quotes escaped by doubling.
std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t rows_dropped = 0;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("CSV file has no header row: " + path);
  }
  table.header = parse_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = parse_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw IoError("CSV row with " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(table.header.size()) +
                    ": " + path);
    }
    const bool has_empty =
        std::any_of(fields.begin(), fields.end(),
                    [](const std::string& f) { return f.empty(); });
    if (has_empty) {
      ++table.rows_dropped;
      continue;
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ConfigError("label column '" + name + "' not found in CSV header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

CsvIngestResult ingest_csv(const std::string& path,
                           const CsvIngestOptions& options) {
  CsvTable table = read_csv(path);
  const std::size_t label_col = find_column(table.header, options.label_column);
  if (table.rows.empty()) {
    throw IoError("CSV has no usable rows: " + path);
  }

  // Schema from observed levels, sorted for determinism.
  std::vector<CategoricalFeature> features;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == label_col) continue;
    std::vector<std::string> levels;
    for (const auto& row : table.rows) levels.push_back(row[c]);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    features.push_back({table.header[c], std::move(levels)});
    feature_cols.push_back(c);
  }
  FeatureSchema schema =
      options.interactions == InteractionMode::kAllPairs
          ? FeatureSchema::with_all_pairs(std::move(features))
          : FeatureSchema(std::move(features), {});

  const std::size_t n_batches = std::max<std::size_t>(1, options.n_batches);
  CsvIngestResult result{DatasetStream{}, schema, table.rows_dropped};
  result.stream.provenance = "csv";
  result.stream.batches.resize(n_batches);
  const std::size_t per_batch =
      (table.rows.size() + n_batches - 1) / n_batches;
  std::vector<std::string> values(feature_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      values[f] = table.rows[r][feature_cols[f]];
    }
    LabeledExample ex;
    ex.x = result.schema.encode_row(values);
    ex.label = table.rows[r][label_col] == options.positive_label
                   ? std::int8_t{1}
                   : std::int8_t{-1};
    result.stream.batches[std::min(r / per_batch, n_batches - 1)].push_back(
        std::move(ex));
  }
  return result;
}

std::vector<LabeledExample> encode_csv_with_schema(
    const std::string& path, const FeatureSchema& schema,
    const std::string& label_column, const std::string& positive_label) {
  CsvTable table = read_csv(path);
  const std::size_t label_col = find_column(table.header, label_column);
  std::vector<std::size_t> feature_cols;
  for (const auto& f : schema.features()) {
    feature_cols.push_back(find_column(table.header, f.name));
  }
  std::vector<LabeledExample> out;
  out.reserve(table.rows.size());
  std::vector<std::string> values(feature_cols.size());
  for (const auto& row : table.rows) {
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      values[f] = row[feature_cols[f]];
    }
    LabeledExample ex;
    ex.x = schema.encode_row(values);  // throws listing any unseen level
    ex.label =
        row[label_col] == positive_label ? std::int8_t{1} : std::int8_t{-1};
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

json example_to_json(int batch_id, const LabeledExample& ex) {
  json rec;
  rec["batch"] = batch_id;
  rec["indices"] = ex.x.indices;
  const bool unit_values =
      std::all_of(ex.x.values.begin(), ex.x.values.end(),
                  [](double v) { return v == 1.0; });
  if (!unit_values) rec["values"] = ex.x.values;
  rec["label"] = static_cast<int>(ex.label);
  return rec;
}

LabeledExample example_from_json(const json& rec) {
  LabeledExample ex;
  ex.x.indices = rec.at("indices").get<std::vector<std::int32_t>>();
  if (rec.contains("values")) {
    ex.x.values = rec.at("values").get<std::vector<double>>();
  } else {
    ex.x.values.assign(ex.x.indices.size(), 1.0);
  }
  ex.label = static_cast<std::int8_t>(rec.at("label").get<int>());
  return ex;
}

}  // namespace

void write_stream(const DatasetStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write stream file: " + path);
  json meta;
  meta["meta"] = {{"provenance", stream.provenance},
                  {"batches", stream.batches.size()},
                  {"warning", stream.warning}};
  out << meta.dump() << "\n";
  for (std::size_t b = 0; b < stream.batches.size(); ++b) {
    for (const auto& ex : stream.batches[b]) {
      out << example_to_json(static_cast<int>(b), ex).dump() << "\n";
    }
  }
  for (const auto& ex : stream.test) {
    out << example_to_json(-1, ex).dump() << "\n";
  }
  if (!out) throw IoError("write failure on stream file: " + path);
}

DatasetStream read_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stream file: " + path);
  DatasetStream stream;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty stream file: " + path);
  json meta;
  try {
    meta = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError("stream meta parse error in " + path + ": " + e.what());
  }
  stream.provenance = meta.at("meta").value("provenance", "");
  stream.warning = meta.at("meta").value("warning", "");
  stream.batches.resize(meta.at("meta").value("batches", std::size_t{0}));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("stream record parse error in " + path + ": " + e.what());
    }
    const int batch_id = rec.at("batch").get<int>();
    if (batch_id < 0) {
      stream.test.push_back(example_from_json(rec));
    } else {
      if (static_cast<std::size_t>(batch_id) >= stream.batches.size()) {
        stream.batches.resize(batch_id + 1);
      }
      stream.batches[batch_id].push_back(example_from_json(rec));
    }
  }
  return stream;
}

}  // namespace metaprior
