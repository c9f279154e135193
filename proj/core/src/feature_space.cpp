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

#include "metaprior/feature_space.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "metaprior/errors.hpp"

namespace metaprior {

using nlohmann::json;

FeatureSchema::FeatureSchema(
    std::vector<CategoricalFeature> features,
    std::vector<std::pair<std::uint32_t, std::uint32_t>> interactions)
    : features_(std::move(features)), interactions_(std::move(interactions)) {
  for (const auto& f : features_) {
    if (f.levels.empty()) {
      throw ConfigError("feature '" + f.name + "' has no levels");
    }
  }
  for (const auto& [j, k] : interactions_) {
    if (j >= k || k >= features_.size()) {
      throw ConfigError("interaction pair out of range or not ordered");
    }
  }
  std::size_t offset = 1;  // bias at 0
  first_order_offset_.reserve(features_.size());
  for (const auto& f : features_) {
    first_order_offset_.push_back(offset);
    offset += f.levels.size();
  }
  interaction_offset_.reserve(interactions_.size());
  for (const auto& [j, k] : interactions_) {
    interaction_offset_.push_back(offset);
    offset += features_[j].levels.size() * features_[k].levels.size();
  }
  dimension_ = offset;
}

std::size_t FeatureSchema::first_order_count() const {
  std::size_t n = 0;
  for (const auto& f : features_) n += f.levels.size();
  return n;
}

std::size_t FeatureSchema::second_order_count() const {
  return dimension_ - 1 - first_order_count();
}

std::size_t FeatureSchema::first_order_index(std::size_t f,
                                             std::size_t level) const {
  if (f >= features_.size() || level >= features_[f].levels.size()) {
    throw ConfigError("first_order_index out of range");
  }
  return first_order_offset_[f] + level;
}

std::size_t FeatureSchema::interaction_index(std::size_t p, std::size_t level_j,
                                             std::size_t level_k) const {
  if (p >= interactions_.size()) {
    throw ConfigError("interaction index out of range");
  }
  const auto [j, k] = interactions_[p];
  const std::size_t card_k = features_[k].levels.size();
  if (level_j >= features_[j].levels.size() || level_k >= card_k) {
    throw ConfigError("interaction level out of range");
  }
  return interaction_offset_[p] + level_j * card_k + level_k;
}

std::size_t FeatureSchema::level_of(std::size_t f,
                                    const std::string& value) const {
  const auto& levels = features_[f].levels;
  const auto it = std::find(levels.begin(), levels.end(), value);
  if (it == levels.end()) {
    throw ConfigError("unknown level '" + value + "' for feature '" +
                      features_[f].name + "'");
  }
  return static_cast<std::size_t>(it - levels.begin());
}

CategoryMap FeatureSchema::category_map() const {
  CategoryMap map;
  map.names = {kBiasCategory, kFirstOrderCategory, kSecondOrderCategory};
  map.of_feature.assign(dimension_, 2);
  map.of_feature[0] = 0;
  const std::size_t first_end = 1 + first_order_count();
  for (std::size_t i = 1; i < first_end; ++i) map.of_feature[i] = 1;
  return map;
}

SparseVector FeatureSchema::encode_row(std::span<const std::string> row) const {
  if (row.size() != features_.size()) {
    throw ConfigError("row has " + std::to_string(row.size()) +
                      " values; schema expects " +
                      std::to_string(features_.size()));
  }
  std::vector<std::size_t> levels(row.size());
  for (std::size_t f = 0; f < row.size(); ++f) levels[f] = level_of(f, row[f]);

  SparseVector x;
  x.push_back(0, 1.0);
  for (std::size_t f = 0; f < row.size(); ++f) {
    x.push_back(static_cast<std::int32_t>(first_order_index(f, levels[f])), 1.0);
  }
  for (std::size_t p = 0; p < interactions_.size(); ++p) {
    const auto [j, k] = interactions_[p];
    x.push_back(
        static_cast<std::int32_t>(interaction_index(p, levels[j], levels[k])),
        1.0);
  }
  return x;
}

FeatureSchema FeatureSchema::with_all_pairs(
    std::vector<CategoricalFeature> features) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  const auto n = static_cast<std::uint32_t>(features.size());
  for (std::uint32_t j = 0; j < n; ++j) {
    for (std::uint32_t k = j + 1; k < n; ++k) pairs.emplace_back(j, k);
  }
  return FeatureSchema(std::move(features), std::move(pairs));
}

std::string FeatureSchema::to_json() const {
  json doc;
  doc["features"] = json::array();
  for (const auto& f : features_) {
    doc["features"].push_back({{"name", f.name}, {"levels", f.levels}});
  }
  doc["interactions"] = json::array();
  for (const auto& [j, k] : interactions_) {
    doc["interactions"].push_back(
        {features_[j].name, features_[k].name});
  }
  // Category assignment as index lists keyed by category name.
  std::vector<std::size_t> first, second;
  const std::size_t first_end = 1 + first_order_count();
  for (std::size_t i = 1; i < first_end; ++i) first.push_back(i);
  for (std::size_t i = first_end; i < dimension_; ++i) second.push_back(i);
  doc["categories"] = {{"bias", {0}},
                       {"first_order", first},
                       {"second_order", second}};
  return doc.dump(2);
}

FeatureSchema FeatureSchema::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schema parse error: ") + e.what());
  }
  if (!doc.contains("features") || !doc["features"].is_array()) {
    throw ConfigError("schema: missing features[]");
  }
  std::vector<CategoricalFeature> features;
  for (const auto& f : doc["features"]) {
    CategoricalFeature cf;
    cf.name = f.at("name").get<std::string>();
    cf.levels = f.at("levels").get<std::vector<std::string>>();
    features.push_back(std::move(cf));
  }
  auto index_of = [&](const std::string& name) -> std::uint32_t {
    for (std::uint32_t i = 0; i < features.size(); ++i) {
      if (features[i].name == name) return i;
    }
    throw ConfigError("schema: interaction references unknown feature '" +
                      name + "'");
  };
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& pair : doc.value("interactions", json::array())) {
    std::uint32_t j = index_of(pair.at(0).get<std::string>());
    std::uint32_t k = index_of(pair.at(1).get<std::string>());
    if (j > k) std::swap(j, k);
    pairs.emplace_back(j, k);
  }
  return FeatureSchema(std::move(features), std::move(pairs));
}

std::uint64_t LayoutSpace::total_layouts() const {
  std::uint64_t total = 1;
  for (const auto n : variations) {
    if (n < 1) throw ConfigError("layout space: variations must be >= 1");
    total *= static_cast<std::uint64_t>(n);
  }
  return total;
}

namespace {

FeatureSchema schema_for(const LayoutSpace& space) {
  if (space.variations.empty()) {
    throw ConfigError("layout space needs at least one widget");
  }
  std::vector<CategoricalFeature> features;
  features.reserve(space.variations.size());
  for (std::size_t i = 0; i < space.variations.size(); ++i) {
    CategoricalFeature f;
    f.name = "widget_" + std::to_string(i + 1);
    for (std::int32_t c = 1; c <= space.variations[i]; ++c) {
      f.levels.push_back(std::to_string(c));
    }
    features.push_back(std::move(f));
  }
  return FeatureSchema::with_all_pairs(std::move(features));
}

}  // namespace

LayoutEncoder::LayoutEncoder(LayoutSpace space, bool normalize)
    : space_(std::move(space)), schema_(schema_for(space_)) {
  if (normalize) {
    const double d = static_cast<double>(space_.widget_count());
    scale_ = 1.0 / std::sqrt(1.0 + d + d * (d - 1.0) / 2.0);
  }
}

void LayoutEncoder::check(const Layout& layout) const {
  if (layout.choices.size() != space_.widget_count()) {
    throw ConfigError("layout has wrong widget count");
  }
  for (std::size_t i = 0; i < layout.choices.size(); ++i) {
    if (layout.choices[i] < 1 || layout.choices[i] > space_.variations[i]) {
      throw ConfigError("content id " + std::to_string(layout.choices[i]) +
                        " out of range for widget " + std::to_string(i + 1));
    }
  }
}

SparseVector LayoutEncoder::encode(const Layout& layout) const {
  check(layout);
  const std::size_t d = space_.widget_count();
  SparseVector x;
  x.push_back(0, scale_);
  for (std::size_t i = 0; i < d; ++i) {
    const auto level = static_cast<std::size_t>(layout.choices[i] - 1);
    x.push_back(static_cast<std::int32_t>(schema_.first_order_index(i, level)),
                scale_);
  }
  std::size_t p = 0;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j + 1; k < d; ++k, ++p) {
      const auto lj = static_cast<std::size_t>(layout.choices[j] - 1);
      const auto lk = static_cast<std::size_t>(layout.choices[k] - 1);
      x.push_back(static_cast<std::int32_t>(schema_.interaction_index(p, lj, lk)),
                  scale_);
    }
  }
  return x;
}

double LayoutEncoder::score(const Layout& layout,
                            std::span<const double> weights) const {
  check(layout);
  if (weights.size() != schema_.dimension()) {
    throw ConfigError("weight vector does not match encoding dimension");
  }
  const std::size_t d = space_.widget_count();
  double score = weights[0];
  for (std::size_t i = 0; i < d; ++i) {
    const auto level = static_cast<std::size_t>(layout.choices[i] - 1);
    score += weights[schema_.first_order_index(i, level)];
  }
  std::size_t p = 0;
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j + 1; k < d; ++k, ++p) {
      const auto lj = static_cast<std::size_t>(layout.choices[j] - 1);
      const auto lk = static_cast<std::size_t>(layout.choices[k] - 1);
      score += weights[schema_.interaction_index(p, lj, lk)];
    }
  }
  return score;
}

std::vector<Layout> LayoutEncoder::enumerate(std::uint64_t cap) const {
  const std::uint64_t total = space_.total_layouts();
  if (total > cap) {
    throw ConfigError("layout space has " + std::to_string(total) +
                      " layouts, above the enumeration cap of " +
                      std::to_string(cap));
  }
  std::vector<Layout> all;
  all.reserve(total);
  Layout current;
  current.choices.assign(space_.widget_count(), 1);
  for (std::uint64_t n = 0; n < total; ++n) {
    all.push_back(current);
    // lexicographic increment, last widget fastest
    for (std::size_t i = space_.widget_count(); i-- > 0;) {
      if (current.choices[i] < space_.variations[i]) {
        ++current.choices[i];
        break;
      }
      current.choices[i] = 1;
    }
  }
  return all;
}

}  // namespace metaprior
