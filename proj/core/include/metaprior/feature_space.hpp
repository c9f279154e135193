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

#ifndef METAPRIOR_FEATURE_SPACE_HPP_
#define METAPRIOR_FEATURE_SPACE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metaprior/probit.hpp"

namespace metaprior {

inline const std::string kBiasCategory = "bias";
inline const std::string kFirstOrderCategory = "first_order";
inline const std::string kSecondOrderCategory = "second_order";

struct CategoricalFeature {
  std::string name;
  std::vector<std::string> levels;
};

// One-hot encoding layout over categorical features plus pairwise
// interactions. Index 0 is the bias; first-order blocks follow in feature
// order; each interaction block is row-major over (level_j, level_k).
// Every encoded index belongs to exactly one of {bias, first_order,
// second_order}.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::vector<CategoricalFeature> features,
                std::vector<std::pair<std::uint32_t, std::uint32_t>> interactions);

  const std::vector<CategoricalFeature>& features() const { return features_; }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& interactions()
      const {
    return interactions_;
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t first_order_count() const;
  std::size_t second_order_count() const;

  std::size_t bias_index() const { return 0; }
  // Encoded index of level `level` of feature `f`.
  std::size_t first_order_index(std::size_t f, std::size_t level) const;
  // Encoded index of (level_j, level_k) for interaction pair `p`.
  std::size_t interaction_index(std::size_t p, std::size_t level_j,
                                std::size_t level_k) const;

  // Level id of `value` within feature `f`; throws ConfigError listing the
  // value when it was never seen in this schema.
  std::size_t level_of(std::size_t f, const std::string& value) const;

  CategoryMap category_map() const;

  // Encodes one record (a level value per feature, in schema feature
  // order). All encoded values are 1.
  SparseVector encode_row(std::span<const std::string> row) const;

  // Convenience: adds every unordered feature pair as an interaction.
  static FeatureSchema with_all_pairs(std::vector<CategoricalFeature> features);

  std::string to_json() const;
  static FeatureSchema from_json(const std::string& text);

 private:
  std::vector<CategoricalFeature> features_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> interactions_;
  std::vector<std::size_t> first_order_offset_;
  std::vector<std::size_t> interaction_offset_;
  std::size_t dimension_ = 0;
};

// Combinatorial layout universe: D widgets, widget i offering
// variations[i] >= 1 alternative contents. Total layouts = prod variations.
struct LayoutSpace {
  std::vector<std::int32_t> variations;

  std::size_t widget_count() const { return variations.size(); }
  std::uint64_t total_layouts() const;
};

// One concrete page: choices[i] in {1 .. variations[i]}.
struct Layout {
  std::vector<std::int32_t> choices;

  bool operator==(const Layout&) const = default;
  // Lexicographic order; used for deterministic tie-breaking.
  bool operator<(const Layout& other) const { return choices < other.choices; }
};

// Binary featurization of layouts: bias + one first-order indicator per
// widget + one second-order indicator per widget pair, so every encoding has
// exactly 1 + D + D(D-1)/2 active entries. With `normalize` set, entries are
// scaled by 1/sqrt(1 + D + D(D-1)/2) so that ||x|| <= 1.
class LayoutEncoder {
 public:
  explicit LayoutEncoder(LayoutSpace space, bool normalize = false);

  const LayoutSpace& space() const { return space_; }
  const FeatureSchema& schema() const { return schema_; }
  std::size_t dimension() const { return schema_.dimension(); }
  double value_scale() const { return scale_; }

  SparseVector encode(const Layout& layout) const;

  // Linear score of a layout under a dense weight vector (unscaled
  // indicator sum; the normalization factor cancels in any argmax).
  double score(const Layout& layout, std::span<const double> weights) const;

  // All layouts in lexicographic order. Throws ConfigError when the space
  // has more than `cap` layouts.
  std::vector<Layout> enumerate(std::uint64_t cap = 100000) const;

 private:
  void check(const Layout& layout) const;

  LayoutSpace space_;
  FeatureSchema schema_;
  double scale_ = 1.0;
};

}  // namespace metaprior

#endif  // METAPRIOR_FEATURE_SPACE_HPP_
