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

#ifndef METAPRIOR_METRICS_HPP_
#define METAPRIOR_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metaprior {

// One plot-ready record. Fields that do not apply to a given run kind
// (e.g. log loss for a bandit, success rate for a classifier) stay empty
// and export as blank CSV cells / JSON nulls.
struct MetricsRow {
  std::int64_t batch = 0;
  std::int64_t t = 0;  // round (bandit) or cumulative training rows (scenario)
  std::optional<double> log_loss;
  std::optional<double> cum_success;
  std::optional<double> rel_baseline;
  std::optional<double> tau1_hat;
  std::optional<double> tau2_hat;
};

struct MetricsSeries {
  std::vector<MetricsRow> rows;
};

// Mean binary cross-entropy. Labels may be given as {0,1} or {-1,+1};
// anything <= 0 counts as the negative class. Predictions are clipped to
// [1e-15, 1 - 1e-15] before taking logs. Throws ConfigError on length
// mismatch.
double log_loss(std::span<const double> predictions,
                std::span<const int> labels);

enum class MetricsFormat { kCsv, kJsonLines };

// Stable column order: batch,t,log_loss,cum_success,rel_baseline,tau1_hat,
// tau2_hat. Floats carry 10 significant digits. Throws IoError on failure.
void export_metrics(const MetricsSeries& series, const std::string& path,
                    MetricsFormat format);

MetricsSeries import_metrics(const std::string& path, MetricsFormat format);

// First round index (1-based) at which the trailing-window mean slope of
// the cumulative-regret curve drops below `slope_threshold`; the window is
// window_fraction of the horizon. Empty when the curve never flattens.
std::optional<std::int64_t> plateau_round(std::span<const double> cum_regret,
                                          double window_fraction = 0.05,
                                          double slope_threshold = 1e-6);

}  // namespace metaprior

#endif  // METAPRIOR_METRICS_HPP_
