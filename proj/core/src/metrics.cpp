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

#include "metaprior/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metaprior/errors.hpp"

namespace metaprior {

using nlohmann::json;

double log_loss(std::span<const double> predictions,
                std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ConfigError("log_loss: predictions and labels differ in length");
  }
  if (predictions.empty()) {
    throw ConfigError("log_loss: empty input");
  }
  constexpr double kEps = 1e-15;
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p = std::clamp(predictions[i], kEps, 1.0 - kEps);
    const int y = labels[i] > 0 ? 1 : 0;  // {-1,+1} remaps to {0,1}
    acc -= y == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return acc / static_cast<double>(predictions.size());
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string cell(const std::optional<double>& v) {
  return v.has_value() ? format_double(*v) : std::string();
}

std::optional<double> parse_cell(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

json row_to_json(const MetricsRow& r) {
  auto opt = [](const std::optional<double>& v) {
    return v.has_value() ? json(*v) : json(nullptr);
  };
  return json{{"batch", r.batch},
              {"t", r.t},
              {"log_loss", opt(r.log_loss)},
              {"cum_success", opt(r.cum_success)},
              {"rel_baseline", opt(r.rel_baseline)},
              {"tau1_hat", opt(r.tau1_hat)},
              {"tau2_hat", opt(r.tau2_hat)}};
}

MetricsRow row_from_json(const json& rec) {
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!rec.contains(key) || rec.at(key).is_null()) return std::nullopt;
    return rec.at(key).get<double>();
  };
  MetricsRow r;
  r.batch = rec.at("batch").get<std::int64_t>();
  r.t = rec.at("t").get<std::int64_t>();
  r.log_loss = opt("log_loss");
  r.cum_success = opt("cum_success");
  r.rel_baseline = opt("rel_baseline");
  r.tau1_hat = opt("tau1_hat");
  r.tau2_hat = opt("tau2_hat");
  return r;
}

}  // namespace

void export_metrics(const MetricsSeries& series, const std::string& path,
                    MetricsFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics file: " + path);
  if (format == MetricsFormat::kCsv) {
    out << "batch,t,log_loss,cum_success,rel_baseline,tau1_hat,tau2_hat\n";
    for (const auto& r : series.rows) {
      out << r.batch << ',' << r.t << ',' << cell(r.log_loss) << ','
          << cell(r.cum_success) << ',' << cell(r.rel_baseline) << ','
          << cell(r.tau1_hat) << ',' << cell(r.tau2_hat) << '\n';
    }
  } else {
    for (const auto& r : series.rows) {
      out << row_to_json(r).dump() << '\n';
    }
  }
  if (!out) throw IoError("write failure on metrics file: " + path);
}

MetricsSeries import_metrics(const std::string& path, MetricsFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file: " + path);
  MetricsSeries series;
  std::string line;
  if (format == MetricsFormat::kCsv) {
    if (!std::getline(in, line)) throw IoError("metrics file empty: " + path);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) cells.push_back(c);
      cells.resize(7);
      MetricsRow r;
      r.batch = std::stoll(cells[0]);
      r.t = std::stoll(cells[1]);
      r.log_loss = parse_cell(cells[2]);
      r.cum_success = parse_cell(cells[3]);
      r.rel_baseline = parse_cell(cells[4]);
      r.tau1_hat = parse_cell(cells[5]);
      r.tau2_hat = parse_cell(cells[6]);
      series.rows.push_back(r);
    }
  } else {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      series.rows.push_back(row_from_json(json::parse(line)));
    }
  }
  return series;
}

std::optional<std::int64_t> plateau_round(std::span<const double> cum_regret,
                                          double window_fraction,
                                          double slope_threshold) {
  const auto n = static_cast<std::int64_t>(cum_regret.size());
  if (n == 0) return std::nullopt;
  const auto window = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(window_fraction * n)));
  for (std::int64_t t = window; t < n; ++t) {
    const double slope =
        (cum_regret[t] - cum_regret[t - window]) / static_cast<double>(window);
    if (slope < slope_threshold) return t + 1;  // rounds are 1-based
  }
  return std::nullopt;
}

}  // namespace metaprior
