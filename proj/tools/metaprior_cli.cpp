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

// metaprior CLI: empirical Bayes meta-prior estimation, batch-training
// scenarios, tau^2 sweeps, paired bandit A/B simulations, CSV ingestion,
// and the regret-bound calculator.
//
// Every parameter can come from a JSON config document (--config) and/or
// from flags carrying the same dotted key names; flags win. Exit codes:
// 0 success, 2 degenerate-prior abort, 3 configuration error, 4 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "metaprior/bandit.hpp"
#include "metaprior/environment.hpp"
#include "metaprior/errors.hpp"
#include "metaprior/lasso.hpp"
#include "metaprior/metrics.hpp"
#include "metaprior/regret_bound.hpp"
#include "metaprior/scenario.hpp"

using nlohmann::json;
using namespace metaprior;

namespace {

json load_config_file(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
}

// Reads a dotted path like "bootstrap.max_epochs" out of the config doc.
template <typename T>
T config_get(const json& doc, const std::string& dotted, T fallback) {
  const json* node = &doc;
  std::stringstream ss(dotted);
  std::string key;
  while (std::getline(ss, key, '.')) {
    if (!node->is_object() || !node->contains(key)) return fallback;
    node = &(*node)[key];
  }
  try {
    return node->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + dotted + "': " + e.what());
  }
}

bool config_has(const json& doc, const std::string& dotted) {
  const json* node = &doc;
  std::stringstream ss(dotted);
  std::string key;
  while (std::getline(ss, key, '.')) {
    if (!node->is_object() || !node->contains(key)) return false;
    node = &(*node)[key];
  }
  return true;
}

BootstrapConfig bootstrap_from(const json& doc, std::uint64_t run_seed) {
  BootstrapConfig b;
  b.epoch_size = config_get<std::size_t>(doc, "bootstrap.epoch_size", 0);
  b.max_epochs = config_get<std::size_t>(doc, "bootstrap.max_epochs", 16);
  b.resample = config_get<bool>(doc, "bootstrap.resample", true);
  b.seed = config_get<std::uint64_t>(doc, "bootstrap.seed",
                                     derive_seed(run_seed, "bootstrap"));
  b.min_tau_sq = config_get<double>(doc, "bootstrap.min_tau_sq",
                                    kDefaultMinTauSq);
  return b;
}

std::optional<LassoPruneSpec> lasso_from(const json& doc,
                                         std::uint64_t run_seed) {
  if (!config_has(doc, "lasso.lambda_grid")) return std::nullopt;
  LassoPruneSpec spec;
  spec.config.lambda_grid =
      config_get<std::vector<double>>(doc, "lasso.lambda_grid", {});
  if (spec.config.lambda_grid.empty()) return std::nullopt;
  spec.config.cv_folds = config_get<int>(doc, "lasso.cv_folds", 5);
  spec.config.gamma = config_get<double>(doc, "lasso.gamma", 1.0);
  spec.config.ridge_penalty =
      config_get<double>(doc, "lasso.ridge_penalty", 1.0);
  spec.config.seed = derive_seed(run_seed, "lasso_cv");
  spec.protect = config_get<std::vector<std::string>>(
      doc, "protect", {kBiasCategory, kFirstOrderCategory});
  return spec;
}

std::optional<std::pair<double, double>> override_from(const json& doc) {
  if (!config_has(doc, "prior_override.tau1_sq") ||
      !config_has(doc, "prior_override.tau2_sq")) {
    return std::nullopt;
  }
  return std::make_pair(config_get<double>(doc, "prior_override.tau1_sq", 1.0),
                        config_get<double>(doc, "prior_override.tau2_sq", 1.0));
}

Scenario scenario_from(const std::string& name) {
  if (name == "blip") return Scenario::kBlip;
  if (name == "blip_bayes") return Scenario::kBlipBayes;
  if (name == "blip_twice") return Scenario::kBlipTwice;
  throw ConfigError("unknown scenario '" + name +
                    "' (expected blip, blip_bayes, or blip_twice)");
}

MetricsFormat format_from(const std::string& name) {
  if (name == "csv") return MetricsFormat::kCsv;
  if (name == "json-lines" || name == "jsonl") return MetricsFormat::kJsonLines;
  throw ConfigError("unknown output format '" + name +
                    "' (expected csv or json-lines)");
}

std::string format_extension(MetricsFormat format) {
  return format == MetricsFormat::kCsv ? ".csv" : ".jsonl";
}

// Synthetic tabular environment for run-scenario / tau-sweep. env.features
// and env.levels shape the schema; env.tau1_sq / env.tau2_sq / env.nu1 /
// env.nu2 set the generating meta-prior.
EnvironmentSpec tabular_env_from(const json& doc, std::uint64_t run_seed) {
  const int features = config_get<int>(doc, "env.features", 6);
  const int levels = config_get<int>(doc, "env.levels", 8);
  if (features < 1 || levels < 1) {
    throw ConfigError("env.features and env.levels must be >= 1");
  }
  std::vector<CategoricalFeature> fs;
  for (int f = 0; f < features; ++f) {
    CategoricalFeature cf;
    cf.name = "f" + std::to_string(f);
    for (int l = 0; l < levels; ++l) cf.levels.push_back(std::to_string(l));
    fs.push_back(std::move(cf));
  }
  EnvironmentSpec spec;
  spec.schema = FeatureSchema::with_all_pairs(std::move(fs));
  spec.category_priors[kFirstOrderCategory] = {
      config_get<double>(doc, "env.nu1", 0.0),
      config_get<double>(doc, "env.tau1_sq", 0.85)};
  spec.category_priors[kSecondOrderCategory] = {
      config_get<double>(doc, "env.nu2", 0.0),
      config_get<double>(doc, "env.tau2_sq", 0.24)};
  spec.seed = derive_seed(run_seed, "env");
  return spec;
}

EnvironmentSpec layout_env_from(const json& doc, std::uint64_t run_seed) {
  std::vector<std::int32_t> variations = config_get<std::vector<std::int32_t>>(
      doc, "env.variations", {2, 3, 3, 2});
  const int widgets =
      config_get<int>(doc, "env.widgets", static_cast<int>(variations.size()));
  if (widgets != static_cast<int>(variations.size())) {
    throw ConfigError("env.widgets does not match env.variations length");
  }
  EnvironmentSpec spec;
  spec.layout = LayoutSpace{std::move(variations)};
  spec.schema = LayoutEncoder(*spec.layout).schema();
  spec.category_priors[kFirstOrderCategory] = {
      config_get<double>(doc, "env.nu1", 0.0),
      config_get<double>(doc, "env.tau1_sq", 0.6)};
  spec.category_priors[kSecondOrderCategory] = {
      config_get<double>(doc, "env.nu2", 0.0),
      config_get<double>(doc, "env.tau2_sq", 0.2)};
  spec.seed = derive_seed(run_seed, "env");
  return spec;
}

struct StreamBundle {
  DatasetStream stream;
  FeatureSchema schema;
};

// Stream from a file (with its schema) or synthesized from env.* keys.
StreamBundle stream_for_scenarios(const json& doc, const std::string& stream_path,
                                  const std::string& schema_path,
                                  std::uint64_t run_seed) {
  if (!stream_path.empty()) {
    if (schema_path.empty()) {
      throw ConfigError("--stream requires --schema");
    }
    std::ifstream in(schema_path);
    if (!in) throw IoError("cannot open schema file: " + schema_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return {read_stream(stream_path), FeatureSchema::from_json(ss.str())};
  }
  const EnvironmentSpec spec = tabular_env_from(doc, run_seed);
  const Environment env = generate_environment(spec);
  const auto rows = config_get<std::size_t>(doc, "data.rows_per_batch", 5000);
  const auto batches = config_get<std::size_t>(doc, "data.batches", 6);
  const auto test_rows = config_get<std::size_t>(doc, "data.test_rows", 5000);
  DatasetStream stream = generate_supervised_stream(
      env, rows, batches, test_rows, derive_seed(run_seed, "stream"));
  if (!stream.warning.empty()) {
    std::cerr << "warning: " << stream.warning << "\n";
  }
  return {std::move(stream), spec.schema};
}

ScenarioSpec scenario_spec_from(const json& doc, std::uint64_t run_seed) {
  ScenarioSpec spec;
  spec.scenario =
      scenario_from(config_get<std::string>(doc, "scenario", "blip_bayes"));
  spec.reset_batch = config_get<std::int64_t>(doc, "reset_batch", 1);
  spec.bootstrap = bootstrap_from(doc, run_seed);
  spec.pruning = lasso_from(doc, run_seed);
  spec.prior_override = override_from(doc);
  spec.zero_mean = config_get<bool>(doc, "zero_mean", true);
  spec.evaluate_from_first =
      config_get<bool>(doc, "evaluate_from_first", false);
  return spec;
}

json estimates_to_json(const std::vector<CategoryMetaPrior>& estimates) {
  json out = json::array();
  for (const auto& m : estimates) {
    out.push_back({{"category", m.category_id},
                   {"nu_hat", m.nu_hat},
                   {"tau_sq_hat", m.tau_sq_hat},
                   {"n_features", m.n_features},
                   {"degenerate", m.degenerate}});
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << text << "\n";
  if (!out) throw IoError("write failure: " + path);
}

// ---------------------------------------------------------------------------

int cmd_estimate_prior(const std::string& posteriors_path, bool zero_mean,
                       double min_tau_sq, const std::string& output) {
  std::ifstream in(posteriors_path);
  if (!in) throw IoError("cannot open posteriors file: " + posteriors_path);
  std::map<std::string, std::vector<WeightPosterior>> by_category;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("posteriors parse error: ") + e.what());
    }
    by_category[rec.at("category").get<std::string>()].push_back(
        {rec.at("mean").get<double>(), rec.at("variance").get<double>()});
  }
  if (by_category.empty()) {
    throw ConfigError("posteriors file has no records");
  }
  MetaPriorEstimateOptions options;
  options.zero_mean = zero_mean;
  options.min_tau_sq = min_tau_sq;
  std::vector<CategoryMetaPrior> estimates;
  for (const auto& [category, posteriors] : by_category) {
    estimates.push_back(
        estimate_category_meta_prior(category, posteriors, options));
  }
  write_text(output, estimates_to_json(estimates).dump(2));
  return 0;
}

int cmd_run_scenario(const json& doc, const std::string& stream_path,
                     const std::string& schema_path, std::uint64_t seed) {
  const StreamBundle bundle =
      stream_for_scenarios(doc, stream_path, schema_path, seed);
  const ScenarioSpec spec = scenario_spec_from(doc, seed);
  const ScenarioResult result =
      run_scenario(spec, bundle.stream, bundle.schema);

  const MetricsFormat format =
      format_from(config_get<std::string>(doc, "output.format", "csv"));
  const std::string path =
      config_get<std::string>(doc, "output.path", "scenario_metrics") +
      format_extension(format);
  export_metrics(result.metrics, path, format);
  json summary{{"metrics", path},
               {"bootstrap_epochs", result.bootstrap_epochs},
               {"tau_estimates", estimates_to_json(result.tau_estimates)},
               {"retained_features",
                result.retained.empty() ? bundle.schema.dimension()
                                        : result.retained.size()}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_tau_sweep(const json& doc, const std::string& stream_path,
                  const std::string& schema_path, std::uint64_t seed,
                  const std::vector<double>& override_values) {
  if (override_values.size() % 2 != 0) {
    throw ConfigError("--overrides needs tau1_sq,tau2_sq pairs");
  }
  std::vector<std::pair<double, double>> overrides;
  if (!override_values.empty()) {
    for (std::size_t i = 0; i < override_values.size(); i += 2) {
      overrides.emplace_back(override_values[i], override_values[i + 1]);
    }
  } else if (config_has(doc, "overrides")) {
    for (const auto& pair :
         config_get<std::vector<std::vector<double>>>(doc, "overrides", {})) {
      if (pair.size() != 2) throw ConfigError("overrides entries need 2 values");
      overrides.emplace_back(pair[0], pair[1]);
    }
  } else {
    overrides = {{5.0, 5.0}, {0.1, 0.1}, {0.01, 0.01}};
  }

  const StreamBundle bundle =
      stream_for_scenarios(doc, stream_path, schema_path, seed);
  ScenarioSpec base = scenario_spec_from(doc, seed);
  const auto sweep = run_tau_sweep(base, bundle.stream, bundle.schema,
                                   overrides);

  const MetricsFormat format =
      format_from(config_get<std::string>(doc, "output.format", "csv"));
  const std::string prefix =
      config_get<std::string>(doc, "output.path", "tau_sweep");
  json summary = json::array();
  for (const auto& [name, result] : sweep) {
    const std::string path = prefix + "_" + name + format_extension(format);
    export_metrics(result.metrics, path, format);
    summary.push_back(
        {{"series", name},
         {"metrics", path},
         {"final_log_loss", *result.metrics.rows.back().log_loss},
         {"tau_estimates", estimates_to_json(result.tau_estimates)}});
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_bandit_ab(const json& doc, std::uint64_t seed, std::size_t n_seeds,
                  std::size_t workers) {
  const EnvironmentSpec env = layout_env_from(doc, seed);

  BanditRunConfig config;
  config.horizon = config_get<std::int64_t>(doc, "bandit.T", 50000);
  config.random_phase_rounds =
      config_get<std::int64_t>(doc, "bandit.random_phase", 2000);
  config.batch_size = config_get<std::int64_t>(doc, "bandit.batch_size", 100);
  config.success_baseline =
      config_get<double>(doc, "bandit.success_baseline", 0.0);
  config.keep_regret_curve = true;
  config.keep_interaction_log =
      config_get<bool>(doc, "bandit.log_interactions", false);
  if (config_has(doc, "env.allow_list")) {
    std::vector<Layout> allowed;
    for (const auto& choices : config_get<std::vector<std::vector<std::int32_t>>>(
             doc, "env.allow_list", {})) {
      allowed.push_back(Layout{choices});
    }
    config.allow_list = std::move(allowed);
  }

  EbResetConfig eb;
  eb.prior_override = override_from(doc);
  eb.zero_mean = config_get<bool>(doc, "zero_mean", true);
  eb.min_tau_sq =
      config_get<double>(doc, "bootstrap.min_tau_sq", kDefaultMinTauSq);
  eb.bootstrap = bootstrap_from(doc, seed);

  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    seeds.push_back(derive_seed(seed, "ab_seed", s));
  }
  const BanditAbResult ab = run_bandit_ab(env, config, eb, seeds, workers);

  const MetricsFormat format =
      format_from(config_get<std::string>(doc, "output.format", "csv"));
  const std::string prefix =
      config_get<std::string>(doc, "output.path", "bandit_ab");

  json summary = json::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const std::string std_path = prefix + "_standard_seed" +
                                 std::to_string(i) + format_extension(format);
    const std::string eb_path =
        prefix + "_eb_seed" + std::to_string(i) + format_extension(format);
    export_metrics(ab.standard_runs[i].metrics, std_path, format);
    export_metrics(ab.eb_runs[i].metrics, eb_path, format);
    if (config.keep_interaction_log) {
      write_interaction_log(
          ab.standard_runs[i].interaction_log,
          prefix + "_standard_seed" + std::to_string(i) + "_interactions.jsonl");
      write_interaction_log(
          ab.eb_runs[i].interaction_log,
          prefix + "_eb_seed" + std::to_string(i) + "_interactions.jsonl");
    }
    json row{{"seed_index", i},
             {"standard", {{"metrics", std_path},
                           {"final_regret",
                            ab.standard_runs[i].final_cumulative_regret},
                           {"final_success",
                            ab.standard_runs[i].final_cumulative_success}}},
             {"eb", {{"metrics", eb_path},
                     {"final_regret", ab.eb_runs[i].final_cumulative_regret},
                     {"final_success",
                      ab.eb_runs[i].final_cumulative_success},
                     {"tau_estimates",
                      estimates_to_json(ab.eb_runs[i].eb_estimates)}}}};
    if (ab.standard_runs[i].plateau) {
      row["standard"]["plateau_round"] = *ab.standard_runs[i].plateau;
    }
    if (ab.eb_runs[i].plateau) {
      row["eb"]["plateau_round"] = *ab.eb_runs[i].plateau;
    }
    summary.push_back(std::move(row));
  }
  write_text(prefix + "_summary.json", summary.dump(2));
  std::cout << "wrote " << seeds.size() << " paired runs under prefix '"
            << prefix << "'\n";
  return 0;
}

int cmd_ingest(const std::string& input, const std::string& label_column,
               const std::string& positive_label,
               const std::string& interactions, std::size_t batches,
               const std::string& output, const std::string& schema_out) {
  CsvIngestOptions options;
  options.label_column = label_column;
  options.positive_label = positive_label;
  if (interactions == "all_pairs") {
    options.interactions = InteractionMode::kAllPairs;
  } else if (interactions == "none") {
    options.interactions = InteractionMode::kNone;
  } else {
    throw ConfigError("interaction_mode must be all_pairs or none");
  }
  options.n_batches = batches;

  const CsvIngestResult result = ingest_csv(input, options);
  write_stream(result.stream, output);
  write_text(schema_out, result.schema.to_json());
  json summary{{"rows", result.stream.total_train()},
               {"rows_dropped", result.rows_dropped},
               {"batches", result.stream.batches.size()},
               {"dimension", result.schema.dimension()},
               {"interactions", result.schema.interactions().size()},
               {"stream", output},
               {"schema", schema_out}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_regret_bound(const RegretBoundParams& params,
                     const std::vector<double>& horizons) {
  json out = json::array();
  RegretBoundParams p = params;
  const std::vector<double> ts =
      horizons.empty() ? std::vector<double>{params.horizon} : horizons;
  for (double T : ts) {
    p.horizon = T;
    const RegretBoundTerms terms = regret_bound(p);
    out.push_back({{"T", T},
                   {"p", terms.anti_concentration_p},
                   {"c", terms.concentration_c},
                   {"c_prime", terms.concentration_c_prime},
                   {"beta", terms.beta},
                   {"gamma", terms.gamma},
                   {"bound", terms.bound}});
  }
  std::cout << (out.size() == 1 ? out[0].dump(2) : out.dump(2)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical Bayes meta-priors for Bayesian probit models and "
               "Thompson-sampling layout bandits"};
  app.require_subcommand(1);

  // Shared state filled by flags; merged over the config document.
  std::string config_path;
  std::string stream_path, schema_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  json overlay = json::object();

  auto add_common = [&](CLI::App* cmd, bool needs_seed) {
    cmd->add_option("--config", config_path,
                    "JSON config document (flags override it)");
    auto* seed_opt =
        cmd->add_option_function<std::uint64_t>(
               "--seed",
               [&](std::uint64_t s) {
                 seed = s;
                 seed_set = true;
               },
               "master seed for all stochastic draws");
    if (needs_seed) seed_opt->required();
    return cmd;
  };

  // Dotted-key overlay options shared by the scenario-style commands.
  auto add_scenario_keys = [&](CLI::App* cmd) {
    auto set_str = [&overlay](const std::string& key) {
      return [&overlay, key](const std::string& v) { overlay[key] = v; };
    };
    auto set_i64 = [&overlay](const std::string& key) {
      return [&overlay, key](std::int64_t v) { overlay[key] = v; };
    };
    auto set_bool = [&overlay](const std::string& key) {
      return [&overlay, key](bool v) { overlay[key] = v; };
    };
    cmd->add_option_function<std::string>("--scenario", set_str("scenario"),
                                          "blip | blip_bayes | blip_twice");
    cmd->add_option_function<std::int64_t>("--reset_batch",
                                           set_i64("reset_batch"),
                                           "prior reset batch t");
    cmd->add_option_function<std::int64_t>(
        "--bootstrap.epoch_size",
        [&overlay](std::int64_t v) { overlay["bootstrap"]["epoch_size"] = v; },
        "examples per bootstrap epoch (0 = batch size)");
    cmd->add_option_function<std::int64_t>(
        "--bootstrap.max_epochs",
        [&overlay](std::int64_t v) { overlay["bootstrap"]["max_epochs"] = v; },
        "bootstrap viability cap");
    cmd->add_option_function<bool>(
        "--bootstrap.resample",
        [&overlay](bool v) { overlay["bootstrap"]["resample"] = v; },
        "sample epochs with replacement (false = shuffled repeats)");
    cmd->add_option_function<std::uint64_t>(
        "--bootstrap.seed",
        [&overlay](std::uint64_t v) { overlay["bootstrap"]["seed"] = v; },
        "bootstrap resampling seed");
    cmd->add_option_function<double>(
        "--bootstrap.min_tau_sq",
        [&overlay](double v) { overlay["bootstrap"]["min_tau_sq"] = v; },
        "viability threshold for tau^2 estimates");
    cmd->add_option_function<std::vector<double>>(
        "--lasso.lambda_grid",
        [&overlay](const std::vector<double>& v) {
          overlay["lasso"]["lambda_grid"] = v;
        },
        "shrinkage grid; enables pruning");
    cmd->add_option_function<int>(
        "--lasso.cv_folds",
        [&overlay](int v) { overlay["lasso"]["cv_folds"] = v; },
        "cross-validation folds");
    cmd->add_option_function<double>(
        "--lasso.gamma",
        [&overlay](double v) { overlay["lasso"]["gamma"] = v; },
        "adaptive exponent");
    cmd->add_option_function<double>(
        "--lasso.ridge_penalty",
        [&overlay](double v) { overlay["lasso"]["ridge_penalty"] = v; },
        "initial-estimator ridge penalty");
    cmd->add_option_function<std::vector<std::string>>(
        "--protect",
        [&overlay](const std::vector<std::string>& v) {
          overlay["protect"] = v;
        },
        "categories always retained by pruning");
    cmd->add_option_function<double>(
        "--prior_override.tau1_sq",
        [&overlay](double v) { overlay["prior_override"]["tau1_sq"] = v; },
        "inject tau1^2 instead of estimating");
    cmd->add_option_function<double>(
        "--prior_override.tau2_sq",
        [&overlay](double v) { overlay["prior_override"]["tau2_sq"] = v; },
        "inject tau2^2 instead of estimating");
    cmd->add_option_function<double>(
        "--env.tau1_sq",
        [&overlay](double v) { overlay["env"]["tau1_sq"] = v; },
        "true first-order meta-variance");
    cmd->add_option_function<double>(
        "--env.tau2_sq",
        [&overlay](double v) { overlay["env"]["tau2_sq"] = v; },
        "true second-order meta-variance");
    cmd->add_option_function<double>(
        "--env.nu1", [&overlay](double v) { overlay["env"]["nu1"] = v; },
        "true first-order meta-mean");
    cmd->add_option_function<double>(
        "--env.nu2", [&overlay](double v) { overlay["env"]["nu2"] = v; },
        "true second-order meta-mean");
    cmd->add_option_function<std::string>(
        "--output.path",
        [&overlay](const std::string& v) { overlay["output"]["path"] = v; },
        "output path or prefix");
    cmd->add_option_function<std::string>(
        "--output.format",
        [&overlay](const std::string& v) { overlay["output"]["format"] = v; },
        "csv | json-lines");
    cmd->add_option_function<bool>("--zero_mean", set_bool("zero_mean"),
                                   "estimate with nu fixed to 0");
    cmd->add_option_function<bool>("--evaluate_from_first",
                                   set_bool("evaluate_from_first"),
                                   "also evaluate batches before the reset");
    cmd->add_option_function<std::int64_t>(
        "--data.batches",
        [&overlay](std::int64_t v) { overlay["data"]["batches"] = v; },
        "synthetic batches");
    cmd->add_option_function<std::int64_t>(
        "--data.rows_per_batch",
        [&overlay](std::int64_t v) { overlay["data"]["rows_per_batch"] = v; },
        "rows per synthetic batch");
    cmd->add_option_function<std::int64_t>(
        "--data.test_rows",
        [&overlay](std::int64_t v) { overlay["data"]["test_rows"] = v; },
        "synthetic holdout rows");
    cmd->add_option_function<int>(
        "--env.features",
        [&overlay](int v) { overlay["env"]["features"] = v; },
        "synthetic categorical features");
    cmd->add_option_function<int>(
        "--env.levels",
        [&overlay](int v) { overlay["env"]["levels"] = v; },
        "levels per synthetic feature");
  };

  // estimate-prior ----------------------------------------------------------
  auto* estimate = app.add_subcommand(
      "estimate-prior", "estimate per-category meta-priors from posteriors");
  std::string posteriors_path, estimate_output;
  bool est_zero_mean = true;
  double est_min_tau_sq = kDefaultMinTauSq;
  estimate->add_option("--posteriors", posteriors_path,
                       "JSON-lines posteriors: {category, mean, variance}")
      ->required();
  estimate->add_option("--output", estimate_output, "output path (default stdout)");
  estimate->add_flag("--zero-mean,!--no-zero-mean", est_zero_mean,
                     "nu fixed to 0 (default on)");
  estimate->add_option("--min-tau-sq", est_min_tau_sq,
                       "degenerate-flag threshold");

  // run-scenario ------------------------------------------------------------
  auto* scenario_cmd = app.add_subcommand(
      "run-scenario", "run blip / blip_bayes / blip_twice over a stream");
  add_common(scenario_cmd, /*needs_seed=*/true);
  scenario_cmd->add_option("--stream", stream_path,
                           "serialized stream (else env.* synthesizes one)");
  scenario_cmd->add_option("--schema", schema_path,
                           "schema JSON matching --stream");
  add_scenario_keys(scenario_cmd);

  // tau-sweep ---------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand(
      "tau-sweep", "blip_bayes with tau^2 overrides plus blip and optimal");
  add_common(sweep_cmd, /*needs_seed=*/true);
  sweep_cmd->add_option("--stream", stream_path, "serialized stream");
  sweep_cmd->add_option("--schema", schema_path, "schema JSON");
  add_scenario_keys(sweep_cmd);
  std::vector<double> sweep_overrides;
  sweep_cmd->add_option("--overrides", sweep_overrides,
                        "flat tau1_sq,tau2_sq pairs, e.g. 5 5 0.1 0.1");

  // bandit-ab ---------------------------------------------------------------
  auto* bandit_cmd = app.add_subcommand(
      "bandit-ab", "paired standard-vs-EB Thompson sampling simulation");
  add_common(bandit_cmd, /*needs_seed=*/true);
  add_scenario_keys(bandit_cmd);
  std::size_t n_seeds = 20;
  std::size_t workers = 0;
  bandit_cmd->add_option("--seeds", n_seeds, "number of paired seeds");
  bandit_cmd->add_option("--workers", workers,
                         "worker-pool width (0 = hardware)");
  bandit_cmd->add_option_function<std::int64_t>(
      "--bandit.T",
      [&overlay](std::int64_t v) { overlay["bandit"]["T"] = v; }, "horizon");
  bandit_cmd->add_option_function<std::int64_t>(
      "--bandit.random_phase",
      [&overlay](std::int64_t v) { overlay["bandit"]["random_phase"] = v; },
      "uniform-exploration rounds");
  bandit_cmd->add_option_function<std::int64_t>(
      "--bandit.batch_size",
      [&overlay](std::int64_t v) { overlay["bandit"]["batch_size"] = v; },
      "posterior update cadence");
  bandit_cmd->add_option_function<std::vector<std::int32_t>>(
      "--env.variations",
      [&overlay](const std::vector<std::int32_t>& v) {
        overlay["env"]["variations"] = v;
      },
      "per-widget variation counts");
  bandit_cmd->add_option_function<int>(
      "--env.widgets",
      [&overlay](int v) { overlay["env"]["widgets"] = v; }, "widget count D");

  // ingest ------------------------------------------------------------------
  auto* ingest_cmd =
      app.add_subcommand("ingest", "encode a categorical CSV into a stream");
  std::string ingest_input, label_column, positive_label;
  std::string interactions = "all_pairs";
  std::size_t ingest_batches = 1;
  std::string ingest_output = "stream.jsonl";
  std::string schema_out = "schema.json";
  ingest_cmd->add_option("--input", ingest_input, "CSV path")->required();
  ingest_cmd->add_option("--label-column", label_column, "label column name")
      ->required();
  ingest_cmd->add_option("--positive-label", positive_label,
                         "value mapped to +1")
      ->required();
  ingest_cmd->add_option("--interactions", interactions,
                         "all_pairs | none");
  ingest_cmd->add_option("--batches", ingest_batches,
                         "equal train batches to split into");
  ingest_cmd->add_option("--output", ingest_output, "stream output path");
  ingest_cmd->add_option("--schema-out", schema_out, "schema output path");

  // regret-bound ------------------------------------------------------------
  auto* bound_cmd = app.add_subcommand(
      "regret-bound", "evaluate the TS probit regret upper bound");
  RegretBoundParams bound_params;
  double c_phi_flag = 0.0;
  std::vector<double> horizons;
  bound_cmd->add_option("--d", bound_params.d, "feature dimension")->required();
  bound_cmd->add_option("--T", bound_params.horizon, "horizon")->required();
  bound_cmd->add_option("--S", bound_params.weight_norm_bound,
                        "bound on ||mu*||");
  bound_cmd->add_option("--R", bound_params.subgaussian,
                        "subgaussian constant (1/2 for binary rewards)");
  bound_cmd->add_option("--lambda", bound_params.lambda, "regularization");
  bound_cmd->add_option("--delta", bound_params.delta, "failure probability");
  bound_cmd->add_option("--k_phi", bound_params.k_phi, "Lipschitz constant");
  auto* c_phi_opt =
      bound_cmd->add_option("--c_phi", c_phi_flag,
                            "inf of Phi' (default: pdf at S)");
  bound_cmd->add_option("--tau_min", bound_params.tau_min, "min tau over categories");
  bound_cmd->add_option("--tau_max", bound_params.tau_max, "max tau over categories");
  bound_cmd->add_option("--sweep-T", horizons,
                        "evaluate at several horizons");

  CLI11_PARSE(app, argc, argv);

  try {
    json doc = load_config_file(config_path);
    // Flags override the document.
    if (!overlay.empty()) {
      doc.merge_patch(overlay);
    }
    if (!seed_set && config_has(doc, "seed")) {
      seed = config_get<std::uint64_t>(doc, "seed", 0);
    }

    if (estimate->parsed()) {
      return cmd_estimate_prior(posteriors_path, est_zero_mean,
                                est_min_tau_sq, estimate_output);
    }
    if (scenario_cmd->parsed()) {
      return cmd_run_scenario(doc, stream_path, schema_path, seed);
    }
    if (sweep_cmd->parsed()) {
      return cmd_tau_sweep(doc, stream_path, schema_path, seed,
                           sweep_overrides);
    }
    if (bandit_cmd->parsed()) {
      return cmd_bandit_ab(doc, seed, n_seeds, workers);
    }
    if (ingest_cmd->parsed()) {
      return cmd_ingest(ingest_input, label_column, positive_label,
                        interactions, ingest_batches, ingest_output,
                        schema_out);
    }
    if (bound_cmd->parsed()) {
      if (c_phi_opt->count() > 0) bound_params.c_phi = c_phi_flag;
      return cmd_regret_bound(bound_params, horizons);
    }
    return 3;
  } catch (const DegeneratePriorError& e) {
    std::cerr << "degenerate prior: " << e.what() << "\n";
    std::cerr << estimates_to_json(e.last_estimates).dump(2) << "\n";
    return 2;
  } catch (const InsufficientTrafficError& e) {
    std::cerr << "degenerate prior: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
