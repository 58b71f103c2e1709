/*
   Copyright 2026 The ldalfm Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ldalfm/cli.hpp"

namespace ldalfm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

ExperimentResult result_row(const PreparedData& data, const Checkpoint& ck, double mse_val,
                            double mse_test, double seconds) {
  ExperimentResult row;
  row.dataset = data.dataset;
  row.model = ck.model;
  row.config = ck.config;
  row.mse_val = mse_val;
  row.mse_test = mse_test;
  row.wall_time_s = seconds;
  return row;
}

double elapsed(std::chrono::steady_clock::time_point start, bool timing) {
  if (!timing) return 0.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double validation_score(const Checkpoint& ck, const PreparedData& data, bool clip) {
  return data.validation.empty() ? std::nan("") : score(ck, data.validation, clip);
}

void check_compatible(const Checkpoint& ck, const PreparedData& data) {
  const bool same = ck.n_users == data.split.n_users() && ck.n_items == data.split.n_items() &&
                    ck.vocab_size == data.corpus.vocab_size() &&
                    ck.vocab_fingerprint == data.corpus.vocabulary.fingerprint();
  if (same) return;
  const int K = ck.params ? ck.params->topics() : ck.config.K;
  const int K_star = ck.params ? ck.params->extra() : 0;
  throw std::runtime_error(fmt::format(
      "checkpoint does not match the prepared data\n"
      "  checkpoint: K={} K*={} V={} vocabulary={:016x} users={} items={}\n"
      "  data:       V={} vocabulary={:016x} users={} items={}",
      K, K_star, ck.vocab_size, ck.vocab_fingerprint, ck.n_users, ck.n_items,
      data.corpus.vocab_size(), data.corpus.vocabulary.fingerprint(), data.split.n_users(),
      data.split.n_items()));
}

std::vector<std::string> results_files(const std::string& input) {
  if (!fs::exists(input)) throw std::runtime_error("results path not found: " + input);
  if (!fs::is_directory(input)) return {input};
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(input)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("results", 0) == 0 && entry.path().extension() == ".csv") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no results*.csv files in " + input);
  return files;
}

}  // namespace

int cmd_prepare(const std::string& input, const std::string& out_dir, const Settings& settings) {
  if (!fs::is_regular_file(input)) throw std::runtime_error("input file not found: " + input);
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open input file " + input);
  const std::string dataset = fs::path(input).stem().string();
  const PreparedData data = prepare_dataset(in, dataset, settings.prepare);
  fs::create_directories(out_dir);
  save_prepared(data, out_dir);
  write_manifest({"prepare", input, dataset, settings}, out_dir);
  std::cout << fmt::format("{}: {} users, {} items, {} train / {} validation / {} test, V = {}\n",
                           dataset, data.split.n_users(), data.split.n_items(), data.train.size(),
                           data.validation.size(), data.test.size(), data.corpus.vocab_size());
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir, const Settings& settings) {
  const PreparedData data = load_prepared(data_dir);
  const auto start = std::chrono::steady_clock::now();
  const TrainedModel model = train_model(settings.model, settings.config, data);
  const double seconds = elapsed(start, settings.timing);

  fs::create_directories(out_dir);
  save_checkpoint(model.checkpoint, join_path(out_dir, "checkpoint.json"));
  write_trace_csv(model.trace, join_path(out_dir, "trace.csv"));
  if (model.phi) write_topic_dump(*model.phi, data.corpus.vocabulary, join_path(out_dir, "topics.csv"));

  const double mse_val = validation_score(model.checkpoint, data, settings.clip);
  const std::vector<ExperimentResult> row{
      result_row(data, model.checkpoint, mse_val, std::nan(""), seconds)};
  write_results_csv(row, join_path(out_dir, "train.csv"));
  write_manifest({"train", data_dir, data.dataset, settings}, out_dir);
  std::cout << fmt::format("{} on {}: validation MSE {:.6f}\n", to_string(settings.model),
                           data.dataset, mse_val);
  return 0;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& data_dir,
                 const std::string& out_dir, const Settings& settings, bool json_output) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const PreparedData data = load_prepared(data_dir);
  check_compatible(ck, data);

  const auto start = std::chrono::steady_clock::now();
  const double mse_val = validation_score(ck, data, settings.clip);
  const double mse_test = score(ck, data.test, settings.clip);
  const std::vector<ExperimentResult> rows{
      result_row(data, ck, mse_val, mse_test, elapsed(start, settings.timing))};

  if (json_output) {
    const auto& r = rows.front();
    auto number = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    std::cout << json{{"dataset", r.dataset},
                      {"model", to_string(r.model)},
                      {"K", r.config.K},
                      {"K_star", r.config.K_star},
                      {"lambda", r.config.lambda},
                      {"mu", r.config.mu},
                      {"seed", r.config.seed},
                      {"mse_val", number(r.mse_val)},
                      {"mse_test", number(r.mse_test)},
                      {"wall_time_s", r.wall_time_s}}
                     .dump()
              << '\n';
  } else {
    std::cout << fmt::format("{} on {}: test MSE {:.6f} ({} ratings)\n", to_string(ck.model),
                             data.dataset, mse_test, data.test.size());
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_results_csv(rows, join_path(out_dir, "results.csv"));
    write_results_json(rows, join_path(out_dir, "results.json"));
    write_manifest({"evaluate", checkpoint_path, data.dataset, settings}, out_dir);
  }
  return 0;
}

int cmd_gridsearch(const std::string& data_dir, const std::string& out_dir,
                   const Settings& settings) {
  if (settings.model == ModelKind::offset || settings.model == ModelKind::baseline) {
    throw std::invalid_argument(to_string(settings.model) + " has no hyperparameters to search");
  }
  const PreparedData data = load_prepared(data_dir);
  GridSpec grid = settings.grid;
  if (settings.model != ModelKind::lda_lfm) grid.mus = {0.0};

  auto fit = [&](const HybridConfig& cfg) {
    const TrainedModel m = train_model(settings.model, cfg, data);
    return CellScore{score(m.checkpoint, data.validation, settings.clip),
                     score(m.checkpoint, data.test, settings.clip)};
  };
  const GridOutcome outcome = grid_search(grid, fit, settings.config, settings.threads);

  std::vector<ExperimentResult> rows;
  for (const auto& cell : outcome.cells) {
    ExperimentResult row;
    row.dataset = data.dataset;
    row.model = settings.model;
    row.config = cell.config;
    if (settings.model == ModelKind::ldafirst) row.config.K_star = 0;
    row.mse_val = cell.ok() ? cell.mse_val : std::nan("");
    row.mse_test = cell.ok() ? cell.mse_test : std::nan("");
    row.wall_time_s = settings.timing ? cell.wall_time_s : 0.0;
    row.error = cell.error;
    if (!cell.ok()) spdlog::warn("lambda={} mu={}: {}", cell.config.lambda, cell.config.mu, cell.error);
    rows.push_back(std::move(row));
  }

  fs::create_directories(out_dir);
  write_results_csv(rows, join_path(out_dir, "grid.csv"));
  write_results_json(rows, join_path(out_dir, "grid.json"));
  const TrainedModel best = train_model(settings.model, outcome.best, data);
  save_checkpoint(best.checkpoint, join_path(out_dir, "checkpoint.json"));
  const std::vector<ExperimentResult> winner{rows[outcome.best_index]};
  write_results_csv(winner, join_path(out_dir, "results.csv"));
  write_manifest({"gridsearch", data_dir, data.dataset, settings}, out_dir);

  std::cout << fmt::format("{} on {}: best lambda={} mu={} validation MSE {:.6f} test MSE {:.6f}\n",
                           to_string(settings.model), data.dataset, outcome.best.lambda,
                           outcome.best.mu, winner.front().mse_val, winner.front().mse_test);
  return 0;
}

int cmd_experiment(const std::string& data_dir, const std::string& out_dir,
                   const Settings& settings) {
  const PreparedData data = load_prepared(data_dir);
  ExperimentOptions options;
  options.config = settings.config;
  options.grid = settings.grid;
  options.prepare = settings.prepare;
  options.clip = settings.clip;
  options.record_timing = settings.timing;
  options.threads = settings.threads;

  std::vector<TrainedModel> winners;
  auto results = evaluate_models(data, options, &winners);
  for (int k_star : settings.k_star_sweep) {
    if (k_star == settings.config.K_star) continue;
    ExperimentOptions sweep = options;
    sweep.models = {ModelKind::lda_lfm};
    sweep.config.K_star = k_star;
    for (auto& row : evaluate_models(data, sweep)) results.push_back(std::move(row));
  }

  fs::create_directories(join_path(out_dir, "checkpoints"));
  write_results_csv(results, join_path(out_dir, "results.csv"));
  write_results_json(results, join_path(out_dir, "results.json"));
  for (const auto& model : winners) {
    save_checkpoint(model.checkpoint,
                    join_path(join_path(out_dir, "checkpoints"), to_string(model.checkpoint.model) + ".json"));
  }
  if (!settings.k_star_sweep.empty()) write_kstar_curve(results, join_path(out_dir, "kstar.dat"));
  const std::string table = render_comparison_table(results);
  std::ofstream(join_path(out_dir, "comparison.csv"), std::ios::binary) << table;
  write_manifest({"experiment", data_dir, data.dataset, settings}, out_dir);
  std::cout << table;

  bool failed = false;
  for (const auto& r : results) failed = failed || !r.error.empty();
  return failed ? 1 : 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
  if (inputs.empty()) throw std::invalid_argument("report: no results given");
  std::vector<std::vector<ExperimentResult>> tables;
  for (const auto& input : inputs) {
    for (const auto& file : results_files(input)) tables.push_back(read_results_csv(file));
  }
  const auto merged = merge_results(std::move(tables));
  if (merged.empty()) throw std::runtime_error("report: the results files contain no rows");
  const std::string table = render_comparison_table(merged);
  std::cout << table;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_results_csv(merged, join_path(out_dir, "results.csv"));
    std::ofstream(join_path(out_dir, "comparison.csv"), std::ios::binary) << table;
    write_kstar_curve(merged, join_path(out_dir, "kstar.dat"));
  }
  return 0;
}

namespace {

struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> options;
  std::string config_path;
  bool clip = false;
  bool no_timing = false;
  CLI::Option* clip_flag = nullptr;
  CLI::Option* no_timing_flag = nullptr;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    options.emplace_back(app->add_option(flag, values[key], help), key);
  }

  void add_model_flags(CLI::App* app) {
    add(app, "--model", "model", "offset, baseline, lfm, ldafirst or lda_lfm");
    add(app, "--K", "K", "number of topics");
    add(app, "--K-star", "K_star", "extra latent features outside the topic model");
    add(app, "--lambda", "lambda", "L2 regularization weight");
    add(app, "--mu", "mu", "topic likelihood weight");
    add(app, "--iters", "n_iter", "outer iterations");
    add(app, "--lr", "lr", "Adam learning rate");
    add(app, "--gibbs-sweeps", "gibbs_sweeps", "collapsed Gibbs sweeps for ldafirst");
    add(app, "--divergence-limit", "divergence_limit", "abort when the objective exceeds this");
    add(app, "--threads", "threads", "grid cells fitted in parallel");
    clip_flag = app->add_flag("--clip", clip, "clip predictions to [1, 5] before scoring");
    no_timing_flag = app->add_flag("--no-timing", no_timing, "write 0 for wall_time_s");
  }

  void add_common(CLI::App* app) {
    add(app, "--seed", "seed", "top-level random seed");
    app->add_option("--config", config_path, "key = value file or manifest.json");
  }

  Settings resolve() const {
    SettingMap layered;
    if (!config_path.empty()) layered = read_config_file(config_path);
    for (const auto& [opt, key] : options) {
      if (opt->count() > 0) layered[key] = values.at(key);
    }
    if (clip_flag && clip_flag->count() > 0) layered["clip"] = "true";
    if (no_timing_flag && no_timing_flag->count() > 0) layered["timing"] = "false";
    return Settings::resolve(layered);
  }
};

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("ldalfm");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("LDALFM_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

}  // namespace

int run(int argc, char** argv) {
  if (!spdlog::get("ldalfm")) configure_logging();

  CLI::App app{"LDA-LFM rating prediction: data preparation, training and evaluation"};
  app.set_version_flag("--version", std::string(LDALFM_VERSION));
  app.require_subcommand(1);

  std::string input, data_dir, out_dir, checkpoint;
  std::vector<std::string> results;
  bool json_output = false;

  auto* prepare = app.add_subcommand("prepare", "parse, filter, split and build the text corpus");
  Overrides prepare_flags;
  prepare->add_option("input", input, "reviews JSONL file")->required();
  prepare->add_option("--out", out_dir, "output directory")->required();
  prepare_flags.add_common(prepare);
  prepare_flags.add(prepare, "--k-core", "k_core", "minimum interactions per user and item");
  prepare_flags.add(prepare, "--vocab-size", "vocab_size", "vocabulary size");

  auto* train = app.add_subcommand("train", "fit one model on prepared data");
  Overrides train_flags;
  train->add_option("data", data_dir, "prepared data directory")->required();
  train->add_option("--out", out_dir, "output directory")->required();
  train_flags.add_common(train);
  train_flags.add_model_flags(train);

  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on the test split");
  Overrides evaluate_flags;
  evaluate->add_option("checkpoint", checkpoint, "checkpoint.json")->required();
  evaluate->add_option("data", data_dir, "prepared data directory")->required();
  evaluate->add_option("--out", out_dir, "optional output directory");
  evaluate->add_flag("--json", json_output, "print a JSON report");
  evaluate_flags.add_common(evaluate);
  evaluate_flags.add_model_flags(evaluate);

  auto* grid = app.add_subcommand("gridsearch", "search lambda (and mu for lda_lfm) on validation MSE");
  Overrides grid_flags;
  grid->add_option("data", data_dir, "prepared data directory")->required();
  grid->add_option("--out", out_dir, "output directory")->required();
  grid_flags.add_common(grid);
  grid_flags.add_model_flags(grid);
  grid_flags.add(grid, "--lambda-grid", "lambda_grid", "comma-separated lambda values");
  grid_flags.add(grid, "--mu-grid", "mu_grid", "comma-separated mu values");

  auto* experiment = app.add_subcommand("experiment", "grid-search and score every model");
  Overrides experiment_flags;
  experiment->add_option("data", data_dir, "prepared data directory")->required();
  experiment->add_option("--out", out_dir, "output directory")->required();
  experiment_flags.add_common(experiment);
  experiment_flags.add_model_flags(experiment);
  experiment_flags.add(experiment, "--lambda-grid", "lambda_grid", "comma-separated lambda values");
  experiment_flags.add(experiment, "--mu-grid", "mu_grid", "comma-separated mu values");
  experiment_flags.add(experiment, "--K-star-sweep", "K_star_sweep", "extra lda_lfm runs, one per K*");

  auto* report = app.add_subcommand("report", "merge results files into a comparison table");
  report->add_option("results", results, "results CSV files or directories")->required();
  report->add_option("--out", out_dir, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (prepare->parsed()) return cmd_prepare(input, out_dir, prepare_flags.resolve());
    if (train->parsed()) return cmd_train(data_dir, out_dir, train_flags.resolve());
    if (evaluate->parsed()) {
      return cmd_evaluate(checkpoint, data_dir, out_dir, evaluate_flags.resolve(), json_output);
    }
    if (grid->parsed()) return cmd_gridsearch(data_dir, out_dir, grid_flags.resolve());
    if (experiment->parsed()) return cmd_experiment(data_dir, out_dir, experiment_flags.resolve());
    if (report->parsed()) return cmd_report(results, out_dir);
  } catch (const DivergenceError& e) {
    spdlog::error("training diverged at iteration {}: {}", e.iteration(), e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}

}  // namespace ldalfm::cli
