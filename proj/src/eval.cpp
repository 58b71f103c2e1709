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

#include "ldalfm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "ldalfm/rng.hpp"

namespace ldalfm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> truths(std::span<const Rating> ratings) {
  std::vector<double> out;
  out.reserve(ratings.size());
  for (const auto& r : ratings) out.push_back(r.value);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

}  // namespace

// ---------------------------------------------------------------------------
// Data preparation

TrainingData PreparedData::training() const {
  return {split.n_users(), split.n_items(), train, validation};
}

namespace {

void fill_ratings(PreparedData& data) {
  data.train = data.split.ratings(data.split.train);
  data.validation = data.split.ratings(data.split.validation);
  data.test = data.split.ratings(data.split.test);
}

}  // namespace

PreparedData prepare_dataset(std::istream& reviews, const std::string& dataset,
                             const PrepareOptions& options) {
  auto report = parse_reviews(reviews);
  for (const auto& err : report.errors) {
    spdlog::warn("{}: line {}: {}", dataset, err.line, err.message);
  }
  auto interactions = k_core_filter(deduplicate(report.interactions), options.k_core);
  if (interactions.size() < 10) {
    throw std::runtime_error(fmt::format("{}: only {} interactions survive {}-core filtering", dataset,
                                         interactions.size(), options.k_core));
  }
  PreparedData data;
  data.dataset = dataset;
  data.parse_errors = std::move(report.errors);
  data.split = split_dataset(interactions, derive_seed(options.seed, "split"));
  data.corpus = build_corpus(data.split, options.vocab_size, TextPipeline());
  fill_ratings(data);
  spdlog::info("{}: {} users, {} items, train/val/test = {}/{}/{}, V = {}", dataset,
               data.split.n_users(), data.split.n_items(), data.train.size(), data.validation.size(),
               data.test.size(), data.corpus.vocab_size());
  return data;
}

void save_prepared(const PreparedData& data, const std::string& dir) {
  save_split(data.split, dir);
  save_corpus(data.corpus, dir);
  if (!data.parse_errors.empty()) {
    std::ofstream out(fs::path(dir) / "parse_errors.jsonl", std::ios::binary);
    for (const auto& e : data.parse_errors) {
      out << json{{"line", e.line}, {"message", e.message}}.dump() << '\n';
    }
  }
}

PreparedData load_prepared(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("prepared directory not found: " + dir);
  PreparedData data;
  data.split = load_split(dir);
  data.corpus = load_corpus(dir);
  if (static_cast<int>(data.corpus.documents.size()) != data.split.n_items()) {
    throw std::runtime_error(fmt::format("{}: {} documents for {} items", dir,
                                         data.corpus.documents.size(), data.split.n_items()));
  }
  data.dataset = fs::path(dir).lexically_normal().filename().string();
  if (data.dataset.empty()) data.dataset = fs::path(dir).lexically_normal().parent_path().filename().string();
  if (std::ifstream manifest(fs::path(dir) / "manifest.json"); manifest) {
    const json m = json::parse(manifest);
    if (m.contains("dataset")) data.dataset = m.at("dataset").get<std::string>();
  }
  fill_ratings(data);
  return data;
}

// ---------------------------------------------------------------------------
// Model fitting

TrainedModel train_model(ModelKind kind, const HybridConfig& config, const PreparedData& data) {
  config.validate();
  TrainedModel out;
  Checkpoint& ck = out.checkpoint;
  ck.model = kind;
  ck.config = config;
  ck.n_users = data.split.n_users();
  ck.n_items = data.split.n_items();
  ck.vocab_size = data.corpus.vocab_size();
  ck.vocab_fingerprint = data.corpus.vocabulary.fingerprint();
  const TrainingData training = data.training();

  switch (kind) {
    case ModelKind::offset:
    case ModelKind::baseline:
      ck.stats = compute_rating_stats(data.train, ck.n_users, ck.n_items);
      break;
    case ModelKind::lfm: {
      auto fit = fit_lfm(config, training);
      ck.params = std::move(fit.params);
      out.trace = std::move(fit.trace);
      break;
    }
    case ModelKind::ldafirst: {
      auto fit = fit_ldafirst(config, training, data.corpus);
      ck.config.K_star = 0;
      out.phi = fit.lda.dists.phi;
      ck.params = std::move(fit.params);
      out.trace = std::move(fit.trace);
      break;
    }
    case ModelKind::lda_lfm: {
      auto fit = fit_lda_lfm(config, training, data.corpus);
      out.phi = phi_from_psi(fit.params.psi);
      ck.params = std::move(fit.params);
      ck.topics = std::move(fit.topics);
      out.trace = std::move(fit.trace);
      break;
    }
  }
  return out;
}

double score(const Checkpoint& checkpoint, std::span<const Rating> ratings, bool clip) {
  return mse(checkpoint.predict(ratings, clip), truths(ratings));
}

// ---------------------------------------------------------------------------
// Grid search

void GridSpec::validate() const {
  if (lambdas.empty() || mus.empty()) throw std::invalid_argument("grid: lambda and mu lists must be non-empty");
  for (double x : lambdas) {
    if (!(x >= 0.0)) throw std::invalid_argument("grid: lambda values must be >= 0");
  }
  for (double x : mus) {
    if (!(x >= 0.0)) throw std::invalid_argument("grid: mu values must be >= 0");
  }
}

GridOutcome grid_search(const GridSpec& grid, const CellFit& fit, const HybridConfig& base,
                        int threads) {
  grid.validate();
  GridOutcome outcome;
  for (double lambda : grid.lambdas) {
    for (double mu : grid.mus) {
      GridCell cell;
      cell.config = base;
      cell.config.lambda = lambda;
      cell.config.mu = mu;
      outcome.cells.push_back(cell);
    }
  }

  auto run_cell = [&](GridCell& cell) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const CellScore s = fit(cell.config);
      if (!std::isfinite(s.mse_val) || !std::isfinite(s.mse_test)) {
        throw std::runtime_error("non-finite MSE");
      }
      cell.mse_val = s.mse_val;
      cell.mse_test = s.mse_test;
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell.mse_val = cell.mse_test = kNaN;
    }
    cell.wall_time_s = seconds_since(start);
  };

  const int workers = std::clamp(threads, 1, static_cast<int>(outcome.cells.size()));
  if (workers == 1) {
    for (auto& cell : outcome.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t n; (n = next++) < outcome.cells.size();) run_cell(outcome.cells[n]);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::optional<std::size_t> best;
  auto key = [&](std::size_t n) {
    const auto& c = outcome.cells[n];
    return std::make_tuple(c.mse_val, c.config.lambda, c.config.mu);
  };
  for (std::size_t n = 0; n < outcome.cells.size(); ++n) {
    if (!outcome.cells[n].ok()) continue;
    if (!best || key(n) < key(*best)) best = n;
  }
  if (!best) {
    std::string what = "grid search: every configuration failed";
    for (const auto& c : outcome.cells) {
      what += fmt::format("\n  lambda={} mu={}: {}", c.config.lambda, c.config.mu, c.error);
    }
    throw GridSearchError(what, outcome.cells);
  }
  outcome.best_index = *best;
  outcome.best = outcome.cells[*best].config;
  return outcome;
}

// ---------------------------------------------------------------------------
// Experiments

std::vector<ExperimentResult> evaluate_models(const PreparedData& data,
                                              const ExperimentOptions& options,
                                              std::vector<TrainedModel>* winners) {
  std::vector<ExperimentResult> results;
  for (ModelKind kind : options.models) {
    ExperimentResult row;
    row.dataset = data.dataset;
    row.model = kind;
    row.config = options.config;
    const auto start = std::chrono::steady_clock::now();
    try {
      TrainedModel model;
      if (kind == ModelKind::offset || kind == ModelKind::baseline) {
        model = train_model(kind, options.config, data);
      } else {
        GridSpec grid = options.grid;
        if (kind != ModelKind::lda_lfm) grid.mus = {0.0};
        auto fit = [&](const HybridConfig& cfg) {
          const TrainedModel m = train_model(kind, cfg, data);
          return CellScore{score(m.checkpoint, data.validation, options.clip),
                           score(m.checkpoint, data.test, options.clip)};
        };
        const GridOutcome outcome = grid_search(grid, fit, options.config, options.threads);
        row.config = outcome.best;
        model = train_model(kind, outcome.best, data);
      }
      row.config = model.checkpoint.config;
      row.mse_val = data.validation.empty() ? kNaN : score(model.checkpoint, data.validation, options.clip);
      row.mse_test = score(model.checkpoint, data.test, options.clip);
      if (winners) winners->push_back(std::move(model));
    } catch (const std::exception& e) {
      spdlog::error("{} / {}: {}", data.dataset, to_string(kind), e.what());
      row.error = e.what();
      row.mse_val = row.mse_test = kNaN;
    }
    row.wall_time_s = options.record_timing ? seconds_since(start) : 0.0;
    spdlog::info("{} / {}: val MSE {:.6f}, test MSE {:.6f}", data.dataset, to_string(kind),
                 row.mse_val, row.mse_test);
    results.push_back(std::move(row));
  }
  return results;
}

std::vector<ExperimentResult> run_experiment(const std::string& dataset_path,
                                             const ExperimentOptions& options,
                                             const std::string& output_dir) {
  std::ifstream in(dataset_path);
  if (!in) throw std::runtime_error("cannot open dataset " + dataset_path);
  const PreparedData data = prepare_dataset(in, fs::path(dataset_path).stem().string(), options.prepare);

  std::vector<TrainedModel> winners;
  auto results = evaluate_models(data, options, &winners);

  fs::create_directories(fs::path(output_dir) / "checkpoints");
  write_results_csv(results, (fs::path(output_dir) / "results.csv").string());
  write_results_json(results, (fs::path(output_dir) / "results.json").string());
  for (const auto& model : winners) {
    save_checkpoint(model.checkpoint,
                    (fs::path(output_dir) / "checkpoints" / (to_string(model.checkpoint.model) + ".json")).string());
  }
  return results;
}

// ---------------------------------------------------------------------------
// Results tables

void write_results_csv(std::span<const ExperimentResult> results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "dataset,model,K,K_star,lambda,mu,seed,mse_val,mse_test,wall_time_s\n";
  for (const auto& r : results) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.dataset, to_string(r.model), r.config.K,
                       r.config.K_star, format_double(r.config.lambda), format_double(r.config.mu),
                       r.config.seed, format_double(r.mse_val), format_double(r.mse_test),
                       format_double(r.wall_time_s));
  }
}

std::vector<ExperimentResult> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("dataset,model,", 0) != 0) {
    throw std::runtime_error(path + ": missing results header");
  }
  std::vector<ExperimentResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 10) throw std::runtime_error(fmt::format("{}:{}: expected 10 fields", path, line_no));
    ExperimentResult r;
    r.dataset = f[0];
    r.model = parse_model_kind(f[1]);
    r.config.K = std::stoi(f[2]);
    r.config.K_star = std::stoi(f[3]);
    r.config.lambda = std::stod(f[4]);
    r.config.mu = std::stod(f[5]);
    r.config.seed = std::stoull(f[6]);
    r.mse_val = std::stod(f[7]);
    r.mse_test = std::stod(f[8]);
    r.wall_time_s = std::stod(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_results_json(std::span<const ExperimentResult> results, const std::string& path) {
  json rows = json::array();
  auto number = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  for (const auto& r : results) {
    json row = {{"dataset", r.dataset},
                {"model", to_string(r.model)},
                {"config", config_to_json(r.config)},
                {"mse_val", number(r.mse_val)},
                {"mse_test", number(r.mse_test)},
                {"wall_time_s", r.wall_time_s}};
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << rows.dump(2) << '\n';
}

std::vector<ExperimentResult> merge_results(std::vector<std::vector<ExperimentResult>> tables) {
  std::vector<ExperimentResult> merged;
  for (auto& t : tables) {
    for (auto& r : t) merged.push_back(std::move(r));
  }
  std::stable_sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) {
    return std::tie(a.dataset, a.model) < std::tie(b.dataset, b.model);
  });
  return merged;
}

std::string render_comparison_table(std::span<const ExperimentResult> results) {
  std::map<std::string, std::map<ModelKind, const ExperimentResult*>> chosen;
  for (const auto& r : results) {
    const ExperimentResult*& slot = chosen[r.dataset][r.model];
    if (!slot || (std::isfinite(r.mse_val) && !(slot->mse_val <= r.mse_val))) slot = &r;
  }
  std::map<std::string, std::map<ModelKind, double>> table;
  for (const auto& [dataset, row] : chosen) {
    for (const auto& [kind, r] : row) table[dataset][kind] = r->mse_test;
  }

  std::string out = "dataset";
  for (ModelKind kind : kAllModels) out += "," + to_string(kind);
  out += ",imp_vs_lfm,imp_vs_ldafirst\n";
  auto cell = [](const std::map<ModelKind, double>& row, ModelKind kind) {
    auto it = row.find(kind);
    return it == row.end() ? kNaN : it->second;
  };
  auto improvement = [](double ref, double model) {
    return (std::isfinite(ref) && std::isfinite(model) && ref != 0.0) ? (ref - model) / ref * 100.0 : kNaN;
  };
  auto fmt_cell = [](double x) { return std::isfinite(x) ? fmt::format("{:.4f}", x) : std::string(); };
  for (const auto& [dataset, row] : table) {
    out += dataset;
    for (ModelKind kind : kAllModels) out += "," + fmt_cell(cell(row, kind));
    const double ours = cell(row, ModelKind::lda_lfm);
    out += "," + fmt_cell(improvement(cell(row, ModelKind::lfm), ours));
    out += "," + fmt_cell(improvement(cell(row, ModelKind::ldafirst), ours));
    out += "\n";
  }
  return out;
}

void write_kstar_curve(std::span<const ExperimentResult> results, const std::string& path) {
  std::vector<const ExperimentResult*> rows;
  for (const auto& r : results) {
    if (r.model == ModelKind::lda_lfm) rows.push_back(&r);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto* a, const auto* b) { return a->config.K_star < b->config.K_star; });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# K_star mse_val mse_test\n";
  for (const auto* r : rows) {
    out << fmt::format("{} {} {}\n", r->config.K_star, format_double(r->mse_val), format_double(r->mse_test));
  }
}

}  // namespace ldalfm
