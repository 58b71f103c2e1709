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

#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldalfm/checkpoint.hpp"
#include "ldalfm/hybrid.hpp"
#include "ldalfm/ingest.hpp"
#include "ldalfm/lfm.hpp"
#include "ldalfm/metrics.hpp"
#include "ldalfm/model_config.hpp"
#include "ldalfm/textprep.hpp"

namespace ldalfm {

// ---------------------------------------------------------------------------
// Data preparation

struct PrepareOptions {
  int k_core = 5;
  std::uint64_t seed = 42;
  int vocab_size = 5000;
};

/// A split plus its corpus and dense rating views.
struct PreparedData {
  std::string dataset;
  DatasetSplit split;
  Corpus corpus;
  std::vector<Rating> train;
  std::vector<Rating> validation;
  std::vector<Rating> test;
  std::vector<ParseError> parse_errors;

  TrainingData training() const;
};

/// parse -> deduplicate -> k-core -> split (seed derived with tag "split")
/// -> text pipeline -> vocabulary -> item documents.
PreparedData prepare_dataset(std::istream& reviews, const std::string& dataset,
                             const PrepareOptions& options);

/// Writes split files, index.json, vocab.txt and documents.txt under dir.
void save_prepared(const PreparedData& data, const std::string& dir);
PreparedData load_prepared(const std::string& dir);

// ---------------------------------------------------------------------------
// Model fitting

struct TrainedModel {
  Checkpoint checkpoint;
  FitTrace trace;
  /// Topic-word distributions for the models that have them.
  std::optional<RowMatrix> phi;
};

/// Fits one model kind with the given configuration.
TrainedModel train_model(ModelKind kind, const HybridConfig& config, const PreparedData& data);

/// MSE of a checkpoint's predictions against the ratings' true values.
double score(const Checkpoint& checkpoint, std::span<const Rating> ratings, bool clip = false);

// ---------------------------------------------------------------------------
// Grid search

struct GridSpec {
  std::vector<double> lambdas{0.0, 0.001, 0.01, 1.0, 10.0};
  std::vector<double> mus{1.0, 10.0, 100.0, 1000.0, 10000.0};

  void validate() const;
};

struct CellScore {
  double mse_val = 0.0;
  double mse_test = 0.0;
};

using CellFit = std::function<CellScore(const HybridConfig&)>;

struct GridCell {
  HybridConfig config;
  double mse_val = 0.0;
  double mse_test = 0.0;
  double wall_time_s = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct GridOutcome {
  HybridConfig best;
  std::size_t best_index = 0;
  std::vector<GridCell> cells;  // lambda-major, in GridSpec order
};

class GridSearchError : public std::runtime_error {
 public:
  GridSearchError(const std::string& what, std::vector<GridCell> cells)
      : std::runtime_error(what), cells_(std::move(cells)) {}
  const std::vector<GridCell>& cells() const { return cells_; }

 private:
  std::vector<GridCell> cells_;
};

/// Fits every (lambda, mu) pair with base's seed and picks the smallest
/// validation MSE; ties go to the smaller lambda, then the smaller mu. A
/// throwing fit marks its cell failed; if all fail, GridSearchError carries
/// every record. Cells run on up to `threads` workers.
GridOutcome grid_search(const GridSpec& grid, const CellFit& fit, const HybridConfig& base,
                        int threads = 1);

// ---------------------------------------------------------------------------
// Experiments and results tables

struct ExperimentResult {
  std::string dataset;
  ModelKind model = ModelKind::offset;
  HybridConfig config;
  double mse_val = 0.0;
  double mse_test = 0.0;
  double wall_time_s = 0.0;
  std::string error;  // empty on success
};

struct ExperimentOptions {
  std::vector<ModelKind> models{std::begin(kAllModels), std::end(kAllModels)};
  HybridConfig config;
  GridSpec grid;
  PrepareOptions prepare;
  bool clip = false;
  bool record_timing = true;  // false writes 0 for wall_time_s
  int threads = 1;
};

/// Fits and scores every requested model on prepared data. lfm and ldafirst
/// are tuned over the lambda grid, lda_lfm over lambda x mu; offset and
/// baseline have nothing to tune. Failures become rows with an error.
std::vector<ExperimentResult> evaluate_models(const PreparedData& data,
                                              const ExperimentOptions& options,
                                              std::vector<TrainedModel>* winners = nullptr);

/// End-to-end: prepare the dataset file, evaluate every model, then write
/// results.csv, results.json and checkpoints/<model>.json under output_dir.
std::vector<ExperimentResult> run_experiment(const std::string& dataset_path,
                                             const ExperimentOptions& options,
                                             const std::string& output_dir);

/// Header: dataset,model,K,K_star,lambda,mu,seed,mse_val,mse_test,wall_time_s
void write_results_csv(std::span<const ExperimentResult> results, const std::string& path);
std::vector<ExperimentResult> read_results_csv(const std::string& path);
void write_results_json(std::span<const ExperimentResult> results, const std::string& path);

/// Sorted by dataset, then model in declaration order.
std::vector<ExperimentResult> merge_results(std::vector<std::vector<ExperimentResult>> tables);

/// Wide comparison table: one row per dataset, one test-MSE column per model,
/// plus Imp = (MSE_ref - MSE_lda_lfm) / MSE_ref * 100 against lfm and ldafirst.
/// Several rows for one (dataset, model) pair resolve to the lowest mse_val.
std::string render_comparison_table(std::span<const ExperimentResult> results);

/// Gnuplot data: "K_star mse_val mse_test" per lda_lfm row, K_star ascending.
void write_kstar_curve(std::span<const ExperimentResult> results, const std::string& path);

}  // namespace ldalfm
