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

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <fstream>

#include "ldalfm/eval.hpp"
#include "tempdir.hpp"

using namespace ldalfm;

namespace {

const std::string kFixture = std::string(LDALFM_TEST_DATA_DIR) + "/reviews_tiny.jsonl";

PreparedData fixture() {
  std::ifstream in(kFixture);
  REQUIRE(in);
  return prepare_dataset(in, "tiny", PrepareOptions{});
}

HybridConfig quick_config() {
  HybridConfig c;
  c.n_iter = 5;
  c.gibbs_sweeps = 10;
  return c;
}

ExperimentResult row(std::string dataset, ModelKind model, double val, double test, int K_star = 0) {
  ExperimentResult r;
  r.dataset = std::move(dataset);
  r.model = model;
  r.config.K_star = K_star;
  r.mse_val = val;
  r.mse_test = test;
  return r;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("fixture preparation") {
  const auto data = fixture();
  CHECK(data.split.n_users() == 6);
  CHECK(data.split.n_items() == 5);
  CHECK(data.train.size() == 24);
  CHECK(data.validation.size() == 3);
  CHECK(data.test.size() == 3);
  CHECK(data.corpus.documents.size() == 5);
  CHECK(data.corpus.vocab_size() == 46);
  CHECK(data.split.seed == 11380159506012374609ULL);
  CHECK(data.training().n_users == 6);

  PrepareOptions strict;
  strict.k_core = 7;
  std::ifstream in(kFixture);
  CHECK_THROWS(prepare_dataset(in, "tiny", strict));
}

TEST_CASE("vocabulary size caps the corpus") {
  std::ifstream in(kFixture);
  PrepareOptions small;
  small.vocab_size = 10;
  const auto data = prepare_dataset(in, "tiny", small);
  CHECK(data.corpus.vocab_size() == 10);
}

TEST_CASE("offset and baseline match the closed forms") {
  const auto data = fixture();
  const auto offset = train_model(ModelKind::offset, HybridConfig{}, data);
  CHECK(score(offset.checkpoint, data.test) == doctest::Approx(3.029513888888889).epsilon(1e-14));
  CHECK(score(offset.checkpoint, data.validation) == doctest::Approx(0.6684027777777778).epsilon(1e-14));
  const auto baseline = train_model(ModelKind::baseline, HybridConfig{}, data);
  CHECK(score(baseline.checkpoint, data.test) == doctest::Approx(7.692847222222222).epsilon(1e-14));
}

TEST_CASE("every model kind trains and survives a checkpoint round-trip") {
  testing::TempDir dir;
  const auto data = fixture();
  for (ModelKind kind : kAllModels) {
    INFO(to_string(kind));
    const auto model = train_model(kind, quick_config(), data);
    const std::string path = dir / (to_string(kind) + ".json");
    save_checkpoint(model.checkpoint, path);
    const auto loaded = load_checkpoint(path);
    CHECK(loaded.model == kind);
    CHECK(loaded.vocab_fingerprint == data.corpus.vocabulary.fingerprint());
    CHECK(loaded.predict(data.test) == model.checkpoint.predict(data.test));
    const bool topics = kind == ModelKind::ldafirst || kind == ModelKind::lda_lfm;
    CHECK(model.phi.has_value() == topics);
    CHECK(loaded.topics.has_value() == (kind == ModelKind::lda_lfm));
  }
}

TEST_CASE("prepared data round-trips through disk") {
  testing::TempDir dir;
  const auto data = fixture();
  save_prepared(data, dir.path().string());
  const auto loaded = load_prepared(dir.path().string());
  CHECK(loaded.split.train == data.split.train);
  CHECK(loaded.corpus.vocabulary.tokens == data.corpus.vocabulary.tokens);
  REQUIRE(loaded.test.size() == data.test.size());
  CHECK(loaded.test.front().value == data.test.front().value);
  CHECK_THROWS(load_prepared(dir / "nothing"));
}

TEST_CASE("grid search picks the smallest validation MSE") {
  GridSpec grid{{0.0, 1.0, 10.0}, {1.0, 100.0}};
  auto fit = [](const HybridConfig& c) {
    return CellScore{std::abs(c.lambda - 1.0) + std::abs(std::log10(c.mu) - 2.0), c.lambda};
  };
  const auto outcome = grid_search(grid, fit, HybridConfig{});
  REQUIRE(outcome.cells.size() == 6);
  CHECK(outcome.best.lambda == 1.0);
  CHECK(outcome.best.mu == 100.0);
  CHECK(outcome.best_index == 3);
  CHECK(outcome.cells[0].config.lambda == 0.0);
  CHECK(outcome.cells[1].config.mu == 100.0);
}

TEST_CASE("grid ties go to the smaller lambda, then the smaller mu") {
  GridSpec grid{{10.0, 0.001, 1.0}, {1000.0, 10.0}};
  const auto outcome = grid_search(grid, [](const HybridConfig&) { return CellScore{1.0, 1.0}; }, HybridConfig{});
  CHECK(outcome.best.lambda == 0.001);
  CHECK(outcome.best.mu == 10.0);
}

TEST_CASE("failed cells are recorded and skipped") {
  GridSpec grid{{0.0, 1.0}, {1.0, 10.0}};
  auto fit = [](const HybridConfig& c) {
    if (c.lambda == 0.0) throw std::runtime_error("boom");
    if (c.mu == 1.0) return CellScore{std::nan(""), 1.0};
    return CellScore{2.0, 3.0};
  };
  const auto outcome = grid_search(grid, fit, HybridConfig{});
  CHECK_FALSE(outcome.cells[0].ok());
  CHECK(outcome.cells[0].error == "boom");
  CHECK_FALSE(outcome.cells[2].ok());
  CHECK(outcome.best.lambda == 1.0);
  CHECK(outcome.best.mu == 10.0);

  try {
    grid_search(grid, [](const HybridConfig&) -> CellScore { throw std::runtime_error("nope"); }, HybridConfig{});
    FAIL("expected GridSearchError");
  } catch (const GridSearchError& e) {
    CHECK(e.cells().size() == 4);
    for (const auto& cell : e.cells()) CHECK(cell.error == "nope");
  }
  CHECK_THROWS_AS(grid_search(GridSpec{{}, {1.0}}, fit, HybridConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(grid_search(GridSpec{{-1.0}, {1.0}}, fit, HybridConfig{}), std::invalid_argument);
}

TEST_CASE("parallel grid search gives the serial answer") {
  const auto data = fixture();
  GridSpec grid;
  auto fit = [&](const HybridConfig& c) {
    const auto m = train_model(ModelKind::lda_lfm, c, data);
    return CellScore{score(m.checkpoint, data.validation), score(m.checkpoint, data.test)};
  };
  const auto serial = grid_search(grid, fit, quick_config(), 1);
  const auto parallel = grid_search(grid, fit, quick_config(), 4);
  REQUIRE(serial.cells.size() == 25);
  CHECK(serial.best_index == parallel.best_index);
  for (std::size_t n = 0; n < serial.cells.size(); ++n) {
    CHECK(serial.cells[n].mse_val == parallel.cells[n].mse_val);
    CHECK(serial.cells[n].mse_test == parallel.cells[n].mse_test);
  }
}

TEST_CASE("evaluate_models tunes each model on its own grid") {
  const auto data = fixture();
  ExperimentOptions options;
  options.config = quick_config();
  options.grid = GridSpec{{0.0, 1.0}, {1.0, 10.0}};
  options.record_timing = false;
  std::vector<TrainedModel> winners;
  const auto results = evaluate_models(data, options, &winners);
  REQUIRE(results.size() == 5);
  CHECK(winners.size() == 5);
  for (const auto& r : results) {
    INFO(to_string(r.model));
    CHECK(r.error.empty());
    CHECK(r.wall_time_s == 0.0);
    CHECK(std::isfinite(r.mse_test));
    CHECK(r.dataset == "tiny");
  }
  CHECK(results[0].mse_test == doctest::Approx(3.029513888888889));
  CHECK(results[2].config.mu == 0.0);
  CHECK(results[3].config.mu == 0.0);
  CHECK((results[4].config.mu == 1.0 || results[4].config.mu == 10.0));
}

TEST_CASE("a failing model becomes an error row") {
  const auto data = fixture();
  ExperimentOptions options;
  options.models = {ModelKind::offset, ModelKind::lda_lfm};
  options.config = quick_config();
  options.config.divergence_limit = 1e-6;
  options.grid = GridSpec{{0.0}, {1.0}};
  const auto results = evaluate_models(data, options);
  REQUIRE(results.size() == 2);
  CHECK(results[0].error.empty());
  CHECK_FALSE(results[1].error.empty());
  CHECK(std::isnan(results[1].mse_test));
}

TEST_CASE("results CSV round-trips") {
  testing::TempDir dir;
  std::vector<ExperimentResult> rows{row("beauty", ModelKind::lfm, 1.25, 1.5), row("beauty", ModelKind::offset, 2.0, 2.25)};
  rows[0].config.lambda = 0.001;
  rows[0].config.seed = 7;
  rows[1].mse_val = std::nan("");
  write_results_csv(rows, dir / "results.csv");
  std::ifstream in(dir / "results.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "dataset,model,K,K_star,lambda,mu,seed,mse_val,mse_test,wall_time_s");
  const auto back = read_results_csv(dir / "results.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].model == ModelKind::lfm);
  CHECK(back[0].config.lambda == 0.001);
  CHECK(back[0].config.seed == 7);
  CHECK(back[0].mse_test == 1.5);
  CHECK(std::isnan(back[1].mse_val));
  write_results_json(rows, dir / "results.json");
  CHECK(std::filesystem::file_size(dir / "results.json") > 0);
}

TEST_CASE("merge sorts by dataset then model") {
  const auto merged = merge_results({{row("toys", ModelKind::lda_lfm, 1, 1), row("beauty", ModelKind::lfm, 1, 1)},
                                     {row("beauty", ModelKind::offset, 1, 1), row("toys", ModelKind::baseline, 1, 1)}});
  REQUIRE(merged.size() == 4);
  CHECK(merged[0].dataset == "beauty");
  CHECK(merged[0].model == ModelKind::offset);
  CHECK(merged[1].model == ModelKind::lfm);
  CHECK(merged[2].model == ModelKind::baseline);
  CHECK(merged[3].model == ModelKind::lda_lfm);
}

TEST_CASE("comparison table reports improvements") {
  const std::vector<ExperimentResult> rows{row("beauty", ModelKind::lfm, 1.0, 2.0), row("beauty", ModelKind::ldafirst, 1.0, 1.6),
                                           row("beauty", ModelKind::lda_lfm, 1.5, 1.9),
                                           row("beauty", ModelKind::lda_lfm, 0.9, 1.5, 2)};
  const std::string table = render_comparison_table(rows);
  CHECK(table ==
        "dataset,offset,baseline,lfm,ldafirst,lda_lfm,imp_vs_lfm,imp_vs_ldafirst\n"
        "beauty,,,2.0000,1.6000,1.5000,25.0000,6.2500\n");
}

TEST_CASE("K* curve lists lda_lfm rows in K* order") {
  testing::TempDir dir;
  const std::vector<ExperimentResult> rows{row("b", ModelKind::lda_lfm, 1.0, 2.0, 3), row("b", ModelKind::lfm, 9, 9),
                                           row("b", ModelKind::lda_lfm, 0.5, 1.5, 1)};
  write_kstar_curve(rows, dir / "kstar.dat");
  CHECK(testing::read_file(dir / "kstar.dat") == "# K_star mse_val mse_test\n1 0.5 1.5\n3 1 2\n");
}

}
