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

#include <chrono>
#include <filesystem>
#include <fstream>

#include <sys/wait.h>

#include <json.hpp>

#include "ldalfm/cli.hpp"
#include "tempdir.hpp"

namespace fs = std::filesystem;
using ldalfm::testing::read_file;
using ldalfm::testing::TempDir;

namespace {

const std::string kFixture = std::string(LDALFM_TEST_DATA_DIR) + "/reviews_tiny.jsonl";

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the command line tool with `args`; stdout and stderr land in `scratch`.
Outcome cli(const TempDir& scratch, const std::string& args) {
  const std::string out = scratch / "stdout.txt";
  const std::string err = scratch / "stderr.txt";
  const std::string command = std::string(LDALFM_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
  const int status = std::system(command.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = read_file(out);
  o.err = read_file(err);
  return o;
}

void prepare(const TempDir& scratch, const std::string& out, const std::string& extra = "") {
  const auto o = cli(scratch, "prepare " + kFixture + " --out " + out + " " + extra);
  REQUIRE_MESSAGE(o.code == 0, o.err);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("prepare writes the expected files") {
  TempDir dir;
  prepare(dir, dir / "data");
  for (const char* name : {"train.jsonl", "validation.jsonl", "test.jsonl", "index.json", "vocab.txt",
                           "documents.txt", "manifest.json"}) {
    INFO(name);
    CHECK(fs::exists(fs::path(dir / "data") / name));
  }
  CHECK_FALSE(fs::exists(fs::path(dir / "data") / "parse_errors.jsonl"));
  const auto manifest = nlohmann::json::parse(read_file(dir / "data/manifest.json"));
  CHECK(manifest.at("command") == "prepare");
  CHECK(manifest.at("prepare").at("k_core") == 5);
  CHECK_FALSE(manifest.contains("out"));
}

TEST_CASE("prepare is deterministic") {
  TempDir dir;
  prepare(dir, dir / "a");
  prepare(dir, dir / "b");
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename().string();
    INFO(name);
    CHECK(read_file(entry.path()) == read_file(fs::path(dir / "b") / name));
  }
}

TEST_CASE("malformed lines are reported, not fatal") {
  TempDir dir;
  {
    std::ofstream out(dir / "reviews.jsonl");
    out << read_file(kFixture) << "{not json\n";
  }
  const auto o = cli(dir, "prepare " + (dir / "reviews.jsonl") + " --out " + (dir / "data"));
  CHECK(o.code == 0);
  CHECK(fs::exists(fs::path(dir / "data") / "parse_errors.jsonl"));
}

TEST_CASE("missing input names the path") {
  TempDir dir;
  const auto o = cli(dir, "prepare /nonexistent/reviews.jsonl --out " + (dir / "data"));
  CHECK(o.code != 0);
  CHECK(o.err.find("/nonexistent/reviews.jsonl") != std::string::npos);
}

TEST_CASE("train writes a checkpoint with the requested shape") {
  TempDir dir;
  prepare(dir, dir / "data");
  const auto o = cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") +
                              " --model lda_lfm --K 5 --iters 3 --gibbs-sweeps 5");
  REQUIRE_MESSAGE(o.code == 0, o.err);
  const auto ck = nlohmann::json::parse(read_file(dir / "run/checkpoint.json"));
  CHECK(ck.at("config").at("K") == 5);
  CHECK(fs::exists(fs::path(dir / "run") / "trace.csv"));
  CHECK(fs::exists(fs::path(dir / "run") / "topics.csv"));
  CHECK(fs::exists(fs::path(dir / "run") / "manifest.json"));
}

TEST_CASE("invalid settings are rejected") {
  TempDir dir;
  prepare(dir, dir / "data");
  CHECK(cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") + " --K 0").code != 0);
  CHECK(cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") + " --lr -1").code != 0);
  CHECK(cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") + " --model svd").code != 0);
}

TEST_CASE("offset trains quickly") {
  TempDir dir;
  prepare(dir, dir / "data");
  const auto start = std::chrono::steady_clock::now();
  const auto o = cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") + " --model offset");
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  CHECK(o.code == 0);
  CHECK(took.count() < 1.0);
}

TEST_CASE("evaluate prints the results schema") {
  TempDir dir;
  prepare(dir, dir / "data");
  REQUIRE(cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") + " --model offset").code == 0);
  const auto o = cli(dir, "evaluate " + (dir / "run/checkpoint.json") + " " + (dir / "data") + " --json");
  REQUIRE_MESSAGE(o.code == 0, o.err);
  const auto report = nlohmann::json::parse(o.out);
  for (const char* key : {"dataset", "model", "K", "K_star", "lambda", "mu", "seed", "mse_val", "mse_test",
                          "wall_time_s"}) {
    INFO(key);
    CHECK(report.contains(key));
  }
  CHECK(report.at("model") == "offset");
  CHECK(report.at("mse_test").get<double>() == doctest::Approx(3.029513888888889).epsilon(1e-12));
}

TEST_CASE("evaluate refuses a checkpoint from a different vocabulary") {
  TempDir dir;
  prepare(dir, dir / "data");
  prepare(dir, dir / "small", "--vocab-size 10");
  REQUIRE(cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") + " --model ldafirst --iters 2 --gibbs-sweeps 5")
              .code == 0);
  const auto o = cli(dir, "evaluate " + (dir / "run/checkpoint.json") + " " + (dir / "small"));
  CHECK(o.code != 0);
  CHECK(o.err.find("V") != std::string::npos);
}

TEST_CASE("gridsearch covers the default grid") {
  TempDir dir;
  prepare(dir, dir / "data");
  const auto o = cli(dir, "gridsearch " + (dir / "data") + " --out " + (dir / "grid") +
                              " --iters 2 --gibbs-sweeps 3 --threads 2");
  REQUIRE_MESSAGE(o.code == 0, o.err);
  const auto grid = nlohmann::json::parse(read_file(dir / "grid/grid.json"));
  CHECK(grid.size() == 25);
  CHECK(fs::exists(fs::path(dir / "grid") / "checkpoint.json"));
  CHECK(fs::exists(fs::path(dir / "grid") / "results.csv"));
}

TEST_CASE("report merges and sorts") {
  TempDir dir;
  {
    std::ofstream a(dir / "a.csv");
    a << "dataset,model,K,K_star,lambda,mu,seed,mse_val,mse_test,wall_time_s\n"
         "toys,lfm,5,0,0.1,0,42,1.1,1.2,0\n";
    std::ofstream b(dir / "b.csv");
    b << "dataset,model,K,K_star,lambda,mu,seed,mse_val,mse_test,wall_time_s\n"
         "beauty,lda_lfm,5,0,0.1,10,42,1.0,1.1,0\n"
         "beauty,lfm,5,0,0.1,0,42,1.0,1.2,0\n";
  }
  const auto o = cli(dir, "report " + (dir / "a.csv") + " " + (dir / "b.csv") + " --out " + (dir / "merged"));
  REQUIRE_MESSAGE(o.code == 0, o.err);
  const auto merged = ldalfm::read_results_csv(dir / "merged/results.csv");
  REQUIRE(merged.size() == 3);
  CHECK(merged[0].dataset == "beauty");
  CHECK(merged[0].model == ldalfm::ModelKind::lfm);
  CHECK(merged[1].model == ldalfm::ModelKind::lda_lfm);
  CHECK(merged[2].dataset == "toys");
  CHECK(o.out.find("beauty") < o.out.find("toys"));
}

TEST_CASE("report on an empty directory fails") {
  TempDir dir;
  fs::create_directories(dir / "empty");
  CHECK(cli(dir, "report " + (dir / "empty")).code != 0);
}

TEST_CASE("config file is applied and flags win") {
  TempDir dir;
  prepare(dir, dir / "data");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# quick run\nmodel = lfm\nK = 3\nlambda = 0.5\nn_iter = 2\n";
  }
  const auto o = cli(dir, "train " + (dir / "data") + " --out " + (dir / "run") + " --config " +
                              (dir / "run.cfg") + " --lambda 0.25");
  REQUIRE_MESSAGE(o.code == 0, o.err);
  const auto manifest = nlohmann::json::parse(read_file(dir / "run/manifest.json"));
  CHECK(manifest.at("model") == "lfm");
  CHECK(manifest.at("config").at("K") == 3);
  CHECK(manifest.at("config").at("lambda") == 0.25);
  CHECK(manifest.at("config").at("n_iter") == 2);

  {
    std::ofstream bad(dir / "bad.cfg");
    bad << "learning_rate = 0.1\n";
  }
  CHECK(cli(dir, "train " + (dir / "data") + " --out " + (dir / "run2") + " --config " + (dir / "bad.cfg")).code != 0);
}

TEST_CASE("a manifest reproduces its run") {
  TempDir dir;
  prepare(dir, dir / "data");
  REQUIRE(cli(dir, "train " + (dir / "data") + " --out " + (dir / "a") + " --model lda_lfm --iters 3 --gibbs-sweeps 5 --seed 9")
              .code == 0);
  REQUIRE(cli(dir, "train " + (dir / "data") + " --out " + (dir / "b") + " --config " + (dir / "a/manifest.json")).code == 0);
  for (const char* name : {"checkpoint.json", "manifest.json", "trace.csv", "topics.csv"}) {
    INFO(name);
    CHECK(read_file(fs::path(dir / "a") / name) == read_file(fs::path(dir / "b") / name));
  }
}

}
