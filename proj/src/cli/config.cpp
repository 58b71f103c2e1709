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

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ldalfm/cli.hpp"

namespace ldalfm::cli {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(fmt::format("setting '{}': cannot parse '{}'", key, text));
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument(fmt::format("setting '{}': expected true or false, got '{}'", key, text));
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<T>(key, item));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (n) out += ',';
    out += fmt::format("{}", values[n]);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys{
      "model",       "seed",        "k_core",      "vocab_size",  "K",
      "K_star",      "K_star_sweep", "lambda",     "mu",          "n_iter",
      "lr",          "init_sigma",  "kappa0",      "inner_steps", "gamma",
      "nu",          "gibbs_sweeps", "divergence_limit", "lambda_grid", "mu_grid",
      "clip",        "timing",      "threads"};
  return keys;
}

SettingMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  SettingMap out;
  if (std::filesystem::path(path).extension() == ".json") {
    const json manifest = json::parse(in);
    if (!manifest.contains("settings")) throw std::runtime_error(path + ": manifest has no settings");
    for (const auto& [key, value] : manifest.at("settings").items()) out[key] = value.get<std::string>();
  } else {
    std::string line;
    for (int line_no = 1; std::getline(in, line); ++line_no) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error(fmt::format("{}:{}: expected key = value", path, line_no));
      }
      out[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
    }
  }
  const auto& keys = setting_keys();
  for (const auto& [key, value] : out) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw std::runtime_error(fmt::format("{}: unknown setting '{}'", path, key));
    }
  }
  return out;
}

Settings Settings::resolve(const SettingMap& layered) {
  Settings s;
  auto get = [&](const char* key) -> const std::string* {
    auto it = layered.find(key);
    return it == layered.end() ? nullptr : &it->second;
  };
  if (auto v = get("model")) s.model = parse_model_kind(*v);
  if (auto v = get("seed")) s.config.seed = parse_number<std::uint64_t>("seed", *v);
  if (auto v = get("k_core")) s.prepare.k_core = parse_number<int>("k_core", *v);
  if (auto v = get("vocab_size")) s.prepare.vocab_size = parse_number<int>("vocab_size", *v);
  if (auto v = get("K")) s.config.K = parse_number<int>("K", *v);
  if (auto v = get("K_star")) s.config.K_star = parse_number<int>("K_star", *v);
  if (auto v = get("K_star_sweep")) s.k_star_sweep = parse_list<int>("K_star_sweep", *v);
  if (auto v = get("lambda")) s.config.lambda = parse_number<double>("lambda", *v);
  if (auto v = get("mu")) s.config.mu = parse_number<double>("mu", *v);
  if (auto v = get("n_iter")) s.config.n_iter = parse_number<int>("n_iter", *v);
  if (auto v = get("lr")) s.config.lr = parse_number<double>("lr", *v);
  if (auto v = get("init_sigma")) s.config.init_sigma = parse_number<double>("init_sigma", *v);
  if (auto v = get("kappa0")) s.config.kappa0 = parse_number<double>("kappa0", *v);
  if (auto v = get("inner_steps")) s.config.inner_steps = parse_number<int>("inner_steps", *v);
  if (auto v = get("gamma")) s.config.gamma = parse_number<double>("gamma", *v);
  if (auto v = get("nu")) s.config.nu = parse_number<double>("nu", *v);
  if (auto v = get("gibbs_sweeps")) s.config.gibbs_sweeps = parse_number<int>("gibbs_sweeps", *v);
  if (auto v = get("divergence_limit")) {
    s.config.divergence_limit = parse_number<double>("divergence_limit", *v);
  }
  if (auto v = get("lambda_grid")) s.grid.lambdas = parse_list<double>("lambda_grid", *v);
  if (auto v = get("mu_grid")) s.grid.mus = parse_list<double>("mu_grid", *v);
  if (auto v = get("clip")) s.clip = parse_bool("clip", *v);
  if (auto v = get("timing")) s.timing = parse_bool("timing", *v);
  if (auto v = get("threads")) s.threads = parse_number<int>("threads", *v);
  s.prepare.seed = s.config.seed;

  s.config.validate();
  s.grid.validate();
  if (s.prepare.k_core < 1) throw std::invalid_argument("k_core must be >= 1");
  if (s.prepare.vocab_size < 1) throw std::invalid_argument("vocab_size must be >= 1");
  if (s.threads < 1) throw std::invalid_argument("threads must be >= 1");
  for (int k : s.k_star_sweep) {
    if (k < 0) throw std::invalid_argument("K_star_sweep entries must be >= 0");
  }
  return s;
}

SettingMap Settings::to_map() const {
  return {{"model", to_string(model)},
          {"seed", fmt::format("{}", config.seed)},
          {"k_core", fmt::format("{}", prepare.k_core)},
          {"vocab_size", fmt::format("{}", prepare.vocab_size)},
          {"K", fmt::format("{}", config.K)},
          {"K_star", fmt::format("{}", config.K_star)},
          {"K_star_sweep", join(k_star_sweep)},
          {"lambda", fmt::format("{}", config.lambda)},
          {"mu", fmt::format("{}", config.mu)},
          {"n_iter", fmt::format("{}", config.n_iter)},
          {"lr", fmt::format("{}", config.lr)},
          {"init_sigma", fmt::format("{}", config.init_sigma)},
          {"kappa0", fmt::format("{}", config.kappa0)},
          {"inner_steps", fmt::format("{}", config.inner_steps)},
          {"gamma", fmt::format("{}", config.gamma)},
          {"nu", fmt::format("{}", config.nu)},
          {"gibbs_sweeps", fmt::format("{}", config.gibbs_sweeps)},
          {"divergence_limit", fmt::format("{}", config.divergence_limit)},
          {"lambda_grid", join(grid.lambdas)},
          {"mu_grid", join(grid.mus)},
          {"clip", clip ? "true" : "false"},
          {"timing", timing ? "true" : "false"},
          {"threads", fmt::format("{}", threads)}};
}

json RunManifest::to_json() const {
  json j = {{"format", "ldalfm-manifest"},
          {"version", LDALFM_VERSION},
          {"command", command},
          {"input", input},
          {"seed", settings.config.seed},
          {"model", to_string(settings.model)},
          {"config", config_to_json(settings.config)},
          {"grid", {{"lambda", settings.grid.lambdas}, {"mu", settings.grid.mus}}},
          {"prepare",
           {{"k_core", settings.prepare.k_core},
            {"vocab_size", settings.prepare.vocab_size},
            {"seed", settings.prepare.seed}}},
          {"settings", settings.to_map()}};
  if (!dataset.empty()) j["dataset"] = dataset;
  return j;
}

void write_manifest(const RunManifest& manifest, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest.to_json().dump(2) << '\n';
}

}  // namespace ldalfm::cli
