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

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldalfm/eval.hpp"

namespace ldalfm::cli {

/// Flat key -> value settings, as read from a config file or flags.
using SettingMap = std::map<std::string, std::string>;

/// Keys understood in config files and manifests.
const std::vector<std::string>& setting_keys();

/// Reads "key = value" lines; '#' starts a comment, blank lines are skipped.
/// A path ending in ".json" is read as a run manifest and its "settings"
/// object is used instead.
SettingMap read_config_file(const std::string& path);

/// Everything a command needs after defaults, config file and flags have
/// been layered (flags win).
struct Settings {
  ModelKind model = ModelKind::lda_lfm;
  HybridConfig config;
  GridSpec grid;
  PrepareOptions prepare;
  std::vector<int> k_star_sweep;  // empty: use config.K_star only
  bool clip = false;
  bool timing = true;
  int threads = 1;

  /// Throws std::invalid_argument naming the offending key.
  static Settings resolve(const SettingMap& layered);
  SettingMap to_map() const;
};

/// Written as manifest.json into every output directory. Holds the fully
/// resolved settings, so `--config manifest.json` reproduces the run.
struct RunManifest {
  std::string command;
  std::string input;
  std::string dataset;  // omitted when empty
  Settings settings;

  nlohmann::json to_json() const;
};

void write_manifest(const RunManifest& manifest, const std::string& dir);

int cmd_prepare(const std::string& input, const std::string& out_dir, const Settings& settings);
int cmd_train(const std::string& data_dir, const std::string& out_dir, const Settings& settings);
int cmd_evaluate(const std::string& checkpoint_path, const std::string& data_dir,
                 const std::string& out_dir, const Settings& settings, bool json_output);
int cmd_gridsearch(const std::string& data_dir, const std::string& out_dir,
                   const Settings& settings);
int cmd_experiment(const std::string& data_dir, const std::string& out_dir,
                   const Settings& settings);
int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir);

/// Parses argv, runs the chosen subcommand, and returns the process exit
/// code. Errors are logged and yield a nonzero code.
int run(int argc, char** argv);

}  // namespace ldalfm::cli
