// tools/avwws.cpp

// Copyright 2026  The avwws Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: gen-data, featurize, augment, train, eval, vote.
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numeric divergence.

#include <omp.h>

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <map>

#include "avwws/error.hpp"
#include "avwws/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

struct Flags {
  std::string manifest;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  bool resume = false;
  long stop_after = -1;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_manifest) {
  auto* m = cmd->add_option("--manifest", f.manifest, "Utterance manifest (TSV)");
  if (needs_manifest) m->required();
  cmd->add_option("--config", f.config, "Flat key = value configuration file");
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--seed", f.seed, "Random seed (overrides the config's 'seed')");
  cmd->add_option("--threads", f.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio-visual wake-word spotting toolkit"};
  app.require_subcommand(1);
  Flags flags;

  using Runner = std::function<void(const avwws::CommandOptions&)>;
  const std::vector<std::tuple<std::string, std::string, bool, Runner>> commands = {
      {"gen-data", "Generate a synthetic corpus", false, avwws::run_gen_data},
      {"featurize", "Filterbank features with train-split CMVN", true, avwws::run_featurize},
      {"augment", "Far-field augmentation chain", true, avwws::run_augment},
      {"train", "Two-stage training (cross-entropy, then focal loss)", true, avwws::run_train},
      {"eval", "Score a split with one or more checkpoints", true, avwws::run_eval},
      {"vote", "Majority vote over three score files", false, avwws::run_vote},
  };
  std::map<CLI::App*, Runner> runners;
  for (const auto& [name, help, needs_manifest, run] : commands) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, flags, needs_manifest);
    if (name == "train") {
      cmd->add_flag("--resume", flags.resume, "Continue from <out>/train_state.avck if present");
      cmd->add_option("--stop-after", flags.stop_after, "Stop after this many optimizer steps");
    }
    runners[cmd] = run;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (flags.threads > 0) omp_set_num_threads(flags.threads);
    avwws::CommandOptions opts;
    opts.manifest = flags.manifest;
    opts.out = flags.out;
    if (!flags.config.empty()) opts.config = avwws::Config::load(flags.config);
    CLI::App* chosen = app.get_subcommands().front();
    if (chosen->count("--seed")) opts.seed = flags.seed;
    opts.resume = flags.resume;
    opts.stop_after = flags.stop_after;
    runners.at(chosen)(opts);
    return 0;
  } catch (const avwws::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const avwws::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const avwws::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
