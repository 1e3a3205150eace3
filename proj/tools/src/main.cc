// Copyright 2026 The dlbandit Authors.
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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dlbandit/errors.h"
#include "dlbandit_cli/cli.h"

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<unsigned long long> seed;
  std::optional<std::string> topology, algorithm, scheme;
  std::optional<long long> n, d, horizon, realizations;
  std::optional<double> epsilon, p;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON experiment configuration");
  app->add_option("--set", c.overrides, "Override a config key: key=value (repeatable)");
  app->add_option("--seed", c.seed, "Master seed");
  app->add_option("--topology", c.topology, "ring|star|complete|path|erdos_renyi|explicit");
  app->add_option("--n", c.n, "Number of agents");
  app->add_option("--d", c.d, "Dimension");
  app->add_option("--T", c.horizon, "Horizon");
  app->add_option("--algorithm", c.algorithm,
                  "dlucb|rc_dlucb|safe_dlucb|dlts|no_comm|centralized");
  app->add_option("--epsilon", c.epsilon, "Consensus accuracy");
  app->add_option("--p", c.p, "Erdos-Renyi edge probability");
  app->add_option("--scheme", c.scheme, "laplacian|normalized_laplacian");
  app->add_option("--realizations", c.realizations, "Number of realizations");
}

dlbandit::ExperimentConfig resolve(const Common& c) {
  std::vector<std::string> o = c.overrides;
  const auto push = [&](const char* key, const auto& v) {
    if (v) o.push_back(std::string(key) + "=" + nlohmann::json(*v).dump());
  };
  push("seed", c.seed);
  push("topology", c.topology);
  push("N", c.n);
  push("d", c.d);
  push("T", c.horizon);
  push("algorithm", c.algorithm);
  push("epsilon", c.epsilon);
  push("p", c.p);
  push("scheme", c.scheme);
  push("realizations", c.realizations);
  return dlbandit::cli::load_config(c.config, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized linear bandit simulator"};
  app.require_subcommand(1);

  Common run_c, sweep_c, info_c;
  dlbandit::cli::RunOptions run_o, sweep_o;

  CLI::App* run = app.add_subcommand("run", "Run all realizations of one configuration");
  add_common(run, run_c);
  run->add_option("--out", run_o.out, "Output directory")->capture_default_str();
  run->add_option("--workers", run_o.workers, "Worker threads (0: host parallelism)");
  run->add_flag("--overwrite", run_o.overwrite, "Allow writing into a non-empty directory");

  std::string axis;
  std::vector<std::string> values;
  CLI::App* sweep = app.add_subcommand("sweep", "Run one configuration per axis value");
  add_common(sweep, sweep_c);
  sweep->add_option("--axis", axis, "T|N|algorithm|topology")->required();
  sweep->add_option("--values", values, "Axis values")->delimiter(',')->required();
  sweep->add_option("--out", sweep_o.out, "Output directory")->capture_default_str();
  sweep->add_option("--workers", sweep_o.workers, "Worker threads (0: host parallelism)");
  sweep->add_flag("--overwrite", sweep_o.overwrite, "Allow writing into a non-empty directory");

  CLI::App* info = app.add_subcommand("graph-info", "Spectral summary of a topology");
  add_common(info, info_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dlbandit::cli::kExitConfig;
  }

  try {
    if (*run) return dlbandit::cli::cmd_run(resolve(run_c), run_o, std::cerr);
    if (*sweep) return dlbandit::cli::cmd_sweep(resolve(sweep_c), axis, values, sweep_o, std::cerr);
    if (*info) return dlbandit::cli::cmd_graph_info(resolve(info_c), std::cout);
  } catch (const dlbandit::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return dlbandit::cli::kExitRuntime;
  } catch (const dlbandit::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return dlbandit::cli::kExitConfig;
  }
  return dlbandit::cli::kExitConfig;
}
