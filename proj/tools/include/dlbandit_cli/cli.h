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

#ifndef DLBANDIT_CLI_CLI_H_
#define DLBANDIT_CLI_CLI_H_

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dlbandit/sim.h"

namespace dlbandit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Strict: unknown keys and wrong types raise ConfigError. Missing keys take
// their defaults. The result is validated.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(std::string_view text);
nlohmann::json config_to_json(const ExperimentConfig& config);

// "a.b=value": value parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, std::string_view assignment);

// Reads `path` (empty: start from {}), applies overrides in order.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides);

// Shortest round-trip decimal representation, independent of locale.
std::string format_double(double v);

std::string trace_csv(const Aggregate& agg);
nlohmann::json summary_json(const ExperimentConfig& config, const std::vector<Trace>& traces,
                            const Aggregate& agg);

struct RunOptions {
  std::string out = "results";
  unsigned workers = 0;
  bool overwrite = false;
};

int cmd_run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

enum class SweepAxis { kT, kN, kAlgorithm, kTopology };
SweepAxis parse_sweep_axis(std::string_view name);
// Copy of `base` with the axis set to `value`.
ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis,
                            std::string_view value);
int cmd_sweep(const ExperimentConfig& base, std::string_view axis,
              const std::vector<std::string>& values, const RunOptions& options,
              std::ostream& log);

int cmd_graph_info(const ExperimentConfig& config, std::ostream& out);

}  // namespace dlbandit::cli

#endif  // DLBANDIT_CLI_CLI_H_
