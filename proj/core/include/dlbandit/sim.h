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

#ifndef DLBANDIT_SIM_H_
#define DLBANDIT_SIM_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dlbandit/agents.h"
#include "dlbandit/bandit_core.h"
#include "dlbandit/consensus.h"
#include "dlbandit/graph.h"
#include "dlbandit/rng.h"

namespace dlbandit {

struct TopologySpec {
  TopologyKind kind = TopologyKind::kRing;
  std::size_t n = 20;
  double p = 0.5;               // erdos_renyi only
  std::string edge_file;        // explicit only
  bool resample_random_graph = true;  // new Erdős–Rényi draw per realization
};

struct DecisionSpec {
  bool box = true;
  std::size_t arms = 10;  // finite only
  std::uint64_t arm_seed = 1;
  bool ball = false;           // uniform in the unit ball instead of on the sphere
  bool resample_arms = false;  // fresh arms per realization (arm_seed ignored)
};

enum class SafeActionMode { kZero, kFirstArm };

struct SafeSpec {
  std::optional<double> c;  // drawn from U[0,1] when absent
  double min_gap = 0.0;     // c − c0 is at least this
  SafeActionMode x0 = SafeActionMode::kZero;
};

struct ExperimentConfig {
  TopologySpec topology;
  std::size_t dim = 5;
  int horizon = 1000;
  Algorithm algorithm = Algorithm::kDlucb;
  DecisionSpec decision;
  double sigma = 0.1;
  double lambda = 1.0;
  double delta = 0.1;
  std::optional<double> epsilon;  // 1/(4d+1) when absent
  SafeSpec safe;
  int realizations = 20;
  std::uint64_t seed = 0;
  bool keep_warmup_data = false;
  CommScheme scheme = CommScheme::kLaplacian;
  MixingRounding rounding = MixingRounding::kCeil;
  std::optional<double> rc_threshold;

  double resolved_epsilon() const;
  bool safe_mode() const { return algorithm == Algorithm::kSafeDlucb; }
  // Throws ConfigError naming the first violated requirement.
  void validate() const;
};

struct Environment {
  Eigen::VectorXd theta_star;
  std::optional<Eigen::VectorXd> mu_star;
  double c = 0.0;
  double c0 = 0.0;
  double sigma = 0.1;
  std::uint64_t noise_seed = 0;
};

struct SafeEnvOptions {
  std::optional<Eigen::VectorXd> x0;  // absent: zero-action sentinel (c0 = 0)
  std::optional<double> c;
  double min_gap = 0.0;
};

// θ* (and μ*, c in safe mode) drawn from `rng`. The noise seed is left to
// the caller.
Environment sample_environment(std::size_t dim, bool safe, SplitMix64& rng,
                               const SafeEnvOptions& options = {});

struct Feedback {
  double y = 0.0;
  std::optional<double> z;
};

// Gaussian noise keyed by (noise seed, channel, agent, round).
Feedback feedback(const Environment& env, const Eigen::VectorXd& x, std::size_t agent,
                  int t, double max_norm = 1.0);

struct Optimum {
  Eigen::VectorXd action;
  double value = 0.0;
};

// In safe mode only arms with ⟨μ*, x⟩ ≤ c are eligible.
Optimum optimal_value(const Environment& env, const DecisionSet& set, bool safe);

struct Trace {
  std::size_t agents = 0;
  int mixing_rounds = 1;
  double lambda2_abs = 0.0;
  double kappa_r = 1.0;
  std::optional<double> bound;  // theoretical regret bound at T

  std::vector<double> regret;      // Σ_i r_{i,t}
  std::vector<double> cumulative;  // R_t
  std::vector<std::uint64_t> scalars;
  std::vector<int> phase_id;
  std::vector<int> violations;
  std::vector<double> violation_magnitude;
  std::vector<int> empty_safe_sets;
  int phase_count = 0;

  int rounds() const { return static_cast<int>(regret.size()); }
  double final_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  std::uint64_t total_scalars() const;
  int total_violations() const;
};

// Deterministic pieces of one realization.
struct RealizationSetup {
  std::uint64_t seed = 0;
  std::shared_ptr<const CommMatrix> comm;
  MixingPlan plan;
  Environment env;
  DecisionSet set = DecisionSet::box(1);
  std::optional<SafeGeometry> safe;
  TeamContext team;
};

// `realization_seed` is used only when arms are resampled per realization.
DecisionSet make_decision_set(const ExperimentConfig& config,
                              std::uint64_t realization_seed = 0);
RealizationSetup prepare_realization(const ExperimentConfig& config, int realization);
Trace run_realization(const ExperimentConfig& config, int realization);

// Runs all realizations on `workers` threads (0: host parallelism).
std::vector<Trace> run_experiment(const ExperimentConfig& config, unsigned workers = 0);

std::optional<double> regret_bound(const ExperimentConfig& config, int mixing_rounds,
                                   double kappa_r);

struct Aggregate {
  std::vector<double> regret_mean;
  std::vector<double> regret_std;  // sample standard deviation
  std::vector<double> per_agent_regret_mean;
  std::vector<double> comm_scalars_cum;
  std::vector<double> phases_cum;
  std::vector<double> violations_cum;
  double phase_count_mean = 0.0;
  double phase_count_std = 0.0;
};

Aggregate aggregate(const std::vector<Trace>& traces);

}  // namespace dlbandit

#endif  // DLBANDIT_SIM_H_
