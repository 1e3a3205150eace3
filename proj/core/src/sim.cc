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

#include "dlbandit/sim.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <string>
#include <thread>

#include "dlbandit/errors.h"

namespace dlbandit {

namespace {

Eigen::VectorXd unit_gaussian(std::size_t dim, SplitMix64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  do {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

double standard_normal(std::uint64_t seed, Channel channel, std::size_t agent, int t) {
  SplitMix64 rng = make_stream(seed, channel, agent, static_cast<std::uint64_t>(t));
  std::normal_distribution<double> gauss(0.0, 1.0);
  return gauss(rng);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

double ExperimentConfig::resolved_epsilon() const {
  return epsilon.value_or(1.0 / (4.0 * static_cast<double>(dim) + 1.0));
}

void ExperimentConfig::validate() const {
  require(dim >= 1, "d must be >= 1");
  require(horizon >= 0, "T must be >= 0");
  require(topology.n >= 1, "N must be >= 1");
  require(lambda >= 1.0 && std::isfinite(lambda), "lambda must be >= 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be finite and >= 0");
  const double eps = resolved_epsilon();
  require(eps > 0.0 && eps < 1.0, "epsilon must lie in (0, 1)");
  require(realizations >= 1, "realizations must be >= 1");
  if (topology.kind == TopologyKind::kErdosRenyi) {
    require(topology.p > 0.0 && topology.p <= 1.0, "p must lie in (0, 1]");
  }
  if (topology.kind == TopologyKind::kExplicit) {
    require(!topology.edge_file.empty(), "explicit topology needs edge_file");
  }
  if (!decision.box) require(decision.arms >= 1, "finite decision set needs K >= 1");
  if (safe_mode()) {
    require(!decision.box,
            "safe_dlucb requires a finite decision set (decision_set = finite)");
    require(safe.min_gap >= 0.0 && safe.min_gap < 1.0, "safe.min_gap must lie in [0, 1)");
    if (safe.c) require(std::isfinite(*safe.c), "safe.c must be finite");
  }
  if (rc_threshold) require(*rc_threshold >= 0.0, "rc_threshold must be >= 0");
}

Environment sample_environment(std::size_t dim, bool safe, SplitMix64& rng,
                               const SafeEnvOptions& options) {
  if (dim == 0) throw DomainError("sample_environment: d must be >= 1");
  Environment env;
  env.theta_star = unit_gaussian(dim, rng);
  if (!safe) return env;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  constexpr int kTries = 10000;
  for (int attempt = 0; attempt < kTries; ++attempt) {
    Eigen::VectorXd mu = unit_gaussian(dim, rng);
    const double c0 = options.x0 ? mu.dot(*options.x0) : 0.0;
    const auto acceptable = [&](double c) {
      return c > c0 && c - c0 >= options.min_gap;
    };
    std::optional<double> c;
    if (options.c) {
      if (acceptable(*options.c)) c = options.c;
    } else {
      for (int k = 0; k < 64 && !c; ++k) {
        const double draw = uniform(rng);
        if (acceptable(draw)) c = draw;
      }
    }
    if (c) {
      env.mu_star = std::move(mu);
      env.c = *c;
      env.c0 = c0;
      return env;
    }
  }
  throw DomainError("sample_environment: could not satisfy c - c0 >= min_gap");
}

Feedback feedback(const Environment& env, const Eigen::VectorXd& x, std::size_t agent,
                  int t, double max_norm) {
  if (x.size() != env.theta_star.size()) throw DomainError("feedback: dimension mismatch");
  if (x.norm() > max_norm + 1e-9) throw DomainError("feedback: action norm exceeds bound");
  Feedback fb;
  fb.y = env.theta_star.dot(x);
  if (env.sigma > 0.0) {
    fb.y += env.sigma * standard_normal(env.noise_seed, Channel::kRewardNoise, agent, t);
  }
  if (env.mu_star) {
    double z = env.mu_star->dot(x);
    if (env.sigma > 0.0) {
      z += env.sigma * standard_normal(env.noise_seed, Channel::kSafetyNoise, agent, t);
    }
    fb.z = z;
  }
  return fb;
}

Optimum optimal_value(const Environment& env, const DecisionSet& set, bool safe) {
  if (set.is_box()) {
    if (safe) throw DomainError("optimal_value: safe mode needs a finite decision set");
    const Selection s = greedy_select(set, env.theta_star);
    return {s.action, s.value};
  }
  if (safe && !env.mu_star) throw DomainError("optimal_value: environment has no mu*");
  std::optional<Optimum> best;
  for (const auto& x : set.arms()) {
    if (safe && env.mu_star->dot(x) > env.c) continue;
    const double v = env.theta_star.dot(x);
    if (!best || v > best->value) best = Optimum{x, v};
  }
  if (!best) throw DomainError("optimal_value: the true safe set is empty");
  return *best;
}

std::uint64_t Trace::total_scalars() const {
  std::uint64_t total = 0;
  for (auto s : scalars) total += s;
  return total;
}

int Trace::total_violations() const {
  int total = 0;
  for (int v : violations) total += v;
  return total;
}

DecisionSet make_decision_set(const ExperimentConfig& config,
                              std::uint64_t realization_seed) {
  if (config.decision.box) return DecisionSet::box(config.dim);
  SplitMix64 rng = config.decision.resample_arms
                       ? make_stream(realization_seed, Channel::kArms)
                       : make_stream(config.decision.arm_seed, Channel::kArms);
  std::vector<Eigen::VectorXd> arms =
      DecisionSet::random_finite(config.dim, config.decision.arms, rng).arms();
  if (config.decision.ball) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double inv_d = 1.0 / static_cast<double>(config.dim);
    for (auto& a : arms) a *= std::pow(uniform(rng), inv_d);
  }
  if (config.safe_mode() && config.safe.x0 == SafeActionMode::kZero) {
    arms.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.dim)));
  }
  return DecisionSet::finite(std::move(arms));
}

std::optional<double> regret_bound(const ExperimentConfig& config, int mixing_rounds,
                                   double kappa_r) {
  BoundVariant variant;
  switch (config.algorithm) {
    case Algorithm::kDlucb:
    case Algorithm::kDlts:
      variant = BoundVariant::kDlucb;
      break;
    case Algorithm::kRcDlucb:
      variant = BoundVariant::kRcDlucb;
      break;
    case Algorithm::kSafeDlucb:
      variant = BoundVariant::kSafeDlucb;
      break;
    default:
      return std::nullopt;
  }
  BoundParams p;
  p.rounds = mixing_rounds;
  p.d = config.dim;
  p.n = config.topology.n;
  p.horizon = config.horizon;
  p.lambda = config.lambda;
  p.delta = config.delta;
  p.sigma = config.sigma;
  p.epsilon = config.resolved_epsilon();
  p.kappa_r = kappa_r;
  try {
    return theoretical_regret_bound(variant, p, BoundForm::kTheorem);
  } catch (const DomainError&) {
    if (variant == BoundVariant::kRcDlucb) return std::nullopt;
    return theoretical_regret_bound(variant, p, BoundForm::kGeneralEpsilon);
  }
}

RealizationSetup prepare_realization(const ExperimentConfig& config, int realization) {
  config.validate();
  RealizationSetup setup;
  setup.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(Channel::kRealization),
                                         static_cast<std::uint64_t>(realization)});
  const TopologySpec& ts = config.topology;
  std::optional<GraphTopology> topo;
  if (ts.kind == TopologyKind::kExplicit) {
    topo = load_edge_list(ts.edge_file, ts.n);
  } else {
    const bool fresh = ts.kind == TopologyKind::kErdosRenyi && ts.resample_random_graph;
    SplitMix64 graph_rng = make_stream(fresh ? setup.seed : config.seed, Channel::kGraph);
    topo = build_topology(ts.kind, ts.n,
                          ts.kind == TopologyKind::kErdosRenyi ? std::optional(ts.p)
                                                               : std::nullopt,
                          graph_rng);
  }
  setup.comm = std::make_shared<const CommMatrix>(build_comm_matrix(*topo, config.scheme));
  setup.plan = make_mixing_plan(*setup.comm, config.resolved_epsilon(), config.rounding);
  setup.set = make_decision_set(config, setup.seed);

  SafeEnvOptions env_options;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.dim));
  if (config.safe_mode()) {
    if (config.safe.x0 == SafeActionMode::kFirstArm) {
      x0 = setup.set.arms().front();
      env_options.x0 = x0;
    }
    env_options.c = config.safe.c;
    env_options.min_gap = config.safe.min_gap;
  }
  SplitMix64 env_rng = make_stream(setup.seed, Channel::kEnvironment);
  setup.env = sample_environment(config.dim, config.safe_mode(), env_rng, env_options);
  setup.env.sigma = config.sigma;
  setup.env.noise_seed = setup.seed;
  if (config.safe_mode()) setup.safe.emplace(x0, setup.env.c0, setup.env.c);

  TeamContext& team = setup.team;
  team.params = LearningParams{config.dim, ts.n, config.lambda, config.delta, config.sigma,
                               config.resolved_epsilon()};
  team.comm = setup.comm;
  team.plan = setup.plan;
  team.set = setup.set;
  team.keep_warmup_data = config.keep_warmup_data;
  team.safe = setup.safe;
  team.horizon = config.horizon;
  team.rc_threshold = config.rc_threshold;
  team.seed = setup.seed;
  return setup;
}

Trace run_realization(const ExperimentConfig& config, int realization) {
  const RealizationSetup setup = prepare_realization(config, realization);
  const bool safe = config.safe_mode();
  auto team = make_team(config.algorithm, setup.team);
  const Optimum opt = optimal_value(setup.env, setup.set, safe);
  const double max_norm = setup.set.max_norm();
  const std::size_t n = team->size();

  Trace trace;
  trace.agents = n;
  trace.mixing_rounds = setup.plan.rounds;
  trace.lambda2_abs = setup.comm->lambda2_abs();
  trace.kappa_r = setup.safe ? setup.safe->kappa_r() : 1.0;
  trace.bound = regret_bound(config, setup.plan.rounds, trace.kappa_r);
  const auto horizon = static_cast<std::size_t>(config.horizon);
  trace.regret.reserve(horizon);
  trace.cumulative.reserve(horizon);

  double cumulative = 0.0;
  Eigen::VectorXd rewards(static_cast<Eigen::Index>(n));
  for (int t = 1; t <= config.horizon; ++t) {
    const std::vector<Eigen::VectorXd> actions = team->act(t);
    std::optional<Eigen::VectorXd> safety;
    if (safe) safety = Eigen::VectorXd(static_cast<Eigen::Index>(n));
    double round_regret = 0.0;
    int violations = 0;
    double magnitude = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const Feedback fb = feedback(setup.env, actions[i], i, t, max_norm);
      rewards(ii) = fb.y;
      bool truly_safe = true;
      if (safe) {
        (*safety)(ii) = *fb.z;
        const double excess = setup.env.mu_star->dot(actions[i]) - setup.env.c;
        if (excess > 0.0) {
          truly_safe = false;
          ++violations;
          magnitude += excess;
        }
      }
      const double r = opt.value - setup.env.theta_star.dot(actions[i]);
      if (r < -1e-12 && truly_safe) {
        throw InvariantViolation("negative regret " + std::to_string(r) + " for agent " +
                                 std::to_string(i) + " at round " + std::to_string(t));
      }
      round_regret += r;
    }
    const RoundOutput out = team->observe(t, actions, rewards, safety);
    cumulative += round_regret;
    trace.regret.push_back(round_regret);
    trace.cumulative.push_back(cumulative);
    trace.scalars.push_back(out.scalars);
    trace.phase_id.push_back(out.phase_id);
    trace.violations.push_back(violations);
    trace.violation_magnitude.push_back(magnitude);
    trace.empty_safe_sets.push_back(static_cast<int>(out.empty_safe_sets));
  }
  trace.phase_count = team->phase_count();
  return trace;
}

std::vector<Trace> run_experiment(const ExperimentConfig& config, unsigned workers) {
  config.validate();
  const auto count = static_cast<std::size_t>(config.realizations);
  std::vector<Trace> traces(count);
  std::vector<std::exception_ptr> errors(count);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t r = next++; r < count; r = next++) {
      try {
        traces[r] = run_realization(config, static_cast<int>(r));
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return traces;
}

Aggregate aggregate(const std::vector<Trace>& traces) {
  if (traces.empty()) throw DomainError("aggregate: no traces");
  const std::size_t len = traces.front().regret.size();
  for (const auto& tr : traces) {
    if (tr.regret.size() != len) throw DomainError("aggregate: trace length mismatch");
  }
  const double k = static_cast<double>(traces.size());
  Aggregate agg;
  agg.regret_mean.assign(len, 0.0);
  agg.regret_std.assign(len, 0.0);
  agg.per_agent_regret_mean.assign(len, 0.0);
  agg.comm_scalars_cum.assign(len, 0.0);
  agg.phases_cum.assign(len, 0.0);
  agg.violations_cum.assign(len, 0.0);
  for (const auto& tr : traces) {
    double comm = 0.0;
    double phases = 0.0;
    double violations = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      comm += static_cast<double>(tr.scalars[t]);
      if (tr.phase_id[t] != 0 && (t == 0 || tr.phase_id[t - 1] != tr.phase_id[t])) {
        phases += 1.0;
      }
      violations += tr.violations[t];
      agg.regret_mean[t] += tr.cumulative[t] / k;
      agg.per_agent_regret_mean[t] += tr.cumulative[t] / static_cast<double>(tr.agents) / k;
      agg.comm_scalars_cum[t] += comm / k;
      agg.phases_cum[t] += phases / k;
      agg.violations_cum[t] += violations / k;
    }
    agg.phase_count_mean += tr.phase_count / k;
  }
  if (traces.size() > 1) {
    for (const auto& tr : traces) {
      for (std::size_t t = 0; t < len; ++t) {
        const double dev = tr.cumulative[t] - agg.regret_mean[t];
        agg.regret_std[t] += dev * dev / (k - 1.0);
      }
      const double dp = tr.phase_count - agg.phase_count_mean;
      agg.phase_count_std += dp * dp / (k - 1.0);
    }
    for (double& v : agg.regret_std) v = std::sqrt(v);
    agg.phase_count_std = std::sqrt(agg.phase_count_std);
  }
  return agg;
}

}  // namespace dlbandit
