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

#include "dlbandit/agents.h"

#include <array>
#include <limits>
#include <string>
#include <utility>

#include "dlbandit/errors.h"

namespace dlbandit {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 6> kAlgorithmNames{{
    {Algorithm::kDlucb, "dlucb"},
    {Algorithm::kRcDlucb, "rc_dlucb"},
    {Algorithm::kSafeDlucb, "safe_dlucb"},
    {Algorithm::kDlts, "dlts"},
    {Algorithm::kNoComm, "no_comm"},
    {Algorithm::kCentralized, "centralized"},
}};

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  for (const auto& [a, name] : kAlgorithmNames) {
    if (a == algorithm) return name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kAlgorithmNames) {
    if (n == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- DLUCB ---

DlucbAgent::DlucbAgent(std::size_t index, const LearningParams& params,
                       const MixingPlan& plan, bool keep_warmup_data,
                       bool safety_channel)
    : index_(index),
      params_(params),
      plan_(plan),
      keep_warmup_data_(keep_warmup_data),
      stats_(params.dim, params.lambda),
      queue_(SlotLayout{params.agents, params.dim, safety_channel}, plan.rounds) {
  if (index >= params.agents) throw DomainError("agent index out of range");
}

void DlucbAgent::begin_round(int t) {
  const int s = plan_.rounds;
  if (t <= s) return;
  if (t == s + 1 && !keep_warmup_data_) reset_stats();
  MixedPayload slot = queue_.dequeue_mixed();
  if (slot.source_round != t - s) {
    throw InvariantViolation("agent " + std::to_string(index_) + " at round " +
                             std::to_string(t) + " dequeued round " +
                             std::to_string(slot.source_round));
  }
  absorb(slot);
}

Selection DlucbAgent::choose_ucb(int t, const DecisionSet& set, double scale) const {
  const ConfidenceSet cs = make_confidence_set(stats_, params_.beta(t), flavor_for(set));
  return ucb_select(set, cs, scale);
}

Selection DlucbAgent::choose_ts(int t, const DecisionSet& set, SplitMix64& rng) const {
  const ConfidenceSet cs = make_confidence_set(stats_, params_.beta(t), flavor_for(set));
  return greedy_select(set, ts_perturb(cs, rng));
}

void DlucbAgent::end_round(int t, const Eigen::VectorXd& x, double y,
                           std::optional<double> z) {
  if (in_warmup(t)) add_own(x, y, z);
  queue_.enqueue_round(t, index_, x, y, outgoing_safety(x, z));
}

void DlucbAgent::reset_stats() { stats_.reset(); }

void DlucbAgent::absorb(const MixedPayload& slot) {
  stats_.add_rows(slot.actions, slot.rewards, n_squared());
}

void DlucbAgent::add_own(const Eigen::VectorXd& x, double y, std::optional<double>) {
  stats_.add(x, y);
}

std::optional<double> DlucbAgent::outgoing_safety(const Eigen::VectorXd&,
                                                  std::optional<double>) const {
  return std::nullopt;
}

// ----------------------------------------------------------- Safe-DLUCB ---

SafeDlucbAgent::SafeDlucbAgent(std::size_t index, const LearningParams& params,
                               const MixingPlan& plan, bool keep_warmup_data,
                               SafeGeometry geometry)
    : DlucbAgent(index, params, plan, keep_warmup_data, true),
      geo_(std::move(geometry)),
      ortho_(geo_, params.lambda) {
  if (static_cast<std::size_t>(geo_.x0().size()) != params.dim) {
    throw DomainError("safe action dimension mismatch");
  }
}

double SafeDlucbAgent::shifted_feedback(const Eigen::VectorXd& x, double z) const {
  return z - geo_.known_constraint_part(x);
}

SafeChoice SafeDlucbAgent::choose_safe(int t, const DecisionSet& set) const {
  if (set.is_box()) throw DomainError("Safe-DLUCB requires a finite decision set");
  const double beta = params().beta(t);
  const Eigen::VectorXd mu = ortho_estimate(ortho_);
  const std::vector<std::size_t> keep = safe_filter(set.arms(), mu, ortho_, beta, geo_);
  SafeChoice out;
  out.survivors = keep.size();
  if (keep.empty()) {
    const auto idx = set.find(geo_.x0());
    if (!idx) throw ConfigError("the safe action x0 is not part of the decision set");
    out.selection = Selection{geo_.x0(), 0.0, *idx};
    out.fallback = true;
    return out;
  }
  std::vector<Eigen::VectorXd> arms;
  arms.reserve(keep.size());
  for (std::size_t k : keep) arms.push_back(set.arms()[k]);
  const ConfidenceSet cs = make_confidence_set(stats(), beta, NormFlavor::kEll2);
  out.selection = ucb_select_finite(arms, cs, geo_.kappa_r());
  out.selection.index = keep[out.selection.index];
  return out;
}

void SafeDlucbAgent::reset_stats() {
  DlucbAgent::reset_stats();
  ortho_.reset(geo_);
}

void SafeDlucbAgent::absorb(const MixedPayload& slot) {
  DlucbAgent::absorb(slot);
  if (!slot.safety) throw InvariantViolation("safe agent received no safety channel");
  const Eigen::VectorXd& u = geo_.x0_unit();
  const Eigen::MatrixXd perp = slot.actions - (slot.actions * u) * u.transpose();
  ortho_.add_rows(perp, *slot.safety, n_squared());
}

void SafeDlucbAgent::add_own(const Eigen::VectorXd& x, double y,
                             std::optional<double> z) {
  if (!z) throw DomainError("Safe-DLUCB needs safety feedback every round");
  DlucbAgent::add_own(x, y, z);
  const auto [along, perp] = project_components(x, geo_);
  (void)along;
  ortho_.add(perp, shifted_feedback(x, *z));
}

std::optional<double> SafeDlucbAgent::outgoing_safety(const Eigen::VectorXd& x,
                                                      std::optional<double> z) const {
  if (!z) throw DomainError("Safe-DLUCB needs safety feedback every round");
  return shifted_feedback(x, *z);
}

// ------------------------------------------------------------- RC-DLUCB ---

RcDlucbAgent::RcDlucbAgent(std::size_t index, const LearningParams& params,
                           double threshold)
    : index_(index), params_(params), threshold_(threshold), stats_(params.dim, params.lambda) {
  const auto d = static_cast<Eigen::Index>(params.dim);
  w_syn_ = Eigen::MatrixXd::Zero(d, d);
  w_new_ = w_syn_;
  v_syn_ = Eigen::VectorXd::Zero(d);
  v_new_ = v_syn_;
  epoch_log_det_ = stats_.log_det();
}

void RcDlucbAgent::refresh() {
  stats_.reset();
  stats_.gram += w_syn_ + w_new_;
  stats_.moment = v_syn_ + v_new_;
}

Selection RcDlucbAgent::choose(int t, const DecisionSet& set) const {
  const ConfidenceSet cs = make_confidence_set(stats_, params_.beta(t), flavor_for(set));
  return ucb_select(set, cs);
}

bool RcDlucbAgent::record(int t, const Eigen::VectorXd& x, double y) {
  if (in_phase_) throw InvariantViolation("RC-DLUCB: record() during a phase");
  w_new_.noalias() += x * x.transpose();
  v_new_.noalias() += y * x;
  refresh();
  const double growth = stats_.log_det() - epoch_log_det_;
  return growth * static_cast<double>(t - epoch_start_) > threshold_;
}

Eigen::MatrixXd RcDlucbAgent::payload() const {
  const auto d = w_new_.rows();
  Eigen::MatrixXd p(d, d + 1);
  p.leftCols(d) = w_new_;
  p.col(d) = v_new_;
  return p;
}

void RcDlucbAgent::start_phase(const Eigen::VectorXd& frozen_action) {
  in_phase_ = true;
  frozen_ = frozen_action;
  frozen_rewards_ = 0.0;
}

void RcDlucbAgent::record_frozen(double y) {
  if (!in_phase_) throw InvariantViolation("RC-DLUCB: frozen play outside a phase");
  frozen_rewards_ += y;
}

void RcDlucbAgent::finish_phase(int t_k, const Eigen::MatrixXd& mixed, int rounds) {
  if (!in_phase_) throw InvariantViolation("RC-DLUCB: finish without a phase");
  const auto d = w_new_.rows();
  const double n = static_cast<double>(params_.agents);
  w_syn_ += n * mixed.leftCols(d);
  v_syn_ += n * mixed.col(d);
  w_new_ = static_cast<double>(rounds) * frozen_ * frozen_.transpose();
  v_new_ = frozen_rewards_ * frozen_;
  refresh();
  epoch_start_ = t_k;
  epoch_log_det_ = stats_.log_det();
  in_phase_ = false;
}

// ---------------------------------------------------------------- teams ---

namespace {

void check_feedback_shape(std::size_t n, const std::vector<Eigen::VectorXd>& actions,
                          const Eigen::VectorXd& rewards) {
  if (actions.size() != n || static_cast<std::size_t>(rewards.size()) != n) {
    throw DomainError("observe: one action and one reward per agent expected");
  }
}

class GossipTeam : public Team {
 public:
  GossipTeam(Algorithm algorithm, const TeamContext& ctx)
      : algorithm_(algorithm), ctx_(ctx) {
    const std::size_t n = ctx.params.agents;
    for (std::size_t i = 0; i < n; ++i) {
      if (algorithm == Algorithm::kSafeDlucb) {
        agents_.push_back(std::make_unique<SafeDlucbAgent>(
            i, ctx.params, ctx.plan, ctx.keep_warmup_data, *ctx.safe));
      } else {
        agents_.push_back(std::make_unique<DlucbAgent>(i, ctx.params, ctx.plan,
                                                       ctx.keep_warmup_data));
      }
      queues_.push_back(&agents_.back()->queue());
    }
  }

  std::size_t size() const override { return agents_.size(); }

  std::vector<Eigen::VectorXd> act(int t) override {
    std::vector<Eigen::VectorXd> out;
    out.reserve(agents_.size());
    empty_safe_sets_ = 0;
    for (auto& agent : agents_) {
      agent->begin_round(t);
      switch (algorithm_) {
        case Algorithm::kSafeDlucb: {
          const SafeChoice c =
              static_cast<const SafeDlucbAgent&>(*agent).choose_safe(t, ctx_.set);
          if (c.fallback) ++empty_safe_sets_;
          out.push_back(c.selection.action);
          break;
        }
        case Algorithm::kDlts: {
          SplitMix64 rng = make_stream(ctx_.seed, Channel::kThompson, agent->index(),
                                       static_cast<std::uint64_t>(t));
          out.push_back(agent->choose_ts(t, ctx_.set, rng).action);
          break;
        }
        default:
          out.push_back(agent->choose_ucb(t, ctx_.set).action);
      }
    }
    return out;
  }

  RoundOutput observe(int t, const std::vector<Eigen::VectorXd>& actions,
                      const Eigen::VectorXd& rewards,
                      const std::optional<Eigen::VectorXd>& safety) override {
    check_feedback_shape(agents_.size(), actions, rewards);
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      std::optional<double> z;
      if (safety) z = (*safety)(static_cast<Eigen::Index>(i));
      agents_[i]->end_round(t, actions[i], rewards(static_cast<Eigen::Index>(i)), z);
    }
    RoundOutput out;
    out.scalars = advance_queues(queues_, *ctx_.comm, ctx_.plan);
    out.empty_safe_sets = empty_safe_sets_;
    return out;
  }

  const SufficientStats& agent_stats(std::size_t i) const override {
    return agents_.at(i)->stats();
  }

 private:
  Algorithm algorithm_;
  TeamContext ctx_;
  std::vector<std::unique_ptr<DlucbAgent>> agents_;
  std::vector<ConsensusQueue*> queues_;
  std::size_t empty_safe_sets_ = 0;
};

class RcTeam : public Team {
 public:
  explicit RcTeam(const TeamContext& ctx) : ctx_(ctx) {
    const double m = ctx.rc_threshold.value_or(
        rc_threshold(ctx.params.dim, ctx.params.agents, ctx.horizon, ctx.params.lambda));
    for (std::size_t i = 0; i < ctx.params.agents; ++i) {
      agents_.emplace_back(i, ctx.params, m);
    }
    now_.resize(agents_.size());
    prev_.resize(agents_.size());
    const auto d = static_cast<std::uint64_t>(ctx.params.dim);
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      per_phase_round_ += ctx.comm->topology().degree(i) * d * (d + 1);
    }
  }

  std::size_t size() const override { return agents_.size(); }

  std::vector<Eigen::VectorXd> act(int t) override {
    std::vector<Eigen::VectorXd> out;
    out.reserve(agents_.size());
    for (const auto& agent : agents_) {
      out.push_back(agent.in_phase() ? agent.frozen_action()
                                     : agent.choose(t, ctx_.set).action);
    }
    return out;
  }

  RoundOutput observe(int t, const std::vector<Eigen::VectorXd>& actions,
                      const Eigen::VectorXd& rewards,
                      const std::optional<Eigen::VectorXd>&) override {
    check_feedback_shape(agents_.size(), actions, rewards);
    RoundOutput out;
    const int s = ctx_.plan.rounds;
    if (phase_start_ > 0) {
      const int ell = t - phase_start_ + 1;
      for (std::size_t i = 0; i < agents_.size(); ++i) {
        agents_[i].record_frozen(rewards(static_cast<Eigen::Index>(i)));
      }
      auto next = comm_step(now_, prev_, ell, *ctx_.comm, ctx_.plan);
      prev_ = std::move(now_);
      now_ = std::move(next);
      out.scalars = per_phase_round_;
      out.phase_id = phases_;
      if (ell == s) {
        for (std::size_t i = 0; i < agents_.size(); ++i) {
          agents_[i].finish_phase(t, now_[i], s);
        }
        phase_start_ = 0;
      }
      return out;
    }
    bool trigger = false;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      // Every agent records; the trigger is a global OR.
      const bool fired = agents_[i].record(t, actions[i], rewards(static_cast<Eigen::Index>(i)));
      trigger = trigger || fired;
    }
    if (trigger && t < ctx_.horizon) {
      ++phases_;
      phase_start_ = t + 1;
      for (std::size_t i = 0; i < agents_.size(); ++i) {
        agents_[i].start_phase(actions[i]);
        now_[i] = agents_[i].payload();
        prev_[i] = Eigen::MatrixXd::Zero(now_[i].rows(), now_[i].cols());
      }
    }
    return out;
  }

  const SufficientStats& agent_stats(std::size_t i) const override {
    return agents_.at(i).stats();
  }
  int phase_count() const override { return phases_; }

 private:
  TeamContext ctx_;
  std::vector<RcDlucbAgent> agents_;
  std::vector<Eigen::MatrixXd> now_, prev_;
  std::uint64_t per_phase_round_ = 0;
  int phase_start_ = 0;
  int phases_ = 0;
};

class NoCommTeam : public Team {
 public:
  explicit NoCommTeam(const TeamContext& ctx)
      : ctx_(ctx), stats_(ctx.params.agents, SufficientStats(ctx.params.dim, ctx.params.lambda)) {}

  std::size_t size() const override { return stats_.size(); }

  std::vector<Eigen::VectorXd> act(int t) override {
    std::vector<Eigen::VectorXd> out;
    out.reserve(stats_.size());
    const double beta = ctx_.params.beta(t);
    for (const auto& s : stats_) {
      out.push_back(ucb_select(ctx_.set, make_confidence_set(s, beta, flavor_for(ctx_.set)))
                        .action);
    }
    return out;
  }

  RoundOutput observe(int, const std::vector<Eigen::VectorXd>& actions,
                      const Eigen::VectorXd& rewards,
                      const std::optional<Eigen::VectorXd>&) override {
    check_feedback_shape(stats_.size(), actions, rewards);
    for (std::size_t i = 0; i < stats_.size(); ++i) {
      stats_[i].add(actions[i], rewards(static_cast<Eigen::Index>(i)));
    }
    return {};
  }

  const SufficientStats& agent_stats(std::size_t i) const override { return stats_.at(i); }

 private:
  TeamContext ctx_;
  std::vector<SufficientStats> stats_;
};

// Every agent sees every observation: one shared set of statistics.
class CentralizedTeam : public Team {
 public:
  explicit CentralizedTeam(const TeamContext& ctx)
      : ctx_(ctx), stats_(ctx.params.dim, ctx.params.lambda) {}

  std::size_t size() const override { return ctx_.params.agents; }

  std::vector<Eigen::VectorXd> act(int t) override {
    const Selection s = ucb_select(
        ctx_.set, make_confidence_set(stats_, ctx_.params.beta(t), flavor_for(ctx_.set)));
    return std::vector<Eigen::VectorXd>(ctx_.params.agents, s.action);
  }

  RoundOutput observe(int, const std::vector<Eigen::VectorXd>& actions,
                      const Eigen::VectorXd& rewards,
                      const std::optional<Eigen::VectorXd>&) override {
    const std::size_t n = ctx_.params.agents;
    check_feedback_shape(n, actions, rewards);
    for (std::size_t i = 0; i < n; ++i) {
      stats_.add(actions[i], rewards(static_cast<Eigen::Index>(i)));
    }
    // All-to-all broadcast of (x, y).
    RoundOutput out;
    out.scalars = static_cast<std::uint64_t>(n) * (n - 1) * (ctx_.params.dim + 1);
    return out;
  }

  const SufficientStats& agent_stats(std::size_t) const override { return stats_; }

 private:
  TeamContext ctx_;
  SufficientStats stats_;
};

}  // namespace

std::unique_ptr<Team> make_team(Algorithm algorithm, const TeamContext& ctx) {
  if (ctx.params.agents == 0) throw ConfigError("a team needs at least one agent");
  if (ctx.set.dim() != ctx.params.dim) throw ConfigError("decision set dimension mismatch");
  const bool gossip = algorithm == Algorithm::kDlucb || algorithm == Algorithm::kDlts ||
                      algorithm == Algorithm::kSafeDlucb || algorithm == Algorithm::kRcDlucb;
  if (gossip && (!ctx.comm || ctx.comm->size() != ctx.params.agents)) {
    throw ConfigError("communication matrix missing or of the wrong size");
  }
  switch (algorithm) {
    case Algorithm::kSafeDlucb:
      if (ctx.set.is_box()) {
        throw ConfigError("safe_dlucb requires a finite decision set");
      }
      if (!ctx.safe) throw ConfigError("safe_dlucb requires a safe geometry");
      if (!ctx.set.find(ctx.safe->x0())) {
        throw ConfigError("the safe action x0 is not part of the decision set");
      }
      [[fallthrough]];
    case Algorithm::kDlucb:
    case Algorithm::kDlts:
      return std::make_unique<GossipTeam>(algorithm, ctx);
    case Algorithm::kRcDlucb:
      return std::make_unique<RcTeam>(ctx);
    case Algorithm::kNoComm:
      return std::make_unique<NoCommTeam>(ctx);
    case Algorithm::kCentralized:
      return std::make_unique<CentralizedTeam>(ctx);
  }
  throw ConfigError("unsupported algorithm");
}

}  // namespace dlbandit
