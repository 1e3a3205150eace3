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

#ifndef DLBANDIT_AGENTS_H_
#define DLBANDIT_AGENTS_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dlbandit/bandit_core.h"
#include "dlbandit/consensus.h"
#include "dlbandit/graph.h"
#include "dlbandit/rng.h"

namespace dlbandit {

enum class Algorithm { kDlucb, kRcDlucb, kSafeDlucb, kDlts, kNoComm, kCentralized };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

// Quantities every learner needs to evaluate β_t.
struct LearningParams {
  std::size_t dim = 1;
  std::size_t agents = 1;
  double lambda = 1.0;
  double delta = 0.1;
  double sigma = 0.1;
  double epsilon = 0.05;

  double beta(int t) const {
    return beta_radius(t, dim, agents, lambda, delta, sigma, epsilon);
  }
};

inline NormFlavor flavor_for(const DecisionSet& set) {
  return set.is_box() ? NormFlavor::kEll1Scaled : NormFlavor::kEll2;
}

// DLUCB / DLTS agent. Rounds 1..S use own data only; from S+1 on the agent
// absorbs one fully mixed slot per round.
class DlucbAgent {
 public:
  DlucbAgent(std::size_t index, const LearningParams& params, const MixingPlan& plan,
             bool keep_warmup_data, bool safety_channel = false);
  virtual ~DlucbAgent() = default;

  std::size_t index() const { return index_; }
  int mixing_rounds() const { return plan_.rounds; }
  bool in_warmup(int t) const { return t <= plan_.rounds; }
  const SufficientStats& stats() const { return stats_; }
  ConsensusQueue& queue() { return queue_; }
  const ConsensusQueue& queue() const { return queue_; }

  // Start of round t: for t > S dequeue and absorb the slot of round t−S.
  void begin_round(int t);
  Selection choose_ucb(int t, const DecisionSet& set, double scale = 1.0) const;
  Selection choose_ts(int t, const DecisionSet& set, SplitMix64& rng) const;
  // Own observation of round t: warmup statistics, then enqueue.
  void end_round(int t, const Eigen::VectorXd& x, double y,
                 std::optional<double> z = std::nullopt);

 protected:
  virtual void reset_stats();
  virtual void absorb(const MixedPayload& slot);
  virtual void add_own(const Eigen::VectorXd& x, double y, std::optional<double> z);
  virtual std::optional<double> outgoing_safety(const Eigen::VectorXd& x,
                                                std::optional<double> z) const;

  const LearningParams& params() const { return params_; }
  double n_squared() const {
    return static_cast<double>(params_.agents) * static_cast<double>(params_.agents);
  }

 private:
  std::size_t index_;
  LearningParams params_;
  MixingPlan plan_;
  bool keep_warmup_data_;
  SufficientStats stats_;
  ConsensusQueue queue_;
};

struct SafeChoice {
  Selection selection;
  std::size_t survivors = 0;
  bool fallback = false;  // safe set was empty, x0 played
};

// Safe-DLUCB: additionally tracks A^⊥, r^⊥ and mixes the shifted safety
// feedback z^⊥ through the third queue channel.
class SafeDlucbAgent : public DlucbAgent {
 public:
  SafeDlucbAgent(std::size_t index, const LearningParams& params, const MixingPlan& plan,
                 bool keep_warmup_data, SafeGeometry geometry);

  const SafeGeometry& geometry() const { return geo_; }
  const OrthoStats& ortho() const { return ortho_; }
  // Finite sets only. Survivors of the safe filter, then κ_r-scaled UCB.
  SafeChoice choose_safe(int t, const DecisionSet& set) const;
  // z^⊥ = z − (⟨x,x̃0⟩/‖x0‖)·c0.
  double shifted_feedback(const Eigen::VectorXd& x, double z) const;

 protected:
  void reset_stats() override;
  void absorb(const MixedPayload& slot) override;
  void add_own(const Eigen::VectorXd& x, double y, std::optional<double> z) override;
  std::optional<double> outgoing_safety(const Eigen::VectorXd& x,
                                        std::optional<double> z) const override;

 private:
  SafeGeometry geo_;
  OrthoStats ortho_;
};

// RC-DLUCB agent. A = λI + W_syn + W_new throughout.
class RcDlucbAgent {
 public:
  RcDlucbAgent(std::size_t index, const LearningParams& params, double threshold);

  std::size_t index() const { return index_; }
  const SufficientStats& stats() const { return stats_; }
  const Eigen::MatrixXd& w_syn() const { return w_syn_; }
  const Eigen::MatrixXd& w_new() const { return w_new_; }
  const Eigen::VectorXd& v_syn() const { return v_syn_; }
  const Eigen::VectorXd& v_new() const { return v_new_; }
  int epoch_start() const { return epoch_start_; }
  double threshold() const { return threshold_; }
  bool in_phase() const { return in_phase_; }
  const Eigen::VectorXd& frozen_action() const { return frozen_; }

  Selection choose(int t, const DecisionSet& set) const;
  // Outside a phase: W_new += xxᵀ, v_new += yx. Returns whether the
  // log-determinant trigger fires for round t.
  bool record(int t, const Eigen::VectorXd& x, double y);
  // d × (d+1) payload [W_new | v_new] shared during a phase.
  Eigen::MatrixXd payload() const;
  void start_phase(const Eigen::VectorXd& frozen_action);
  void record_frozen(double y);
  // Ends the phase at round t_k with the S-step mixed payload.
  void finish_phase(int t_k, const Eigen::MatrixXd& mixed, int rounds);

 private:
  void refresh();

  std::size_t index_;
  LearningParams params_;
  double threshold_;
  SufficientStats stats_;
  Eigen::MatrixXd w_syn_, w_new_;
  Eigen::VectorXd v_syn_, v_new_;
  int epoch_start_ = 0;
  double epoch_log_det_ = 0.0;
  bool in_phase_ = false;
  Eigen::VectorXd frozen_;
  double frozen_rewards_ = 0.0;
};

// Everything a team of agents needs besides the environment.
struct TeamContext {
  LearningParams params;
  std::shared_ptr<const CommMatrix> comm;  // unused by the baselines
  MixingPlan plan;
  DecisionSet set = DecisionSet::box(1);
  bool keep_warmup_data = false;
  std::optional<SafeGeometry> safe;
  int horizon = 0;
  std::optional<double> rc_threshold;  // defaults to rc_threshold(d, N, T, λ)
  std::uint64_t seed = 0;              // Thompson perturbations
};

struct RoundOutput {
  std::uint64_t scalars = 0;  // sent over all directed edges this round
  int phase_id = 0;           // RC communication phase in progress, 0 if none
  std::size_t empty_safe_sets = 0;
};

// A network of agents advanced in lock-step: act() for all agents, then the
// environment answers, then observe() runs the round's communication.
class Team {
 public:
  virtual ~Team() = default;
  virtual std::size_t size() const = 0;
  virtual std::vector<Eigen::VectorXd> act(int t) = 0;
  virtual RoundOutput observe(int t, const std::vector<Eigen::VectorXd>& actions,
                              const Eigen::VectorXd& rewards,
                              const std::optional<Eigen::VectorXd>& safety) = 0;
  // Statistics agent i uses to act in the current round.
  virtual const SufficientStats& agent_stats(std::size_t i) const = 0;
  virtual int phase_count() const { return 0; }
};

std::unique_ptr<Team> make_team(Algorithm algorithm, const TeamContext& context);

}  // namespace dlbandit

#endif  // DLBANDIT_AGENTS_H_
