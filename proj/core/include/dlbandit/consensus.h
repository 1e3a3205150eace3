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

#ifndef DLBANDIT_CONSENSUS_H_
#define DLBANDIT_CONSENSUS_H_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dlbandit/errors.h"
#include "dlbandit/graph.h"

namespace dlbandit {

// w_ℓ = T_ℓ(1/|λ₂|) for ℓ = 0..S, via the three-term recursion.
std::vector<double> chebyshev_weights(int rounds, double lambda2_abs);

// Parameters of the accelerated gossip: ε, horizon S and recursion weights.
struct MixingPlan {
  double epsilon = 0.0;
  int rounds = 1;  // S
  double lambda2_abs = 0.0;
  // Empty when |λ₂| is (numerically) zero: a single multiplication by P.
  std::vector<double> weights;

  bool exact_averaging() const { return weights.empty(); }
};

MixingPlan make_mixing_plan(const CommMatrix& p, double epsilon,
                            MixingRounding rounding = MixingRounding::kCeil);

// Coefficients of one accelerated step ℓ: next = a·P·now − b·prev.
struct StepCoefficients {
  double scale_now = 1.0;
  double scale_prev = 0.0;
};

StepCoefficients step_coefficients(int ell, const MixingPlan& plan);

// One accelerated gossip step for agent `i`. `read_now(j)` is only ever
// invoked for j == i or j a neighbour of i.
template <typename Reader>
Eigen::MatrixXd comm_step_agent(std::size_t i, Reader&& read_now,
                                const Eigen::MatrixXd& prev_i, int ell,
                                const CommMatrix& p, const MixingPlan& plan) {
  if (ell < 1 || ell > plan.rounds) {
    throw DomainError("comm_step: round index out of range");
  }
  const auto& w = p.entries();
  const auto ii = static_cast<Eigen::Index>(i);
  const Eigen::MatrixXd& own = read_now(i);
  Eigen::MatrixXd mixed = w(ii, ii) * own;
  for (std::size_t j : p.topology().neighbors(i)) {
    const Eigen::MatrixXd& other = read_now(j);
    if (other.rows() != own.rows() || other.cols() != own.cols()) {
      throw DomainError("comm_step: payload shape mismatch");
    }
    mixed.noalias() += w(ii, static_cast<Eigen::Index>(j)) * other;
  }
  const StepCoefficients c = step_coefficients(ell, plan);
  if (c.scale_prev == 0.0) return c.scale_now * mixed;
  if (prev_i.rows() != own.rows() || prev_i.cols() != own.cols()) {
    throw DomainError("comm_step: previous payload shape mismatch");
  }
  return c.scale_now * mixed - c.scale_prev * prev_i;
}

// Network-wide step: every agent reads the frozen `now` set and its own
// `prev`, producing the next estimates.
std::vector<Eigen::MatrixXd> comm_step(std::span<const Eigen::MatrixXd> now,
                                       std::span<const Eigen::MatrixXd> prev,
                                       int ell, const CommMatrix& p,
                                       const MixingPlan& plan);

// a[i][j] = N·[q_S(P)]_{ij}, computed by running comm_step on basis vectors.
Eigen::MatrixXd mixed_gain(const CommMatrix& p, const MixingPlan& plan);

// Column layout of a queue payload: [actions (d) | reward (1) | safety (0/1)].
struct SlotLayout {
  std::size_t agents = 0;
  std::size_t dim = 0;
  bool safety = false;

  Eigen::Index cols() const {
    return static_cast<Eigen::Index>(dim + 1 + (safety ? 1 : 0));
  }
  std::size_t scalars() const { return agents * static_cast<std::size_t>(cols()); }
};

struct ConsensusSlot {
  int source_round = 0;
  int rounds_mixed = 0;
  Eigen::MatrixXd now;   // N × layout.cols()
  Eigen::MatrixXd prev;  // value one mixing step earlier
};

// Fully mixed estimates handed back by dequeue_mixed. Row k of `actions`
// estimates (a_{i,k}/N)·x_k.
struct MixedPayload {
  int source_round = 0;
  Eigen::MatrixXd actions;
  Eigen::VectorXd rewards;
  std::optional<Eigen::VectorXd> safety;
};

// Per-agent FIFO of at most S in-flight slots, oldest first.
class ConsensusQueue {
 public:
  ConsensusQueue(SlotLayout layout, int capacity);

  const SlotLayout& layout() const { return layout_; }
  int capacity() const { return capacity_; }
  std::size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }
  const ConsensusSlot& slot(std::size_t pos) const { return slots_.at(pos); }
  ConsensusSlot& slot(std::size_t pos) { return slots_.at(pos); }

  // Appends the agent's own observation of round `t` (all other rows zero).
  void enqueue_round(int t, std::size_t agent_index,
                     const Eigen::VectorXd& own_action, double own_reward,
                     std::optional<double> own_safety);

  bool front_ready() const {
    return !slots_.empty() && slots_.front().rounds_mixed == capacity_;
  }
  MixedPayload dequeue_mixed();

 private:
  SlotLayout layout_;
  int capacity_;
  std::deque<ConsensusSlot> slots_;
};

// Advances every in-flight slot of every agent by one accelerated gossip step.
// All queues must be aligned (same source rounds and mixing counters).
// Returns the number of scalars sent over all directed edges.
std::uint64_t advance_queues(std::span<ConsensusQueue* const> queues,
                             const CommMatrix& p, const MixingPlan& plan);

}  // namespace dlbandit

#endif  // DLBANDIT_CONSENSUS_H_
