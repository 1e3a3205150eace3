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

#include "dlbandit/consensus.h"

#include <cmath>
#include <string>

namespace dlbandit {

namespace {
constexpr double kZeroLambda2 = 1e-12;
}  // namespace

std::vector<double> chebyshev_weights(int rounds, double lambda2_abs) {
  if (rounds < 1) throw DomainError("chebyshev_weights: S must be >= 1");
  if (!(lambda2_abs > 0.0 && lambda2_abs < 1.0)) {
    throw DomainError("chebyshev_weights: |lambda_2| must lie in (0, 1)");
  }
  const double x = 1.0 / lambda2_abs;
  std::vector<double> w(static_cast<std::size_t>(rounds) + 1);
  w[0] = 1.0;
  w[1] = x;
  for (std::size_t l = 1; l + 1 < w.size(); ++l) {
    w[l + 1] = 2.0 * x * w[l] - w[l - 1];
  }
  return w;
}

MixingPlan make_mixing_plan(const CommMatrix& p, double epsilon,
                            MixingRounding rounding) {
  MixingPlan plan;
  plan.epsilon = epsilon;
  plan.lambda2_abs = p.lambda2_abs();
  plan.rounds = compute_mixing_rounds(p.size(), epsilon, p.lambda2_abs(), rounding);
  if (plan.lambda2_abs >= kZeroLambda2) {
    plan.weights = chebyshev_weights(plan.rounds, plan.lambda2_abs);
  } else {
    plan.rounds = 1;
  }
  return plan;
}

StepCoefficients step_coefficients(int ell, const MixingPlan& plan) {
  if (ell == 1 || plan.exact_averaging()) return {1.0, 0.0};
  const auto& w = plan.weights;
  const auto l = static_cast<std::size_t>(ell);
  return {2.0 * w[l - 1] / (plan.lambda2_abs * w[l]), w[l - 2] / w[l]};
}

std::vector<Eigen::MatrixXd> comm_step(std::span<const Eigen::MatrixXd> now,
                                       std::span<const Eigen::MatrixXd> prev,
                                       int ell, const CommMatrix& p,
                                       const MixingPlan& plan) {
  const std::size_t n = p.size();
  if (now.size() != n || prev.size() != n) {
    throw DomainError("comm_step: expected one payload per agent");
  }
  std::vector<Eigen::MatrixXd> next;
  next.reserve(n);
  const auto reader = [&](std::size_t j) -> const Eigen::MatrixXd& { return now[j]; };
  for (std::size_t i = 0; i < n; ++i) {
    next.push_back(comm_step_agent(i, reader, prev[i], ell, p, plan));
  }
  return next;
}

Eigen::MatrixXd mixed_gain(const CommMatrix& p, const MixingPlan& plan) {
  const std::size_t n = p.size();
  const auto nn = static_cast<Eigen::Index>(n);
  // Agent i holds row i of the identity: column j of the result is q_S(P)·e_j.
  std::vector<Eigen::MatrixXd> now(n), prev(n);
  for (std::size_t i = 0; i < n; ++i) {
    now[i] = Eigen::MatrixXd::Identity(nn, nn).row(static_cast<Eigen::Index>(i));
    prev[i] = Eigen::MatrixXd::Zero(1, nn);
  }
  for (int ell = 1; ell <= plan.rounds; ++ell) {
    auto next = comm_step(now, prev, ell, p, plan);
    prev = std::move(now);
    now = std::move(next);
  }
  Eigen::MatrixXd gain(nn, nn);
  for (std::size_t i = 0; i < n; ++i) gain.row(static_cast<Eigen::Index>(i)) = now[i];
  return static_cast<double>(n) * gain;
}

ConsensusQueue::ConsensusQueue(SlotLayout layout, int capacity)
    : layout_(layout), capacity_(capacity) {
  if (capacity < 1) throw DomainError("queue capacity must be >= 1");
}

void ConsensusQueue::enqueue_round(int t, std::size_t agent_index,
                                   const Eigen::VectorXd& own_action,
                                   double own_reward,
                                   std::optional<double> own_safety) {
  if (slots_.size() >= static_cast<std::size_t>(capacity_)) {
    throw InvariantViolation("consensus queue overflow at round " + std::to_string(t));
  }
  if (agent_index >= layout_.agents ||
      static_cast<std::size_t>(own_action.size()) != layout_.dim) {
    throw DomainError("enqueue_round: agent index or action dimension mismatch");
  }
  if (own_safety.has_value() != layout_.safety) {
    throw DomainError("enqueue_round: safety channel presence mismatch");
  }
  ConsensusSlot slot;
  slot.source_round = t;
  slot.now = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout_.agents),
                                   layout_.cols());
  slot.prev = slot.now;
  const auto row = static_cast<Eigen::Index>(agent_index);
  const auto d = static_cast<Eigen::Index>(layout_.dim);
  slot.now.block(row, 0, 1, d) = own_action.transpose();
  slot.now(row, d) = own_reward;
  if (own_safety) slot.now(row, d + 1) = *own_safety;
  slots_.push_back(std::move(slot));
}

MixedPayload ConsensusQueue::dequeue_mixed() {
  if (!front_ready()) {
    throw InvariantViolation("dequeue_mixed: oldest slot is not fully mixed");
  }
  ConsensusSlot slot = std::move(slots_.front());
  slots_.pop_front();
  const auto d = static_cast<Eigen::Index>(layout_.dim);
  MixedPayload out;
  out.source_round = slot.source_round;
  out.actions = slot.now.leftCols(d);
  out.rewards = slot.now.col(d);
  if (layout_.safety) out.safety = slot.now.col(d + 1);
  return out;
}

std::uint64_t advance_queues(std::span<ConsensusQueue* const> queues,
                             const CommMatrix& p, const MixingPlan& plan) {
  const std::size_t n = p.size();
  if (queues.size() != n) throw DomainError("advance_queues: one queue per agent");
  const std::size_t depth = queues.front()->size();
  for (const ConsensusQueue* q : queues) {
    if (q->size() != depth) {
      throw InvariantViolation("advance_queues: agents hold different queue lengths");
    }
  }
  std::uint64_t sent = 0;
  std::vector<Eigen::MatrixXd> now(n), prev(n);
  for (std::size_t pos = 0; pos < depth; ++pos) {
    const ConsensusSlot& ref = queues.front()->slot(pos);
    if (ref.rounds_mixed >= plan.rounds) continue;  // waiting to be dequeued
    for (std::size_t i = 0; i < n; ++i) {
      const ConsensusSlot& s = queues[i]->slot(pos);
      if (s.source_round != ref.source_round || s.rounds_mixed != ref.rounds_mixed) {
        throw InvariantViolation("advance_queues: misaligned slots");
      }
      now[i] = s.now;
      prev[i] = s.prev;
    }
    auto next = comm_step(now, prev, ref.rounds_mixed + 1, p, plan);
    for (std::size_t i = 0; i < n; ++i) {
      ConsensusSlot& s = queues[i]->slot(pos);
      s.prev = std::move(s.now);
      s.now = std::move(next[i]);
      ++s.rounds_mixed;
      sent += p.topology().degree(i) * static_cast<std::uint64_t>(s.now.size());
    }
  }
  return sent;
}

}  // namespace dlbandit
