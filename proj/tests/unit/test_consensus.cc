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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "dlbandit/consensus.h"
#include "dlbandit/errors.h"
#include "dlbandit/graph.h"
#include "oracles.h"

namespace dlbandit {
namespace {

CommMatrix comm(TopologyKind kind, std::size_t n, std::uint64_t seed = 0) {
  SplitMix64 rng(seed);
  std::optional<double> p;
  if (kind == TopologyKind::kErdosRenyi) p = 0.4;
  return build_comm_matrix(build_topology(kind, n, p, rng));
}

// q_S(P) = T_S(P/|λ₂|)/T_S(1/|λ₂|) through the matrix three-term recursion.
Eigen::MatrixXd q_oracle(const Eigen::MatrixXd& p, double lam, int s) {
  const Eigen::Index n = p.rows();
  if (lam < 1e-12) return p;
  const Eigen::MatrixXd x = p / lam;
  Eigen::MatrixXd t_prev = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd t_now = x;
  for (int k = 1; k < s; ++k) {
    Eigen::MatrixXd t_next = 2.0 * x * t_now - t_prev;
    t_prev = std::move(t_now);
    t_now = std::move(t_next);
  }
  return t_now / oracle::chebyshev_cosh(s, 1.0 / lam);
}

std::vector<Eigen::MatrixXd> run_steps(const std::vector<Eigen::MatrixXd>& start,
                                       const CommMatrix& p, const MixingPlan& plan) {
  std::vector<Eigen::MatrixXd> now = start, prev = start;
  for (int ell = 1; ell <= plan.rounds; ++ell) {
    auto next = comm_step(now, prev, ell, p, plan);
    prev = std::move(now);
    now = std::move(next);
  }
  return now;
}

std::vector<Eigen::MatrixXd> basis_payload(std::size_t n, std::size_t j) {
  std::vector<Eigen::MatrixXd> v(n, Eigen::MatrixXd::Zero(1, 1));
  v[j](0, 0) = 1.0;
  return v;
}

TEST(Chebyshev, HandRecursion) {
  const auto w = chebyshev_weights(3, 0.5);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 2.0);
  EXPECT_DOUBLE_EQ(w[2], 7.0);
  EXPECT_DOUBLE_EQ(w[3], 26.0);
}

TEST(Chebyshev, CoshClosedForm) {
  const auto w = chebyshev_weights(26, 0.9674);
  for (int ell = 0; ell <= 26; ++ell) {
    const double expect = oracle::chebyshev_cosh(ell, 1.0 / 0.9674);
    EXPECT_NEAR(w[static_cast<std::size_t>(ell)] / expect, 1.0, 1e-10) << ell;
  }
  for (std::size_t l = 1; l + 1 < w.size(); ++l) EXPECT_GT(w[l + 1], w[l]);
}

TEST(Chebyshev, Domain) {
  EXPECT_THROW(chebyshev_weights(3, 1.0), DomainError);
  EXPECT_THROW(chebyshev_weights(3, 0.0), DomainError);
  EXPECT_THROW(chebyshev_weights(0, 0.5), DomainError);
}

TEST(CommStep, ConstantsAreFixedPoints) {
  const auto p = comm(TopologyKind::kStar, 7);
  const auto plan = make_mixing_plan(p, 0.1);
  std::vector<Eigen::MatrixXd> v(7, Eigen::MatrixXd::Constant(2, 3, 2.5));
  std::vector<Eigen::MatrixXd> now = v, prev = v;
  for (int ell = 1; ell <= plan.rounds; ++ell) {
    auto next = comm_step(now, prev, ell, p, plan);
    for (const auto& m : next) EXPECT_TRUE(m.isApprox(v[0], 1e-12));
    prev = std::move(now);
    now = std::move(next);
  }
}

TEST(CommStep, PathFirstStepIsColumnOfP) {
  const auto p = comm(TopologyKind::kPath, 3);
  const auto plan = make_mixing_plan(p, 0.1);
  const auto v = basis_payload(3, 0);
  const auto next = comm_step(v, v, 1, p, plan);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_DOUBLE_EQ(next[i](0, 0), p.entries()(static_cast<Eigen::Index>(i), 0));
}

TEST(CommStep, RingFourReachesEpsilon) {
  const auto p = comm(TopologyKind::kRing, 4);
  const auto plan = make_mixing_plan(p, 0.1);
  const auto out = run_steps(basis_payload(4, 0), p, plan);
  double sq = 0.0;
  for (const auto& m : out) sq += std::pow(4.0 * m(0, 0) - 1.0, 2);
  EXPECT_LE(std::sqrt(sq), 0.1);
}

TEST(CommStep, RecursionMatchesMatrixPolynomial) {
  std::vector<CommMatrix> mats;
  for (std::size_t n : {3u, 6u, 9u, 12u}) {
    mats.push_back(comm(TopologyKind::kRing, n));
    mats.push_back(comm(TopologyKind::kStar, n));
    mats.push_back(comm(TopologyKind::kPath, n));
    mats.push_back(comm(TopologyKind::kErdosRenyi, n, n));
  }
  for (const auto& p : mats) {
    for (double eps : {0.3, 0.05}) {
      const auto plan = make_mixing_plan(p, eps);
      const auto gain = mixed_gain(p, plan);
      const auto q = q_oracle(p.entries(), p.lambda2_abs(), plan.rounds);
      const double n = static_cast<double>(p.size());
      EXPECT_LE((gain - n * q).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(CommStep, LocalityHarness) {
  const auto p = comm(TopologyKind::kPath, 6);
  const auto plan = make_mixing_plan(p, 0.1);
  std::vector<Eigen::MatrixXd> now(6, Eigen::MatrixXd::Ones(2, 2));
  for (std::size_t i = 0; i < 6; ++i) {
    const auto guarded = [&](std::size_t j) -> const Eigen::MatrixXd& {
      if (j != i && !p.topology().adjacent(i, j)) {
        ADD_FAILURE() << "agent " << i << " read non-neighbour " << j;
        throw std::logic_error("severed link");
      }
      return now[j];
    };
    for (int ell = 1; ell <= plan.rounds; ++ell) {
      EXPECT_NO_THROW(comm_step_agent(i, guarded, now[i], ell, p, plan));
    }
  }
}

TEST(CommStep, Errors) {
  const auto p = comm(TopologyKind::kRing, 4);
  const auto plan = make_mixing_plan(p, 0.1);
  std::vector<Eigen::MatrixXd> v(4, Eigen::MatrixXd::Zero(1, 2));
  EXPECT_THROW(comm_step(v, v, 0, p, plan), DomainError);
  EXPECT_THROW(comm_step(v, v, plan.rounds + 1, p, plan), DomainError);
  v[1] = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(comm_step(v, v, 1, p, plan), DomainError);
  std::vector<Eigen::MatrixXd> short_v(3, Eigen::MatrixXd::Zero(1, 2));
  EXPECT_THROW(comm_step(short_v, short_v, 1, p, plan), DomainError);
}

TEST(MixedGain, CompleteIsExact) {
  const auto p = comm(TopologyKind::kComplete, 8);
  const auto plan = make_mixing_plan(p, 0.1);
  EXPECT_EQ(plan.rounds, 1);
  EXPECT_TRUE(plan.exact_averaging());
  EXPECT_LE((mixed_gain(p, plan) - Eigen::MatrixXd::Ones(8, 8)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MixedGain, RingFourWithinEpsilonAndRowSums) {
  const auto p = comm(TopologyKind::kRing, 4);
  const auto plan = make_mixing_plan(p, 0.1);
  const auto a = mixed_gain(p, plan);
  EXPECT_LE((a.array() - 1.0).abs().maxCoeff(), 0.1);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(a.row(i).sum(), 4.0, 1e-12);
}

TEST(MixedGain, GuaranteeOnManyGraphs) {
  for (std::size_t n = 3; n <= 20; n += 1) {
    for (auto kind : {TopologyKind::kRing, TopologyKind::kStar, TopologyKind::kPath,
                      TopologyKind::kErdosRenyi}) {
      const auto p = comm(kind, n, 31 * n);
      for (double eps : {0.3, 0.1, 1.0 / 21.0}) {
        const auto plan = make_mixing_plan(p, eps);
        const auto a = mixed_gain(p, plan);
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
          EXPECT_LE((a.col(j).array() - 1.0).matrix().norm(), eps)
              << to_string(kind) << " n=" << n << " eps=" << eps;
        }
      }
    }
  }
}

TEST(Queue, EnqueueBuildsSparsePayload) {
  ConsensusQueue q(SlotLayout{3, 2, false}, 4);
  Eigen::VectorXd x(2);
  x << 0.3, -0.7;
  q.enqueue_round(1, 1, x, 0.25, std::nullopt);
  ASSERT_EQ(q.size(), 1u);
  const auto& s = q.slot(0);
  EXPECT_EQ(s.rounds_mixed, 0);
  EXPECT_EQ(s.now.rows(), 3);
  EXPECT_EQ(s.now.cols(), 3);
  EXPECT_EQ(s.now.row(0).norm(), 0.0);
  EXPECT_EQ(s.now.row(2).norm(), 0.0);
  EXPECT_DOUBLE_EQ(s.now(1, 0), 0.3);
  EXPECT_DOUBLE_EQ(s.now(1, 1), -0.7);
  EXPECT_DOUBLE_EQ(s.now(1, 2), 0.25);
  EXPECT_THROW(q.enqueue_round(2, 0, x, 0.0, 1.0), DomainError);
}

TEST(Queue, SafetyChannelLayout) {
  ConsensusQueue q(SlotLayout{2, 2, true}, 2);
  EXPECT_EQ(q.layout().cols(), 4);
  EXPECT_EQ(q.layout().scalars(), 8u);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
  EXPECT_THROW(q.enqueue_round(1, 0, x, 0.0, std::nullopt), DomainError);
  q.enqueue_round(1, 0, x, 0.0, 0.5);
  EXPECT_DOUBLE_EQ(q.slot(0).now(0, 3), 0.5);
}

TEST(Queue, OverflowAndEarlyDequeue) {
  ConsensusQueue q(SlotLayout{2, 1, false}, 2);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  q.enqueue_round(1, 0, x, 0.0, std::nullopt);
  EXPECT_THROW(q.dequeue_mixed(), InvariantViolation);
  q.enqueue_round(2, 0, x, 0.0, std::nullopt);
  EXPECT_THROW(q.enqueue_round(3, 0, x, 0.0, std::nullopt), InvariantViolation);
}

// Runs the full pipeline on a path of 3 agents and compares every dequeued row
// against the exact gains a = N·q_S(P).
TEST(Queue, PipelineAndPathDequeueOracle) {
  const auto p = comm(TopologyKind::kPath, 3);
  const auto plan = make_mixing_plan(p, 0.1);
  const int s = plan.rounds;
  const Eigen::MatrixXd gain = 3.0 * q_oracle(p.entries(), p.lambda2_abs(), s);
  std::vector<ConsensusQueue> queues(3, ConsensusQueue(SlotLayout{3, 2, false}, s));
  std::vector<ConsensusQueue*> ptrs;
  for (auto& q : queues) ptrs.push_back(&q);
  SplitMix64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int horizon = 10 + s;
  std::vector<std::vector<Eigen::VectorXd>> xs(static_cast<std::size_t>(horizon + 1));
  std::vector<std::vector<double>> ys(static_cast<std::size_t>(horizon + 1));
  int dequeued = 0;
  for (int t = 1; t <= horizon; ++t) {
    // Pipeline state at the start of round t.
    ASSERT_EQ(queues[0].size(), static_cast<std::size_t>(std::min(t - 1, s)));
    for (std::size_t pos = 0; pos < queues[0].size(); ++pos) {
      const auto& slot = queues[0].slot(pos);
      EXPECT_EQ(slot.rounds_mixed, t - slot.source_round);
    }
    if (t > s) {
      for (std::size_t i = 0; i < 3; ++i) {
        ASSERT_TRUE(queues[i].front_ready());
        const auto m = queues[i].dequeue_mixed();
        EXPECT_EQ(m.source_round, t - s);
        const auto& src = xs[static_cast<std::size_t>(t - s)];
        const auto& ysrc = ys[static_cast<std::size_t>(t - s)];
        for (Eigen::Index k = 0; k < 3; ++k) {
          const double a = gain(static_cast<Eigen::Index>(i), k);
          const Eigen::VectorXd expect = (a / 3.0) * src[static_cast<std::size_t>(k)];
          EXPECT_LE((m.actions.row(k).transpose() - expect).norm(), 1e-12);
          EXPECT_NEAR(m.rewards(k), a / 3.0 * ysrc[static_cast<std::size_t>(k)], 1e-12);
          // Row k is within ε (relative) of the true peer action scaled by 1/N.
          EXPECT_LE((3.0 * m.actions.row(k).transpose() - src[static_cast<std::size_t>(k)]).norm(),
                    plan.epsilon * src[static_cast<std::size_t>(k)].norm() + 1e-12);
        }
        ++dequeued;
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      Eigen::VectorXd x(2);
      x << u(rng), u(rng);
      xs[static_cast<std::size_t>(t)].push_back(x);
      ys[static_cast<std::size_t>(t)].push_back(u(rng));
      queues[i].enqueue_round(t, i, x, ys[static_cast<std::size_t>(t)].back(), std::nullopt);
    }
    const auto sent = advance_queues(ptrs, p, plan);
    // Each in-flight slot sends its N×(d+1) payload over every directed edge.
    const std::uint64_t slots = static_cast<std::uint64_t>(std::min(t, s));
    EXPECT_EQ(sent, slots * 2 * p.topology().edge_count() * 9);
  }
  EXPECT_EQ(dequeued, 30);
}

TEST(Queue, AdvanceRejectsMisalignment) {
  const auto p = comm(TopologyKind::kPath, 3);
  const auto plan = make_mixing_plan(p, 0.1);
  std::vector<ConsensusQueue> queues(3, ConsensusQueue(SlotLayout{3, 1, false}, plan.rounds));
  std::vector<ConsensusQueue*> ptrs;
  for (auto& q : queues) ptrs.push_back(&q);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  queues[0].enqueue_round(1, 0, x, 0.0, std::nullopt);
  EXPECT_THROW(advance_queues(ptrs, p, plan), InvariantViolation);
}

}  // namespace
}  // namespace dlbandit
