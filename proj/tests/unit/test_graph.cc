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
#include <numbers>
#include <vector>

#include "dlbandit/errors.h"
#include "dlbandit/graph.h"
#include "oracles.h"

namespace dlbandit {
namespace {

GraphTopology make(TopologyKind kind, std::size_t n, std::optional<double> p = std::nullopt,
                   std::uint64_t seed = 0) {
  SplitMix64 rng(seed);
  return build_topology(kind, n, p, rng);
}

std::vector<std::vector<bool>> adjacency_of(const GraphTopology& g) {
  std::vector<std::vector<bool>> a(g.size(), std::vector<bool>(g.size(), false));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) a[i][j] = g.adjacent(i, j);
  return a;
}

TEST(Topology, RingFour) {
  const auto g = make(TopologyKind::kRing, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(g.degree(i), 2u);
    EXPECT_TRUE(g.adjacent(i, (i + 1) % 4));
    EXPECT_TRUE(g.adjacent(i, (i + 3) % 4));
    EXPECT_FALSE(g.adjacent(i, (i + 2) % 4));
  }
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_TRUE(g.is_regular());
}

TEST(Topology, StarTwenty) {
  const auto g = make(TopologyKind::kStar, 20);
  std::size_t hubs = 0, leaves = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    if (g.degree(i) == 19) ++hubs;
    if (g.degree(i) == 1) ++leaves;
  }
  EXPECT_EQ(hubs, 1u);
  EXPECT_EQ(leaves, 19u);
  EXPECT_EQ(g.max_degree(), 19u);
}

TEST(Topology, CompleteAndPath) {
  const auto c = make(TopologyKind::kComplete, 6);
  EXPECT_EQ(c.edge_count(), 15u);
  const auto p = make(TopologyKind::kPath, 5);
  EXPECT_EQ(p.edge_count(), 4u);
  EXPECT_EQ(p.degree(0), 1u);
  EXPECT_EQ(p.degree(2), 2u);
}

TEST(Topology, ErdosRenyiConnectedByBfs) {
  const auto g = make(TopologyKind::kErdosRenyi, 6, 0.5, 7);
  EXPECT_TRUE(oracle::bfs_connected(adjacency_of(g)));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto h = make(TopologyKind::kErdosRenyi, 12, 0.25, seed);
    EXPECT_TRUE(oracle::bfs_connected(adjacency_of(h)));
  }
}

TEST(Topology, ErdosRenyiDeterministic) {
  const auto a = make(TopologyKind::kErdosRenyi, 10, 0.4, 3);
  const auto b = make(TopologyKind::kErdosRenyi, 10, 0.4, 3);
  EXPECT_EQ(adjacency_of(a), adjacency_of(b));
}

TEST(Topology, Rejections) {
  EXPECT_THROW(make(TopologyKind::kRing, 2), GraphError);
  EXPECT_THROW(make(TopologyKind::kPath, 1), GraphError);
  EXPECT_THROW(make(TopologyKind::kErdosRenyi, 5, 0.0), DomainError);
  EXPECT_THROW(make(TopologyKind::kErdosRenyi, 30, 1e-6), GraphError);
  EXPECT_THROW(make(TopologyKind::kExplicit, 3), GraphError);
  std::vector<std::vector<bool>> split(4, std::vector<bool>(4, false));
  split[0][1] = split[1][0] = true;
  split[2][3] = split[3][2] = true;
  EXPECT_THROW(GraphTopology(TopologyKind::kExplicit, split), GraphError);
  auto asym = split;
  asym[1][2] = true;
  EXPECT_THROW(GraphTopology(TopologyKind::kExplicit, asym), GraphError);
}

TEST(Topology, KindNames) {
  EXPECT_EQ(parse_topology_kind("erdos_renyi"), TopologyKind::kErdosRenyi);
  EXPECT_EQ(parse_topology_kind("random"), TopologyKind::kErdosRenyi);
  EXPECT_EQ(to_string(parse_topology_kind("star")), "star");
  EXPECT_THROW(parse_topology_kind("torus"), DomainError);
}

TEST(EdgeList, ParsesCommentsAndBlanks) {
  const auto g = parse_edge_list("# triangle plus tail\n0 1\n\n1 2\n2 0\n2 3\n");
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_EQ(g.kind(), TopologyKind::kExplicit);
  EXPECT_EQ(g.degree(2), 3u);
}

TEST(EdgeList, Rejections) {
  EXPECT_THROW(parse_edge_list(""), GraphError);
  EXPECT_THROW(parse_edge_list("0 x\n"), GraphError);
  EXPECT_THROW(parse_edge_list("0 1\n2 3\n"), GraphError);  // disconnected
  EXPECT_THROW(parse_edge_list("0 5\n", 3), GraphError);
  EXPECT_THROW(load_edge_list("/nonexistent/edges.txt"), GraphError);
}

TEST(CommMatrix, RingFourLaplacian) {
  const auto p = build_comm_matrix(make(TopologyKind::kRing, 4));
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(p.entries()(i, i), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(p.entries()(i, (i + 1) % 4), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(p.entries()(i, (i + 2) % 4), 0.0);
  }
  const auto ev = oracle::jacobi_eigenvalues(p.entries());
  EXPECT_NEAR(ev[0], -1.0 / 3.0, 1e-12);
  EXPECT_NEAR(ev[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(ev[2], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(ev[3], 1.0, 1e-12);
  EXPECT_NEAR(p.lambda2_abs(), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(spectral_gap(p), 1.0 / 3.0, 1e-12);
}

TEST(CommMatrix, CompleteTwentyAverages) {
  const auto p = build_comm_matrix(make(TopologyKind::kComplete, 20));
  EXPECT_TRUE(p.entries().isApprox(Eigen::MatrixXd::Constant(20, 20, 1.0 / 20.0), 1e-14));
  EXPECT_NEAR(p.lambda2_abs(), 0.0, 1e-12);
}

TEST(CommMatrix, RingClosedFormSpectrum) {
  // Cycle Laplacian eigenvalues are 2 − 2cos(2πk/N); the leading non-trivial
  // magnitude of I − L/(δ+1) follows directly.
  const double n = 20.0;
  const double l1 = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi / n);
  const auto g = make(TopologyKind::kRing, 20);
  const auto lap = build_comm_matrix(g, CommScheme::kLaplacian);
  EXPECT_NEAR(lap.lambda2_abs(), std::max(1.0 - l1 / 3.0, std::abs(1.0 - 4.0 / 3.0)), 1e-12);
  EXPECT_NEAR(lap.lambda2_abs(), 0.9674, 5e-4);
  // Normalized form on a 2-regular graph is I − L/(2·3).
  const auto nrm = build_comm_matrix(g, CommScheme::kNormalizedLaplacian);
  EXPECT_NEAR(nrm.lambda2_abs(), 1.0 - l1 / 6.0, 1e-12);
}

TEST(CommMatrix, StarLaplacian) {
  const auto p = build_comm_matrix(make(TopologyKind::kStar, 20));
  // Star Laplacian spectrum {0, 1 (×18), 20}; P = I − L/20.
  EXPECT_NEAR(p.lambda2_abs(), 0.95, 1e-12);
}

TEST(CommMatrix, NormalizedRejectedOnIrregular) {
  EXPECT_THROW(build_comm_matrix(make(TopologyKind::kStar, 20), CommScheme::kNormalizedLaplacian),
               CommMatrixError);
  const auto path = make(TopologyKind::kPath, 3);
  const auto rep = check_assumption(path, comm_matrix_entries(path, CommScheme::kNormalizedLaplacian));
  EXPECT_FALSE(rep.ok);
  EXPECT_GT(rep.max_row_sum_deviation, 1e-3);
  EXPECT_FALSE(rep.diagnostic.empty());
}

TEST(CommMatrix, AssumptionPropertiesOnManyGraphs) {
  std::vector<GraphTopology> graphs;
  for (std::size_t n : {3u, 5u, 8u, 12u}) {
    graphs.push_back(make(TopologyKind::kRing, n));
    graphs.push_back(make(TopologyKind::kStar, n));
    graphs.push_back(make(TopologyKind::kPath, n));
    graphs.push_back(make(TopologyKind::kComplete, n));
  }
  for (std::uint64_t s = 0; s < 20; ++s) {
    graphs.push_back(make(TopologyKind::kErdosRenyi, 4 + s % 9, 0.4, 100 + s));
  }
  for (const auto& g : graphs) {
    const auto p = build_comm_matrix(g);
    const auto& w = p.entries();
    const Eigen::Index n = w.rows();
    EXPECT_LE((w * Eigen::VectorXd::Ones(n) - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((w - w.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && !g.adjacent(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
          EXPECT_EQ(w(i, j), 0.0);
    auto ev = oracle::jacobi_eigenvalues(w);
    const double dmax = static_cast<double>(g.max_degree());
    EXPECT_GE(ev.front(), (1.0 - dmax) / (1.0 + dmax) - 1e-12);
    // Library spectrum against the Jacobi oracle.
    std::vector<double> lib(p.eigenvalues().data(), p.eigenvalues().data() + n);
    std::sort(lib.begin(), lib.end());
    for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(lib[k], ev[k], 1e-8);
    EXPECT_NEAR(p.eigenvalues()(0), 1.0, 1e-12);
    double second = 0.0;
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) second = std::max(second, std::abs(ev[k]));
    EXPECT_NEAR(p.lambda2_abs(), second, 1e-8);
    EXPECT_LT(p.lambda2_abs(), 1.0);
  }
}

TEST(MixingRounds, PublishedHorizonsWithNearestRounding) {
  const double eps = 1.0 / 21.0;
  EXPECT_EQ(compute_mixing_rounds(20, eps, 0.9674, MixingRounding::kNearest), 26);
  EXPECT_EQ(compute_mixing_rounds(20, eps, 0.9500, MixingRounding::kNearest), 21);
  EXPECT_EQ(compute_mixing_rounds(20, eps, 0.0, MixingRounding::kNearest), 1);
  EXPECT_EQ(compute_mixing_rounds(20, eps, 0.0), 1);
}

TEST(MixingRounds, CeilMatchesFormula) {
  for (double lam : {0.1, 0.5, 0.9, 0.99}) {
    for (std::size_t n : {2u, 10u, 50u}) {
      const double raw = std::log(2.0 * static_cast<double>(n) / 0.1) /
                         std::sqrt(2.0 * std::log(1.0 / lam));
      EXPECT_EQ(compute_mixing_rounds(n, 0.1, lam), std::max(1, static_cast<int>(std::ceil(raw))));
    }
  }
}

TEST(MixingRounds, Monotone) {
  int prev = 0;
  for (double lam = 0.05; lam < 0.999; lam += 0.01) {
    const int s = compute_mixing_rounds(20, 0.1, lam);
    EXPECT_GE(s, prev);
    prev = s;
  }
  prev = 0;
  for (std::size_t n = 2; n < 200; ++n) {
    const int s = compute_mixing_rounds(n, 0.1, 0.8);
    EXPECT_GE(s, prev);
    prev = s;
  }
  prev = 0;
  for (double eps = 0.9; eps > 1e-4; eps *= 0.8) {
    const int s = compute_mixing_rounds(20, eps, 0.8);
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(MixingRounds, DomainErrors) {
  EXPECT_THROW(compute_mixing_rounds(10, 0.0, 0.5), DomainError);
  EXPECT_THROW(compute_mixing_rounds(10, 1.0, 0.5), DomainError);
  EXPECT_THROW(compute_mixing_rounds(10, 0.1, 1.0), DomainError);
}

}  // namespace
}  // namespace dlbandit
