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

#ifndef DLBANDIT_GRAPH_H_
#define DLBANDIT_GRAPH_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dlbandit/rng.h"

namespace dlbandit {

enum class TopologyKind { kRing, kStar, kComplete, kPath, kErdosRenyi, kExplicit };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view name);

// Undirected, connected, simple graph over nodes 0..n-1.
class GraphTopology {
 public:
  // Validates symmetry, zero diagonal and connectivity; throws GraphError.
  GraphTopology(TopologyKind kind, std::vector<std::vector<bool>> adjacency);

  std::size_t size() const { return adjacency_.size(); }
  TopologyKind kind() const { return kind_; }
  bool adjacent(std::size_t i, std::size_t j) const { return adjacency_[i][j]; }
  const std::vector<std::size_t>& neighbors(std::size_t i) const {
    return neighbors_[i];
  }
  std::size_t degree(std::size_t i) const { return neighbors_[i].size(); }
  std::size_t max_degree() const;
  std::size_t edge_count() const;
  bool is_regular() const;

 private:
  TopologyKind kind_;
  std::vector<std::vector<bool>> adjacency_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

// Breadth-first reachability from node 0.
bool is_connected(const std::vector<std::vector<bool>>& adjacency);

inline constexpr int kErdosRenyiMaxRetries = 1000;

// `p` is required for kErdosRenyi and ignored otherwise. kExplicit is not
// buildable here; use load_edge_list.
GraphTopology build_topology(TopologyKind kind, std::size_t n,
                             std::optional<double> p, SplitMix64& rng);

// Plain-text edge list, one "u v" pair per line (0-indexed). Blank lines and
// lines starting with '#' are skipped. `n` defaults to 1 + the largest index.
GraphTopology parse_edge_list(std::string_view text,
                              std::optional<std::size_t> n = std::nullopt);
GraphTopology load_edge_list(const std::string& path,
                             std::optional<std::size_t> n = std::nullopt);

enum class CommScheme { kLaplacian, kNormalizedLaplacian };

std::string_view to_string(CommScheme scheme);
CommScheme parse_comm_scheme(std::string_view name);

inline constexpr double kAssumptionTolerance = 1e-9;

// Symmetric doubly stochastic gossip matrix with its cached spectrum.
class CommMatrix {
 public:
  const Eigen::MatrixXd& entries() const { return entries_; }
  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double lambda2_abs() const { return lambda2_abs_; }
  // Sorted by decreasing magnitude; the first entry is 1.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  CommScheme scheme() const { return scheme_; }
  const GraphTopology& topology() const { return topology_; }

 private:
  friend CommMatrix build_comm_matrix(const GraphTopology&, CommScheme);
  CommMatrix(GraphTopology topology, CommScheme scheme, Eigen::MatrixXd p,
             Eigen::VectorXd eigenvalues);

  GraphTopology topology_;
  CommScheme scheme_;
  Eigen::MatrixXd entries_;
  Eigen::VectorXd eigenvalues_;
  double lambda2_abs_;
};

// Raw matrix for a scheme, without any Assumption-1 validation.
Eigen::MatrixXd comm_matrix_entries(const GraphTopology& topology,
                                    CommScheme scheme);

// Result of checking a candidate matrix against the gossip requirements.
struct AssumptionReport {
  double max_row_sum_deviation = 0.0;
  double max_col_sum_deviation = 0.0;
  double symmetry_deviation = 0.0;
  double max_off_structure = 0.0;
  double lambda2_abs = 0.0;
  bool ok = false;
  std::string diagnostic;
};

AssumptionReport check_assumption(const GraphTopology& topology,
                                  const Eigen::MatrixXd& p);

// Throws CommMatrixError when the matrix violates the gossip requirements.
CommMatrix build_comm_matrix(const GraphTopology& topology,
                             CommScheme scheme = CommScheme::kLaplacian);

inline double spectral_gap(const CommMatrix& p) { return p.lambda2_abs(); }

// kCeil keeps the mixing guarantee; kNearest reproduces published horizons.
enum class MixingRounding { kCeil, kNearest };

// Number of accelerated gossip rounds S, floored at 1. |λ₂| = 0 gives 1.
int compute_mixing_rounds(std::size_t n, double epsilon, double lambda2_abs,
                          MixingRounding rounding = MixingRounding::kCeil);

}  // namespace dlbandit

#endif  // DLBANDIT_GRAPH_H_
