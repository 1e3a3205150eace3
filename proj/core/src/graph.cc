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

#include "dlbandit/graph.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "dlbandit/errors.h"

namespace dlbandit {
namespace {

using Adjacency = std::vector<std::vector<bool>>;

Adjacency empty_adjacency(std::size_t n) {
  return Adjacency(n, std::vector<bool>(n, false));
}

void connect(Adjacency& a, std::size_t u, std::size_t v) {
  a[u][v] = true;
  a[v][u] = true;
}

std::string describe(const char* what, double value) {
  std::ostringstream os;
  os << what << " = " << value;
  return os.str();
}

}  // namespace

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::kRing: return "ring";
    case TopologyKind::kStar: return "star";
    case TopologyKind::kComplete: return "complete";
    case TopologyKind::kPath: return "path";
    case TopologyKind::kErdosRenyi: return "erdos_renyi";
    case TopologyKind::kExplicit: return "explicit";
  }
  return "unknown";
}

TopologyKind parse_topology_kind(std::string_view name) {
  for (auto k : {TopologyKind::kRing, TopologyKind::kStar,
                 TopologyKind::kComplete, TopologyKind::kPath,
                 TopologyKind::kErdosRenyi, TopologyKind::kExplicit}) {
    if (to_string(k) == name) return k;
  }
  if (name == "random") return TopologyKind::kErdosRenyi;
  throw DomainError("unknown topology kind '" + std::string(name) + "'");
}

bool is_connected(const Adjacency& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) return false;
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v = 0; v < n; ++v) {
      if (adjacency[u][v] && !seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

GraphTopology::GraphTopology(TopologyKind kind, Adjacency adjacency)
    : kind_(kind), adjacency_(std::move(adjacency)) {
  const std::size_t n = adjacency_.size();
  if (n == 0) throw GraphError("graph must have at least one node");
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency_[i].size() != n) throw GraphError("adjacency is not square");
    if (adjacency_[i][i]) throw GraphError("self-loop at node " + std::to_string(i));
    for (std::size_t j = 0; j < i; ++j) {
      if (adjacency_[i][j] != adjacency_[j][i]) {
        throw GraphError("adjacency is not symmetric");
      }
    }
  }
  if (!is_connected(adjacency_)) throw GraphError("graph is not connected");
  neighbors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency_[i][j]) neighbors_[i].push_back(j);
    }
  }
}

std::size_t GraphTopology::max_degree() const {
  std::size_t m = 0;
  for (const auto& nb : neighbors_) m = std::max(m, nb.size());
  return m;
}

std::size_t GraphTopology::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : neighbors_) twice += nb.size();
  return twice / 2;
}

bool GraphTopology::is_regular() const {
  return std::all_of(neighbors_.begin(), neighbors_.end(), [&](const auto& nb) {
    return nb.size() == neighbors_.front().size();
  });
}

GraphTopology build_topology(TopologyKind kind, std::size_t n,
                             std::optional<double> p, SplitMix64& rng) {
  const auto too_small = [&](std::size_t min_n) {
    if (n < min_n) {
      throw GraphError(std::string(to_string(kind)) + " needs n >= " +
                       std::to_string(min_n) + ", got " + std::to_string(n));
    }
  };
  Adjacency a;
  switch (kind) {
    case TopologyKind::kRing:
      too_small(3);
      a = empty_adjacency(n);
      for (std::size_t i = 0; i < n; ++i) connect(a, i, (i + 1) % n);
      break;
    case TopologyKind::kStar:
      too_small(2);
      a = empty_adjacency(n);
      for (std::size_t i = 1; i < n; ++i) connect(a, 0, i);
      break;
    case TopologyKind::kComplete:
      too_small(1);
      a = empty_adjacency(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) connect(a, i, j);
      break;
    case TopologyKind::kPath:
      too_small(2);
      a = empty_adjacency(n);
      for (std::size_t i = 0; i + 1 < n; ++i) connect(a, i, i + 1);
      break;
    case TopologyKind::kErdosRenyi: {
      too_small(2);
      if (!p || !(*p > 0.0 && *p <= 1.0)) {
        throw DomainError("erdos_renyi requires p in (0, 1]");
      }
      std::bernoulli_distribution coin(*p);
      for (int attempt = 0; attempt < kErdosRenyiMaxRetries; ++attempt) {
        a = empty_adjacency(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j)
            if (coin(rng)) connect(a, i, j);
        if (is_connected(a)) return GraphTopology(kind, std::move(a));
      }
      throw GraphError("erdos_renyi: no connected sample within " +
                       std::to_string(kErdosRenyiMaxRetries) +
                       " retries (graph too sparse)");
    }
    case TopologyKind::kExplicit:
      throw GraphError("explicit topologies are loaded from an edge list");
  }
  return GraphTopology(kind, std::move(a));
}

GraphTopology parse_edge_list(std::string_view text,
                              std::optional<std::size_t> n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t max_index = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long u = -1, v = -1;
    std::string extra;
    if (!(fields >> u >> v) || (fields >> extra) || u < 0 || v < 0) {
      throw GraphError("edge list line " + std::to_string(line_no) +
                       ": expected 'u v' with non-negative indices");
    }
    if (u == v) {
      throw GraphError("edge list line " + std::to_string(line_no) +
                       ": self-loop");
    }
    edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    max_index = std::max({max_index, edges.back().first, edges.back().second});
  }
  if (edges.empty() && !n) throw GraphError("edge list is empty");
  const std::size_t size = n.value_or(max_index + 1);
  if (!edges.empty() && max_index >= size) {
    throw GraphError("edge list references node beyond n");
  }
  Adjacency a = empty_adjacency(size);
  for (auto [u, v] : edges) connect(a, u, v);
  return GraphTopology(TopologyKind::kExplicit, std::move(a));
}

GraphTopology load_edge_list(const std::string& path,
                             std::optional<std::size_t> n) {
  std::ifstream file(path);
  if (!file) throw GraphError("cannot open edge list '" + path + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_edge_list(buffer.str(), n);
}

std::string_view to_string(CommScheme scheme) {
  switch (scheme) {
    case CommScheme::kLaplacian: return "laplacian";
    case CommScheme::kNormalizedLaplacian: return "normalized_laplacian";
  }
  return "unknown";
}

CommScheme parse_comm_scheme(std::string_view name) {
  if (name == "laplacian") return CommScheme::kLaplacian;
  if (name == "normalized_laplacian") return CommScheme::kNormalizedLaplacian;
  throw DomainError("unknown communication scheme '" + std::string(name) + "'");
}

Eigen::MatrixXd comm_matrix_entries(const GraphTopology& topology,
                                    CommScheme scheme) {
  const auto n = static_cast<Eigen::Index>(topology.size());
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    laplacian(i, i) = static_cast<double>(topology.degree(ui));
    for (std::size_t j : topology.neighbors(ui)) {
      laplacian(i, static_cast<Eigen::Index>(j)) = -1.0;
    }
  }
  const double step = 1.0 / (static_cast<double>(topology.max_degree()) + 1.0);
  if (scheme == CommScheme::kNormalizedLaplacian) {
    Eigen::VectorXd inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double deg = laplacian(i, i);
      inv_sqrt_deg(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
    }
    laplacian = inv_sqrt_deg.asDiagonal() * laplacian * inv_sqrt_deg.asDiagonal();
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n) - step * laplacian;
  // Structural zeros stay exactly zero.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && !topology.adjacent(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j)))
        p(i, j) = 0.0;
  return p;
}

namespace {

Eigen::VectorXd sorted_by_magnitude(const Eigen::VectorXd& values) {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::stable_sort(v.begin(), v.end(), [](double a, double b) {
    return std::abs(a) > std::abs(b);
  });
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

AssumptionReport check_assumption(const GraphTopology& topology,
                                  const Eigen::MatrixXd& p) {
  AssumptionReport r;
  const auto n = p.rows();
  r.max_row_sum_deviation = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
  r.max_col_sum_deviation = (p.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.symmetry_deviation = (p - p.transpose()).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && !topology.adjacent(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j)))
        r.max_off_structure = std::max(r.max_off_structure, std::abs(p(i, j)));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (p + p.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    r.diagnostic = "eigen-solver did not converge";
    return r;
  }
  Eigen::VectorXd ev = sorted_by_magnitude(solver.eigenvalues());
  r.lambda2_abs = ev.size() > 1 ? std::abs(ev(1)) : 0.0;

  std::ostringstream diag;
  if (r.max_row_sum_deviation > kAssumptionTolerance)
    diag << describe("row sums deviate from 1 by", r.max_row_sum_deviation) << "; ";
  if (r.max_col_sum_deviation > kAssumptionTolerance)
    diag << describe("column sums deviate from 1 by", r.max_col_sum_deviation) << "; ";
  if (r.symmetry_deviation > 1e-12)
    diag << describe("asymmetry", r.symmetry_deviation) << "; ";
  if (r.max_off_structure != 0.0)
    diag << describe("non-zero entry between non-adjacent nodes", r.max_off_structure)
         << "; ";
  if (std::abs(std::abs(ev(0)) - 1.0) > kAssumptionTolerance)
    diag << describe("leading eigenvalue magnitude", std::abs(ev(0))) << "; ";
  if (r.lambda2_abs >= 1.0 - kAssumptionTolerance)
    diag << describe("|lambda_2|", r.lambda2_abs) << " is not < 1; ";
  r.diagnostic = diag.str();
  r.ok = r.diagnostic.empty();
  return r;
}

CommMatrix::CommMatrix(GraphTopology topology, CommScheme scheme,
                       Eigen::MatrixXd p, Eigen::VectorXd eigenvalues)
    : topology_(std::move(topology)),
      scheme_(scheme),
      entries_(std::move(p)),
      eigenvalues_(std::move(eigenvalues)),
      lambda2_abs_(eigenvalues_.size() > 1 ? std::abs(eigenvalues_(1)) : 0.0) {}

CommMatrix build_comm_matrix(const GraphTopology& topology, CommScheme scheme) {
  Eigen::MatrixXd p = comm_matrix_entries(topology, scheme);
  AssumptionReport report = check_assumption(topology, p);
  if (!report.ok) {
    throw CommMatrixError("communication matrix (" + std::string(to_string(scheme)) +
                          ") violates the gossip requirements: " + report.diagnostic);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(p, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw CommMatrixError("eigen-solver did not converge");
  }
  return CommMatrix(topology, scheme, std::move(p),
                    sorted_by_magnitude(solver.eigenvalues()));
}

int compute_mixing_rounds(std::size_t n, double epsilon, double lambda2_abs,
                          MixingRounding rounding) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("epsilon must lie in (0, 1)");
  }
  if (!(lambda2_abs >= 0.0 && lambda2_abs < 1.0)) {
    throw DomainError("|lambda_2| must lie in [0, 1)");
  }
  // Below this magnitude one multiplication by P averages to machine precision.
  if (lambda2_abs < 1e-12) return 1;
  const double raw = std::log(2.0 * static_cast<double>(n) / epsilon) /
                     std::sqrt(2.0 * std::log(1.0 / lambda2_abs));
  const double rounded =
      rounding == MixingRounding::kCeil ? std::ceil(raw) : std::round(raw);
  return std::max(1, static_cast<int>(rounded));
}

}  // namespace dlbandit
