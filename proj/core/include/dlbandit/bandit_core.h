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

#ifndef DLBANDIT_BANDIT_CORE_H_
#define DLBANDIT_BANDIT_CORE_H_

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dlbandit/rng.h"

namespace dlbandit {

// Regularized Gram matrix A = λI + Σ x xᵀ and moment b = Σ y x.
struct SufficientStats {
  Eigen::MatrixXd gram;
  Eigen::VectorXd moment;
  double lambda = 1.0;

  SufficientStats() = default;
  SufficientStats(std::size_t dim, double lambda);

  std::size_t dim() const { return static_cast<std::size_t>(moment.size()); }
  void reset();
  void add(const Eigen::VectorXd& x, double y);
  // A += scale·XᵀX, b += scale·Xᵀy for a matrix of stacked rows.
  void add_rows(const Eigen::MatrixXd& rows, const Eigen::VectorXd& values,
                double scale);
  double log_det() const;
};

// θ̂ = A⁻¹b through a Cholesky factorization. Throws InvariantViolation when
// the Gram matrix is not positive definite.
Eigen::VectorXd rls_estimate(const SufficientStats& stats);

// Confidence radius β_t valid simultaneously for all agents and rounds.
double beta_radius(int t, std::size_t d, std::size_t n, double lambda,
                   double delta, double sigma, double epsilon);

enum class NormFlavor { kEll2, kEll1Scaled };

struct ConfidenceSet {
  Eigen::VectorXd center;
  double radius = 0.0;  // β_t, before any √d scaling
  Eigen::MatrixXd gram;
  NormFlavor flavor = NormFlavor::kEll2;

  // β_t for ℓ2, β_t·√d for the ℓ1 modification.
  double effective_radius() const;
};

ConfidenceSet make_confidence_set(const SufficientStats& stats, double beta,
                                  NormFlavor flavor);

class DecisionSet {
 public:
  static DecisionSet box(std::size_t dim);
  // Arms with norm above 1 are rescaled by the largest norm.
  static DecisionSet finite(std::vector<Eigen::VectorXd> arms);
  // K arms drawn uniformly on the unit sphere.
  static DecisionSet random_finite(std::size_t dim, std::size_t k, SplitMix64& rng);

  bool is_box() const { return arms_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::vector<Eigen::VectorXd>& arms() const { return arms_; }
  double max_norm() const;
  // Index of the arm equal to `x` (exact match), if any.
  std::optional<std::size_t> find(const Eigen::VectorXd& x) const;

 private:
  DecisionSet(std::size_t dim, std::vector<Eigen::VectorXd> arms)
      : dim_(dim), arms_(std::move(arms)) {}
  std::size_t dim_;
  std::vector<Eigen::VectorXd> arms_;
};

struct Selection {
  Eigen::VectorXd action;
  double value = 0.0;
  std::size_t index = 0;  // arm index (finite) or candidate index (box)
};

// argmax over arms of ⟨θ̂,x⟩ + κ·β·‖x‖_{A⁻¹}; ties go to the lowest index.
Selection ucb_select_finite(const std::vector<Eigen::VectorXd>& arms,
                            const ConfidenceSet& cs, double scale = 1.0);

// ℓ1 confidence set over [−1,1]^d: enumerates the 2d sign-vector candidates.
Selection ucb_select_box(std::size_t dim, const ConfidenceSet& cs,
                         double scale = 1.0);

Selection ucb_select(const DecisionSet& set, const ConfidenceSet& cs,
                     double scale = 1.0);

// Linear maximization of ⟨θ, x⟩ over the decision set.
Selection greedy_select(const DecisionSet& set, const Eigen::VectorXd& theta);

// Symmetric A^{-1/2} from the eigendecomposition.
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& gram);

// θ̃ = θ̂ + β·A^{-1/2}·ρ with ρ standard normal drawn from `rng`.
Eigen::VectorXd ts_perturb(const ConfidenceSet& cs, SplitMix64& rng);
Eigen::VectorXd ts_perturb(const ConfidenceSet& cs, const Eigen::VectorXd& rho);

// Safe action geometry. `x0` may be the zero vector (sentinel): then the
// projection onto x0 vanishes and the complement is the whole space.
class SafeGeometry {
 public:
  SafeGeometry(Eigen::VectorXd x0, double c0, double c);

  const Eigen::VectorXd& x0() const { return x0_; }
  double c0() const { return c0_; }
  double c() const { return c_; }
  bool sentinel() const { return sentinel_; }
  // x̃0, or the zero vector for the sentinel.
  const Eigen::VectorXd& x0_unit() const { return x0_unit_; }
  double kappa_r() const { return 2.0 / (c_ - c0_) + 1.0; }
  // d × (d−1) orthonormal basis of x̃0's complement (d × d for the sentinel).
  const Eigen::MatrixXd& complement_basis() const { return basis_; }
  // (⟨x, x̃0⟩/‖x0‖)·c0: the known part of ⟨μ*, x⟩.
  double known_constraint_part(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd x0_;
  double c0_;
  double c_;
  bool sentinel_;
  Eigen::VectorXd x0_unit_;
  Eigen::MatrixXd basis_;
};

// (x^o, x^⊥) with x^o the projection on x̃0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> project_components(
    const Eigen::VectorXd& x, const SafeGeometry& geo);

// A^⊥ = λ(I − x̃0x̃0ᵀ) + Σ x^⊥(x^⊥)ᵀ and r^⊥ = Σ z^⊥ x^⊥.
struct OrthoStats {
  Eigen::MatrixXd gram_perp;
  Eigen::VectorXd moment_perp;
  Eigen::MatrixXd complement_basis;
  double lambda = 1.0;

  OrthoStats() = default;
  OrthoStats(const SafeGeometry& geo, double lambda);

  void reset(const SafeGeometry& geo);
  void add(const Eigen::VectorXd& x_perp, double z_perp);
  void add_rows(const Eigen::MatrixXd& rows_perp, const Eigen::VectorXd& z_perp,
                double scale);
  // A^⊥ restricted to the complement basis: Uᵀ A^⊥ U.
  Eigen::MatrixXd restricted() const;
};

// μ̂^⊥ = U (Uᵀ A^⊥ U)⁻¹ Uᵀ r^⊥.
Eigen::VectorXd ortho_estimate(const OrthoStats& stats);

// ‖x^⊥‖ in the inverse of A^⊥ restricted to the complement subspace.
double ortho_norm(const Eigen::VectorXd& x_perp, const OrthoStats& stats);

// Left-hand side of the safe-set membership test for one arm.
double safe_test_value(const Eigen::VectorXd& x, const Eigen::VectorXd& mu_perp_hat,
                       const OrthoStats& stats, double beta, const SafeGeometry& geo);

// Indices of the arms passing the conservative membership test.
std::vector<std::size_t> safe_filter(const std::vector<Eigen::VectorXd>& arms,
                                     const Eigen::VectorXd& mu_perp_hat,
                                     const OrthoStats& stats, double beta,
                                     const SafeGeometry& geo);

enum class BoundVariant { kDlucb, kRcDlucb, kSafeDlucb };
enum class BoundForm { kTheorem, kGeneralEpsilon };

struct BoundParams {
  int rounds = 1;  // S
  std::size_t d = 1;
  std::size_t n = 1;
  int horizon = 0;  // T
  double lambda = 1.0;
  double delta = 0.1;
  double sigma = 0.1;
  double epsilon = 0.05;
  double kappa_r = 1.0;  // safe variant only
};

// Number of (agent, round) pairs exempt from the delay argument.
double delay_exemptions(const BoundParams& p);
// Log-determinant budget d·log(1 + NT/(dλ)).
double logdet_budget(const BoundParams& p);
// RC-DLUCB trigger threshold M = T·log(1+NT/(dλ))/(dN).
double rc_threshold(std::size_t d, std::size_t n, int horizon, double lambda);

// Closed-form regret bounds. kTheorem requires ε ≤ 1/(4d+1) (1/(2d+1) for
// RC-DLUCB) and throws DomainError otherwise; kGeneralEpsilon covers any
// ε in (0,1) for the DLUCB bound.
double theoretical_regret_bound(BoundVariant variant, const BoundParams& params,
                                BoundForm form = BoundForm::kTheorem);

}  // namespace dlbandit

#endif  // DLBANDIT_BANDIT_CORE_H_
