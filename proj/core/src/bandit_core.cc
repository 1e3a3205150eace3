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

#include "dlbandit/bandit_core.h"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dlbandit/errors.h"

namespace dlbandit {

SufficientStats::SufficientStats(std::size_t dim, double lambda_)
    : gram(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                     static_cast<Eigen::Index>(dim)) * lambda_),
      moment(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      lambda(lambda_) {}

void SufficientStats::reset() {
  gram.setIdentity();
  gram *= lambda;
  moment.setZero();
}

void SufficientStats::add(const Eigen::VectorXd& x, double y) {
  gram.noalias() += x * x.transpose();
  moment.noalias() += y * x;
}

void SufficientStats::add_rows(const Eigen::MatrixXd& rows,
                               const Eigen::VectorXd& values, double scale) {
  gram.noalias() += scale * (rows.transpose() * rows);
  moment.noalias() += scale * (rows.transpose() * values);
}

double SufficientStats::log_det() const {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw InvariantViolation("log_det: Gram matrix is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::VectorXd rls_estimate(const SufficientStats& stats) {
  Eigen::LLT<Eigen::MatrixXd> llt(stats.gram);
  if (llt.info() != Eigen::Success) {
    throw InvariantViolation("rls_estimate: Gram matrix is not positive definite");
  }
  return llt.solve(stats.moment);
}

double beta_radius(int t, std::size_t d, std::size_t n, double lambda,
                   double delta, double sigma, double epsilon) {
  if (t < 1) throw DomainError("beta_radius: t must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("beta_radius: delta must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("beta_radius: epsilon must lie in (0, 1)");
  }
  if (!(lambda > 0.0) || sigma < 0.0) throw DomainError("beta_radius: bad lambda or sigma");
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  const double arg = (2.0 * lambda * dd * nn + 2.0 * nn * nn * t) / (lambda * dd * delta);
  return (1.0 + epsilon) * sigma * std::sqrt(dd * std::log(arg)) + std::sqrt(lambda);
}

double ConfidenceSet::effective_radius() const {
  return flavor == NormFlavor::kEll1Scaled
             ? radius * std::sqrt(static_cast<double>(center.size()))
             : radius;
}

ConfidenceSet make_confidence_set(const SufficientStats& stats, double beta,
                                  NormFlavor flavor) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw DomainError("confidence radius must be finite and non-negative");
  }
  return ConfidenceSet{rls_estimate(stats), beta, stats.gram, flavor};
}

DecisionSet DecisionSet::box(std::size_t dim) {
  if (dim == 0) throw DomainError("decision set dimension must be >= 1");
  return DecisionSet(dim, {});
}

DecisionSet DecisionSet::finite(std::vector<Eigen::VectorXd> arms) {
  if (arms.empty()) throw DomainError("finite decision set must be non-empty");
  const auto dim = static_cast<std::size_t>(arms.front().size());
  double largest = 0.0;
  for (const auto& a : arms) {
    if (static_cast<std::size_t>(a.size()) != dim) {
      throw DomainError("finite decision set: inconsistent arm dimensions");
    }
    largest = std::max(largest, a.norm());
  }
  if (largest > 1.0) {
    for (auto& a : arms) a /= largest;
  }
  return DecisionSet(dim, std::move(arms));
}

DecisionSet DecisionSet::random_finite(std::size_t dim, std::size_t k,
                                       SplitMix64& rng) {
  if (k == 0) throw DomainError("finite decision set must be non-empty");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> arms;
  while (arms.size() < k) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    const double norm = v.norm();
    if (norm < 1e-12) continue;
    arms.push_back(v / norm);
  }
  return DecisionSet(dim, std::move(arms));
}

double DecisionSet::max_norm() const {
  if (is_box()) return std::sqrt(static_cast<double>(dim_));
  double m = 0.0;
  for (const auto& a : arms_) m = std::max(m, a.norm());
  return m;
}

std::optional<std::size_t> DecisionSet::find(const Eigen::VectorXd& x) const {
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (arms_[i] == x) return i;
  }
  return std::nullopt;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& gram) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw InvariantViolation("Gram matrix is not positive definite");
  }
  return llt;
}

Eigen::VectorXd sign_vector(const Eigen::VectorXd& v) {
  Eigen::VectorXd s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) s(i) = v(i) < 0.0 ? -1.0 : 1.0;
  return s;
}

}  // namespace

Selection ucb_select_finite(const std::vector<Eigen::VectorXd>& arms,
                            const ConfidenceSet& cs, double scale) {
  if (arms.empty()) throw DomainError("ucb_select_finite: empty arm set");
  const auto llt = factor(cs.gram);
  const double bonus = scale * cs.effective_radius();
  Selection best;
  bool have = false;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const Eigen::VectorXd& x = arms[i];
    const double width = std::sqrt(std::max(0.0, x.dot(llt.solve(x))));
    const double value = cs.center.dot(x) + bonus * width;
    if (!have || value > best.value) {
      best = Selection{x, value, i};
      have = true;
    }
  }
  return best;
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw InvariantViolation("inverse_sqrt: eigen-solver did not converge");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double floor = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() <= floor) {
    throw InvariantViolation("inverse_sqrt: matrix is not positive definite");
  }
  return solver.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
         solver.eigenvectors().transpose();
}

Selection ucb_select_box(std::size_t dim, const ConfidenceSet& cs, double scale) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (cs.center.size() != d) throw DomainError("ucb_select_box: dimension mismatch");
  const Eigen::MatrixXd root = inverse_sqrt(cs.gram);
  const double bonus = scale * cs.effective_radius();
  const auto objective = [&](const Eigen::VectorXd& x) {
    return cs.center.dot(x) + bonus * (root * x).cwiseAbs().maxCoeff();
  };
  Selection best;
  bool have = false;
  std::size_t candidate = 0;
  for (Eigen::Index k = 0; k < d; ++k) {
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd x = sign_vector(cs.center + s * bonus * root.col(k));
      const double value = objective(x);
      if (!have || value > best.value) {
        best = Selection{std::move(x), value, candidate};
        have = true;
      }
      ++candidate;
    }
  }
  return best;
}

Selection ucb_select(const DecisionSet& set, const ConfidenceSet& cs, double scale) {
  return set.is_box() ? ucb_select_box(set.dim(), cs, scale)
                      : ucb_select_finite(set.arms(), cs, scale);
}

Selection greedy_select(const DecisionSet& set, const Eigen::VectorXd& theta) {
  if (set.is_box()) {
    Eigen::VectorXd x = sign_vector(theta);
    const double v = theta.dot(x);
    return Selection{std::move(x), v, 0};
  }
  Selection best;
  bool have = false;
  for (std::size_t i = 0; i < set.arms().size(); ++i) {
    const double v = theta.dot(set.arms()[i]);
    if (!have || v > best.value) {
      best = Selection{set.arms()[i], v, i};
      have = true;
    }
  }
  return best;
}

Eigen::VectorXd ts_perturb(const ConfidenceSet& cs, const Eigen::VectorXd& rho) {
  return cs.center + cs.effective_radius() * (inverse_sqrt(cs.gram) * rho);
}

Eigen::VectorXd ts_perturb(const ConfidenceSet& cs, SplitMix64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd rho(cs.center.size());
  for (Eigen::Index i = 0; i < rho.size(); ++i) rho(i) = gauss(rng);
  return ts_perturb(cs, rho);
}

SafeGeometry::SafeGeometry(Eigen::VectorXd x0, double c0, double c)
    : x0_(std::move(x0)), c0_(c0), c_(c) {
  if (!(c0_ < c_)) throw DomainError("safe geometry requires c0 < c");
  const Eigen::Index d = x0_.size();
  if (d == 0) throw DomainError("safe geometry: empty x0");
  const double norm = x0_.norm();
  sentinel_ = norm == 0.0;
  if (sentinel_) {
    x0_unit_ = Eigen::VectorXd::Zero(d);
    basis_ = Eigen::MatrixXd::Identity(d, d);
    return;
  }
  x0_unit_ = x0_ / norm;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x0_unit_);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  basis_ = q.rightCols(d - 1);
}

double SafeGeometry::known_constraint_part(const Eigen::VectorXd& x) const {
  if (sentinel_) return 0.0;
  return x.dot(x0_unit_) / x0_.norm() * c0_;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> project_components(
    const Eigen::VectorXd& x, const SafeGeometry& geo) {
  if (geo.sentinel()) return {Eigen::VectorXd::Zero(x.size()), x};
  Eigen::VectorXd along = x.dot(geo.x0_unit()) * geo.x0_unit();
  Eigen::VectorXd perp = x - along;
  return {std::move(along), std::move(perp)};
}

OrthoStats::OrthoStats(const SafeGeometry& geo, double lambda_) : lambda(lambda_) {
  reset(geo);
}

void OrthoStats::reset(const SafeGeometry& geo) {
  const Eigen::Index d = geo.x0().size();
  const Eigen::VectorXd& u = geo.x0_unit();
  gram_perp = lambda * (Eigen::MatrixXd::Identity(d, d) - u * u.transpose());
  moment_perp = Eigen::VectorXd::Zero(d);
  complement_basis = geo.complement_basis();
}

void OrthoStats::add(const Eigen::VectorXd& x_perp, double z_perp) {
  gram_perp.noalias() += x_perp * x_perp.transpose();
  moment_perp.noalias() += z_perp * x_perp;
}

void OrthoStats::add_rows(const Eigen::MatrixXd& rows_perp,
                          const Eigen::VectorXd& z_perp, double scale) {
  gram_perp.noalias() += scale * (rows_perp.transpose() * rows_perp);
  moment_perp.noalias() += scale * (rows_perp.transpose() * z_perp);
}

Eigen::MatrixXd OrthoStats::restricted() const {
  return complement_basis.transpose() * gram_perp * complement_basis;
}

Eigen::VectorXd ortho_estimate(const OrthoStats& stats) {
  const auto llt = factor(stats.restricted());
  return stats.complement_basis *
         llt.solve(stats.complement_basis.transpose() * stats.moment_perp);
}

double ortho_norm(const Eigen::VectorXd& x_perp, const OrthoStats& stats) {
  const Eigen::VectorXd coords = stats.complement_basis.transpose() * x_perp;
  const double residual = (x_perp - stats.complement_basis * coords).norm();
  if (residual > 1e-10 * std::max(1.0, x_perp.norm())) {
    throw DomainError("ortho_norm: vector is not orthogonal to the safe action");
  }
  if (coords.size() == 0) return 0.0;
  const auto llt = factor(stats.restricted());
  return std::sqrt(std::max(0.0, coords.dot(llt.solve(coords))));
}

double safe_test_value(const Eigen::VectorXd& x, const Eigen::VectorXd& mu_perp_hat,
                       const OrthoStats& stats, double beta, const SafeGeometry& geo) {
  const auto [along, perp] = project_components(x, geo);
  (void)along;
  return geo.known_constraint_part(x) + mu_perp_hat.dot(perp) +
         beta * ortho_norm(perp, stats);
}

std::vector<std::size_t> safe_filter(const std::vector<Eigen::VectorXd>& arms,
                                     const Eigen::VectorXd& mu_perp_hat,
                                     const OrthoStats& stats, double beta,
                                     const SafeGeometry& geo) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (safe_test_value(arms[i], mu_perp_hat, stats, beta, geo) <= geo.c()) {
      keep.push_back(i);
    }
  }
  return keep;
}

double delay_exemptions(const BoundParams& p) {
  return p.rounds * logdet_budget(p);
}

double logdet_budget(const BoundParams& p) {
  const double d = static_cast<double>(p.d);
  return d * std::log1p(static_cast<double>(p.n) * p.horizon / (d * p.lambda));
}

double rc_threshold(std::size_t d, std::size_t n, int horizon, double lambda) {
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  return horizon * std::log1p(nn * horizon / (dd * lambda)) / (dd * nn);
}

namespace {

// β_T evaluated at T (T = 0 is allowed here: the bound's T-terms vanish).
double beta_at(const BoundParams& p) {
  const double d = static_cast<double>(p.d);
  const double n = static_cast<double>(p.n);
  const double arg = (2.0 * p.lambda * d * n + 2.0 * n * n * p.horizon) /
                     (p.lambda * d * p.delta);
  return (1.0 + p.epsilon) * p.sigma * std::sqrt(d * std::log(arg)) + std::sqrt(p.lambda);
}

}  // namespace

double theoretical_regret_bound(BoundVariant variant, const BoundParams& p,
                                BoundForm form) {
  if (p.horizon < 0 || p.rounds < 1 || p.d == 0 || p.n == 0) {
    throw DomainError("theoretical_regret_bound: invalid parameters");
  }
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0) || !(p.delta > 0.0 && p.delta < 1.0)) {
    throw DomainError("theoretical_regret_bound: epsilon and delta must lie in (0, 1)");
  }
  const double d = static_cast<double>(p.d);
  const double n = static_cast<double>(p.n);
  const double s = static_cast<double>(p.rounds);
  const double t = static_cast<double>(p.horizon);
  const double beta = beta_at(p);
  const double log_growth = std::log(p.lambda + n * t / d);
  constexpr double e = std::numbers::e;

  if (variant == BoundVariant::kRcDlucb) {
    if (form == BoundForm::kTheorem && p.epsilon > 1.0 / (2.0 * d + 1.0)) {
      throw DomainError("RC-DLUCB bound requires epsilon <= 1/(2d+1)");
    }
    return 4.0 * beta *
           (s * n * d * log_growth / std::sqrt(p.lambda) +
            4.0 * std::pow(log_growth, 1.5) * std::sqrt(d * n * t));
  }

  const double kappa = variant == BoundVariant::kSafeDlucb ? p.kappa_r : 1.0;
  if (form == BoundForm::kTheorem) {
    if (p.epsilon > 1.0 / (4.0 * d + 1.0)) {
      throw DomainError("DLUCB bound requires epsilon <= 1/(4d+1)");
    }
    return 2.0 * s * d * std::log1p(n * t / (d * p.lambda)) +
           2.0 * e * kappa * beta * std::sqrt(2.0 * d * n * t * log_growth);
  }
  const double inflation = std::pow((1.0 + p.epsilon) / (1.0 - p.epsilon), d);
  return 2.0 * s * d * std::log1p(n * t / (d * s)) +
         2.0 * kappa * beta * inflation * std::sqrt(2.0 * e * d * n * t * log_growth);
}

}  // namespace dlbandit
