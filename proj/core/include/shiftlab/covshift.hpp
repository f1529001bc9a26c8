#pragma once

#include "shiftlab/core.hpp"
#include "shiftlab/models.hpp"

#include <functional>
#include <optional>

namespace shiftlab::covshift {

/// The KMM quadratic problem min_w (1/2 w'Kw - k'w) over the box [0,B]^m
/// intersected with the budget band |mean(w) - 1| <= eps_budget.
struct QuadraticProgram {
  Matrix K;
  Vector k;
  double box_bound;
  double budget_tol;

  QuadraticProgram(Matrix K_, Vector k_, double box_bound_, double budget_tol_);
  Eigen::Index size() const { return k.size(); }
  double objective(const Vector& w) const;
};

/// Importance weights on the source sample. converged is false when the
/// solver hit its iteration budget (the weights are still feasible).
struct WeightVector {
  Vector values;
  bool converged = true;
};

/// Squared empirical MMD between the reweighted source sample and the
/// target sample (all three kernel terms, clamped at zero).
double mmd_squared(const Matrix& source_pts, const Vector& source_weights,
                   const Matrix& target_pts, const models::KernelSpec& kernel);

/// Default budget tolerance (sqrt(m)-1)/sqrt(m) for m source points.
double default_budget_tol(Eigen::Index m_source);

QuadraticProgram build_kmm_qp(const Matrix& source_pts, const Matrix& target_pts,
                              const models::KernelSpec& kernel, double box_bound,
                              std::optional<double> budget_tol = std::nullopt);

/// Exact Euclidean projection onto [0,B]^n intersected with
/// lo_sum <= sum(v) <= hi_sum, by bisection on the budget multiplier.
Vector project_box_budget(const Vector& v, double box_bound, double lo_sum,
                          double hi_sum);

/// Projected gradient descent with step 1/L (L from power iteration);
/// stops when the relative objective change falls below tol.
WeightVector solve_qp(const QuadraticProgram& qp, int max_iter = 5000,
                      double tol = 1e-12);

/// Kernel mean matching: build_kmm_qp composed with solve_qp.
WeightVector kmm_weights(const Matrix& source_pts, const Matrix& target_pts,
                         const models::KernelSpec& kernel, double box_bound = 1000.0);

/// Density-ratio baseline from two Gaussian KDEs (Silverman bandwidths per
/// dimension), evaluated at the source points and clamped to [0, 1e4].
WeightVector kde_ratio_weights(const Matrix& source_pts, const Matrix& target_pts);

/// (1/m) sum_i weights_i * loss(h(x_i), y_i).
double weighted_empirical_risk(
    const std::function<double(const Vector&)>& predictor,
    const LabeledDataset& data, const Vector& weights,
    const std::function<double(double, double)>& loss);

/// Population variance of the weight sample.
double weight_variance(const Vector& weights);

}  // namespace shiftlab::covshift
