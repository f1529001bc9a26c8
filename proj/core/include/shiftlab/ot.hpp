#pragma once

#include "shiftlab/core.hpp"

#include <functional>
#include <optional>

namespace shiftlab::ot {

using GroundMetric = std::function<double(const Vector&, const Vector&)>;

double euclidean_distance(const Vector& a, const Vector& b);

/// Nonnegative finite r x s ground-cost table.
struct CostMatrix {
  Matrix values;

  explicit CostMatrix(Matrix values_);
  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  double mean() const { return values.mean(); }
};

/// metric(a_i, b_j)^power for row samples A and B.
CostMatrix pairwise_cost(const Matrix& A, const Matrix& B,
                         const GroundMetric& metric = euclidean_distance,
                         double power = 1.0);

/// Coupling with prescribed marginals. converged is false when an iterative
/// solver stopped on its budget; validate() checks the marginal and mass
/// invariants and throws on violation.
struct TransportPlan {
  Matrix coupling;
  ProbVector row_marginal;
  ProbVector col_marginal;
  bool converged = true;

  void validate(double tol = 1e-8) const;
  double total_mass() const { return coupling.sum(); }
};

/// Moves the support points of mu by T; weights are untouched and coincident
/// images are kept as separate points.
DiscreteMeasure push_forward(const DiscreteMeasure& mu,
                             const std::function<Vector(const Vector&)>& T);

/// sum_ij coupling_ij * cost_ij.
double plan_cost(const TransportPlan& plan, const CostMatrix& cost);

/// Exact Kantorovich solver (network simplex on the bipartite transportation
/// graph). alpha and beta are probability weights; the returned plan attains
/// the linear-program optimum.
TransportPlan solve_exact(const Vector& alpha, const Vector& beta,
                          const CostMatrix& cost);

/// Entropic solver: alternating log-domain scalings of exp(-C/epsilon).
/// epsilon defaults to 0.05 * mean(C); stops when the summed L1 marginal
/// violation falls below tol, else returns the last iterate flagged
/// converged = false.
TransportPlan solve_sinkhorn(const Vector& alpha, const Vector& beta,
                             const CostMatrix& cost,
                             std::optional<double> epsilon = std::nullopt,
                             int max_iter = 10000, double tol = 1e-9);

/// W_p(mu, nu) = (exact cost under metric^p)^(1/p).
double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const GroundMetric& metric = euclidean_distance,
                   double p = 1.0);

}  // namespace shiftlab::ot
