#include "shiftlab/jdot.hpp"

#include <cmath>
#include <limits>

namespace shiftlab::jdot {

ot::CostMatrix joint_cost_matrix(const LabeledDataset& source,
                                 const Matrix& target_pts,
                                 const models::RidgeModel& h, double lambda) {
  detail::require(lambda > 0.0, "joint_cost_matrix: lambda must be positive");
  detail::require(source.dim() == target_pts.cols(),
                  "joint_cost_matrix: dimension mismatch");
  detail::require(target_pts.rows() >= 1, "empty sample");

  const Vector predictions = h.predict_matrix(target_pts);
  Matrix C(source.size(), target_pts.rows());
  for (Eigen::Index i = 0; i < source.size(); ++i) {
    for (Eigen::Index j = 0; j < target_pts.rows(); ++j) {
      const double rho = (source.features().row(i) - target_pts.row(j)).norm();
      const double err = source.labels()[i] - predictions[j];
      C(i, j) = lambda * rho + err * err;
    }
  }
  return ot::CostMatrix(std::move(C));
}

double default_lambda(const Matrix& source_pts, const Matrix& target_pts) {
  detail::require(source_pts.rows() >= 1 && target_pts.rows() >= 1, "empty sample");
  detail::require(source_pts.cols() == target_pts.cols(),
                  "default_lambda: dimension mismatch");
  double max_dist = 0.0;
  for (Eigen::Index i = 0; i < source_pts.rows(); ++i)
    for (Eigen::Index j = 0; j < target_pts.rows(); ++j)
      max_dist = std::max(max_dist, (source_pts.row(i) - target_pts.row(j)).norm());
  detail::require(max_dist > 0.0, "zero diameter");
  return 1.0 / max_dist;
}

Vector fictive_labels(const ot::TransportPlan& plan, const Vector& source_labels) {
  detail::require(plan.coupling.rows() == source_labels.size(),
                  "fictive_labels: label count mismatch");
  const Eigen::Index m_t = plan.coupling.cols();
  const Vector col_sums = plan.coupling.colwise().sum();
  detail::require(
      (col_sums.array() - 1.0 / static_cast<double>(m_t)).abs().maxCoeff() <= 1e-8,
      "non-uniform column marginal");
  return static_cast<double>(m_t) * (plan.coupling.transpose() * source_labels);
}

namespace {

ot::TransportPlan solve_plan(const Vector& alpha, const Vector& beta,
                             const ot::CostMatrix& cost, const JdotConfig& cfg) {
  const bool exact =
      cfg.plan_solver == JdotConfig::Solver::Exact ||
      (cfg.plan_solver == JdotConfig::Solver::Auto &&
       cost.rows() * cost.cols() <= 250000);
  if (exact) return ot::solve_exact(alpha, beta, cost);
  return ot::solve_sinkhorn(alpha, beta, cost, cfg.entropic_eps);
}

double penalty(const models::RidgeModel& h, double eps_reg) {
  return eps_reg * h.slope().squaredNorm();
}

}  // namespace

JdotResult jdot_fit(const LabeledDataset& source, const Matrix& target_pts,
                    const JdotConfig& cfg) {
  detail::require(cfg.eps_reg > 0.0, "jdot_fit: eps_reg must be positive");
  detail::require(cfg.bcd_max_iter >= 0, "jdot_fit: negative iteration budget");
  detail::require(cfg.objective_tol > 0.0, "jdot_fit: tolerance must be positive");
  detail::require(source.dim() == target_pts.cols(),
                  "jdot_fit: dimension mismatch");
  detail::require(target_pts.rows() >= 1, "empty sample");

  const double lambda = cfg.lambda > 0.0
                            ? cfg.lambda
                            : default_lambda(source.features(), target_pts);

  // Warm start: plain Ridge on the labeled source. The BCD objective couples
  // the regularizer with the raw-space transport cost, so the internal fits
  // skip standardization.
  const models::RidgeOptions ridge_opts{.standardize = false};
  models::RidgeModel h =
      models::fit_ridge(source.features(), source.labels(),
                        Vector::Ones(source.size()), cfg.eps_reg, ridge_opts);

  JdotResult result{.model = h,
                    .final_plan = std::nullopt,
                    .fictive_labels = Vector(),
                    .lambda_used = lambda};

  const Eigen::Index m_s = source.size();
  const Eigen::Index m_t = target_pts.rows();
  const Vector alpha = Vector::Constant(m_s, 1.0 / static_cast<double>(m_s));
  const Vector beta = Vector::Constant(m_t, 1.0 / static_cast<double>(m_t));

  ot::CostMatrix cost = joint_cost_matrix(source, target_pts, h, lambda);
  double previous_objective = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.bcd_max_iter; ++it) {
    result.final_plan = solve_plan(alpha, beta, cost, cfg);
    result.objective_trace.push_back(plan_cost(*result.final_plan, cost) +
                                     penalty(h, cfg.eps_reg));

    result.fictive_labels = fictive_labels(*result.final_plan, source.labels());
    h = models::fit_ridge(target_pts, result.fictive_labels,
                          Vector::Ones(m_t), cfg.eps_reg, ridge_opts);

    cost = joint_cost_matrix(source, target_pts, h, lambda);
    const double objective =
        plan_cost(*result.final_plan, cost) + penalty(h, cfg.eps_reg);
    result.objective_trace.push_back(objective);
    result.bcd_iterations = it + 1;

    if (std::abs(previous_objective - objective) < cfg.objective_tol) break;
    previous_objective = objective;
  }

  result.model = h;
  return result;
}

}  // namespace shiftlab::jdot
