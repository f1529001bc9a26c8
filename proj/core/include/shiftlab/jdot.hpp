#pragma once

#include "shiftlab/core.hpp"
#include "shiftlab/models.hpp"
#include "shiftlab/ot.hpp"

#include <optional>
#include <vector>

namespace shiftlab::jdot {

struct JdotConfig {
  /// Feature/label balance; nonpositive means "use default_lambda".
  double lambda = 0.0;
  double eps_reg = 1e-2;
  int bcd_max_iter = 20;
  enum class Solver { Auto, Exact, Entropic };
  /// Auto picks the exact solver while m_S * m_T <= 250000.
  Solver plan_solver = Solver::Auto;
  std::optional<double> entropic_eps = std::nullopt;
  double objective_tol = 1e-6;
};

struct JdotResult {
  models::RidgeModel model;
  std::optional<ot::TransportPlan> final_plan;
  /// Joint objective recorded after every completed half-step
  /// (plan update, then predictor update), nonincreasing with the
  /// exact plan solver.
  std::vector<double> objective_trace;
  Vector fictive_labels;
  double lambda_used = 0.0;
  int bcd_iterations = 0;
};

/// Entry (i,j) = lambda * ||x_i - x'_j|| + (y_i - h(x'_j))^2.
ot::CostMatrix joint_cost_matrix(const LabeledDataset& source,
                                 const Matrix& target_pts,
                                 const models::RidgeModel& h, double lambda);

/// 1 / max cross pairwise Euclidean distance.
double default_lambda(const Matrix& source_pts, const Matrix& target_pts);

/// y'_j = m_T * sum_i coupling_ij * y_i; requires the uniform column
/// marginal that makes this the plan-conditional label mean.
Vector fictive_labels(const ot::TransportPlan& plan, const Vector& source_labels);

/// Block-coordinate descent on the joint transport/regression objective:
/// Ridge warm start on the source, then alternating plan solves under
/// uniform marginals and Ridge refits on the fictive labels.
JdotResult jdot_fit(const LabeledDataset& source, const Matrix& target_pts,
                    const JdotConfig& cfg = {});

}  // namespace shiftlab::jdot
