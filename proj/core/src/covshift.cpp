#include "shiftlab/covshift.hpp"

#include <cmath>

namespace shiftlab::covshift {

QuadraticProgram::QuadraticProgram(Matrix K_, Vector k_, double box_bound_,
                                   double budget_tol_)
    : K(std::move(K_)), k(std::move(k_)), box_bound(box_bound_),
      budget_tol(budget_tol_) {
  detail::require(K.rows() == K.cols() && K.rows() == k.size(),
                  "QuadraticProgram: shape mismatch");
  detail::require_finite(K, "QuadraticProgram K");
  detail::require_finite(k, "QuadraticProgram k");
  detail::require((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-9,
                  "QuadraticProgram: K not symmetric");
  detail::require(box_bound > 0.0, "QuadraticProgram: box bound must be positive");
  detail::require(budget_tol >= 0.0,
                  "QuadraticProgram: negative budget tolerance");
}

double QuadraticProgram::objective(const Vector& w) const {
  return 0.5 * w.dot(K * w) - k.dot(w);
}

double mmd_squared(const Matrix& source_pts, const Vector& source_weights,
                   const Matrix& target_pts, const models::KernelSpec& kernel) {
  detail::require(source_pts.rows() >= 1 && target_pts.rows() >= 1, "empty sample");
  detail::require(source_pts.cols() == target_pts.cols(),
                  "mmd_squared: dimension mismatch");
  detail::require(source_weights.size() == source_pts.rows(),
                  "mmd_squared: weight count mismatch");
  const double ms = static_cast<double>(source_pts.rows());
  const double mt = static_cast<double>(target_pts.rows());

  const Matrix k_ss = models::gram_matrix(source_pts, source_pts, kernel);
  const Matrix k_st = models::gram_matrix(source_pts, target_pts, kernel);
  const Matrix k_tt = models::gram_matrix(target_pts, target_pts, kernel);

  const double term_ss = source_weights.dot(k_ss * source_weights) / (ms * ms);
  const double term_st =
      2.0 * source_weights.dot(k_st * Vector::Ones(target_pts.rows())) / (ms * mt);
  const double term_tt = k_tt.sum() / (mt * mt);

  const double value = term_ss - term_st + term_tt;
  detail::require(value >= -1e-9, "mmd_squared: negative beyond tolerance");
  return std::max(value, 0.0);
}

double default_budget_tol(Eigen::Index m_source) {
  detail::require(m_source >= 1, "empty sample");
  const double root = std::sqrt(static_cast<double>(m_source));
  return (root - 1.0) / root;
}

QuadraticProgram build_kmm_qp(const Matrix& source_pts, const Matrix& target_pts,
                              const models::KernelSpec& kernel, double box_bound,
                              std::optional<double> budget_tol) {
  detail::require(source_pts.rows() >= 1 && target_pts.rows() >= 1, "empty sample");
  detail::require(box_bound > 0.0, "build_kmm_qp: box bound must be positive");
  const double ms = static_cast<double>(source_pts.rows());
  const double mt = static_cast<double>(target_pts.rows());

  Matrix K = 2.0 * models::gram_matrix(source_pts, source_pts, kernel);
  // Symmetrize away roundoff from the vectorized Gram evaluation.
  K = 0.5 * (K + K.transpose());
  Vector k = (2.0 * ms / mt) *
             (models::gram_matrix(source_pts, target_pts, kernel) *
              Vector::Ones(target_pts.rows()));
  const double eps = budget_tol.value_or(default_budget_tol(source_pts.rows()));
  return QuadraticProgram(std::move(K), std::move(k), box_bound, eps);
}

Vector project_box_budget(const Vector& v, double box_bound, double lo_sum,
                          double hi_sum) {
  detail::require(box_bound > 0.0, "project_box_budget: bad box bound");
  detail::require(lo_sum <= hi_sum, "project_box_budget: empty budget band");
  const double n = static_cast<double>(v.size());
  detail::require(hi_sum >= 0.0 && lo_sum <= n * box_bound,
                  "project_box_budget: infeasible constraints");

  const auto clip = [&](const Vector& x) {
    return x.cwiseMax(0.0).cwiseMin(box_bound);
  };
  Vector w = clip(v);
  const double s = w.sum();
  if (s >= lo_sum && s <= hi_sum) return w;

  // One budget side is active: w = clip(v - mu) with signed multiplier mu.
  const double target = s > hi_sum ? hi_sum : lo_sum;
  double lo = -(v.cwiseAbs().maxCoeff() + box_bound + 1.0);
  double hi = -lo;
  // sum(clip(v - mu)) is nonincreasing in mu; bisect to the target sum,
  // keeping the bracket end whose sum stays inside the band.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (clip(v.array() - mid).sum() > target)
      lo = mid;
    else
      hi = mid;
  }
  const double mu = s > hi_sum ? hi : lo;
  return clip(v.array() - mu);
}

WeightVector solve_qp(const QuadraticProgram& qp, int max_iter, double tol) {
  detail::require(max_iter >= 0, "solve_qp: negative iteration budget");
  detail::require(tol > 0.0, "solve_qp: tolerance must be positive");
  const Eigen::Index n = qp.size();
  const double m = static_cast<double>(n);
  const double lo_sum = m * (1.0 - qp.budget_tol);
  const double hi_sum = m * (1.0 + qp.budget_tol);

  // Lipschitz bound: power iteration on K, padded, with the row-sum norm
  // as a hard upper fallback.
  Vector pv = Vector::Ones(n).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector next = qp.K * pv;
    const double norm = next.norm();
    if (norm < 1e-300) break;
    lambda = norm;
    pv = next / norm;
  }
  const double inf_norm = qp.K.cwiseAbs().rowwise().sum().maxCoeff();
  const double L = std::max(std::min(1.05 * lambda, inf_norm), 1e-12);

  Vector w = project_box_budget(Vector::Ones(n), qp.box_bound, lo_sum, hi_sum);
  double objective = qp.objective(w);
  double step = 1.0 / L;
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const Vector grad = qp.K * w - qp.k;
    Vector next = project_box_budget(w - step * grad, qp.box_bound, lo_sum, hi_sum);
    double next_obj = qp.objective(next);
    // The 1/L step is monotone in exact arithmetic; halve on roundoff upticks.
    int guard = 0;
    while (next_obj > objective && guard++ < 60) {
      step *= 0.5;
      next = project_box_budget(w - step * grad, qp.box_bound, lo_sum, hi_sum);
      next_obj = qp.objective(next);
    }
    if (next_obj > objective) break;
    const double change = objective - next_obj;
    w = std::move(next);
    objective = next_obj;
    if (change <= tol * (std::abs(objective) + 1e-12)) {
      converged = true;
      break;
    }
  }
  return WeightVector{std::move(w), converged};
}

WeightVector kmm_weights(const Matrix& source_pts, const Matrix& target_pts,
                         const models::KernelSpec& kernel, double box_bound) {
  return solve_qp(build_kmm_qp(source_pts, target_pts, kernel, box_bound));
}

namespace {

// Silverman's per-dimension rule for an n-point d-dimensional sample.
Vector silverman_bandwidths(const Matrix& sample) {
  const double n = static_cast<double>(sample.rows());
  const double d = static_cast<double>(sample.cols());
  const Vector mean = sample.colwise().mean();
  Vector sd(sample.cols());
  for (Eigen::Index j = 0; j < sample.cols(); ++j) {
    const double var = (sample.col(j).array() - mean[j]).square().mean();
    sd[j] = std::max(std::sqrt(var), 1e-12);
  }
  const double factor = std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
  return factor * sd;
}

double kde_density(const Vector& x, const Matrix& sample, const Vector& h) {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599344;
  double total = 0.0;
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    double log_k = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double z = (x[j] - sample(i, j)) / h[j];
      log_k += -0.5 * z * z + std::log(kInvSqrt2Pi / h[j]);
    }
    total += std::exp(log_k);
  }
  return total / static_cast<double>(sample.rows());
}

}  // namespace

WeightVector kde_ratio_weights(const Matrix& source_pts, const Matrix& target_pts) {
  detail::require(source_pts.rows() >= 1 && target_pts.rows() >= 1, "empty sample");
  detail::require(source_pts.cols() == target_pts.cols(),
                  "kde_ratio_weights: dimension mismatch");
  constexpr double kClamp = 1e4;
  const Vector h_source = silverman_bandwidths(source_pts);
  const Vector h_target = silverman_bandwidths(target_pts);

  Vector w(source_pts.rows());
  for (Eigen::Index i = 0; i < source_pts.rows(); ++i) {
    const Vector x = source_pts.row(i);
    const double p_s = kde_density(x, source_pts, h_source);
    detail::require(p_s > 0.0, "zero source density");
    const double p_t = kde_density(x, target_pts, h_target);
    w[i] = std::min(p_t / p_s, kClamp);
  }
  return WeightVector{std::move(w), true};
}

double weighted_empirical_risk(
    const std::function<double(const Vector&)>& predictor,
    const LabeledDataset& data, const Vector& weights,
    const std::function<double(double, double)>& loss) {
  detail::require(weights.size() == data.size(),
                  "weighted_empirical_risk: weight count mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    total += weights[i] *
             loss(predictor(data.features().row(i)), data.labels()[i]);
  return total / static_cast<double>(data.size());
}

double weight_variance(const Vector& weights) {
  detail::require(weights.size() >= 1, "empty sample");
  const double mean = weights.mean();
  return (weights.array() - mean).square().mean();
}

}  // namespace shiftlab::covshift
