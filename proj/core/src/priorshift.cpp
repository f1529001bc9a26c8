#include "shiftlab/priorshift.hpp"

#include <cmath>

namespace shiftlab::priorshift {

ProbVector source_priors(const LabeledDataset& data, int K) {
  const IntVector labels = data.class_labels();
  detail::require(labels.maxCoeff() < K, "source_priors: label out of range");
  Vector counts = Vector::Zero(K);
  for (Eigen::Index i = 0; i < labels.size(); ++i) counts[labels[i]] += 1.0;
  detail::require(counts.minCoeff() > 0.0, "zero source prior");
  return ProbVector(counts / static_cast<double>(labels.size()), 1e-9);
}

ProbVector corrected_posterior(const ProbVector& source_post,
                               const ProbVector& source_prior,
                               const ProbVector& target_prior) {
  const Eigen::Index K = source_post.size();
  detail::require(source_prior.size() == K && target_prior.size() == K,
                  "corrected_posterior: size mismatch");
  detail::require(source_prior.values().minCoeff() > 0.0, "zero source prior");
  Vector mass(K);
  for (Eigen::Index k = 0; k < K; ++k)
    mass[k] = target_prior[k] / source_prior[k] * source_post[k];
  detail::require(mass.sum() > 0.0, "vanishing posterior mass");
  return ProbVector(mass / mass.sum(), 1e-9);
}

namespace {

void check_posterior_rows(const Matrix& posteriors, Eigen::Index K) {
  detail::require(posteriors.rows() >= 1, "empty target");
  detail::require(posteriors.cols() == K, "posterior matrix: class count mismatch");
  detail::require_finite(posteriors, "posterior matrix");
  detail::require(posteriors.minCoeff() >= 0.0, "posterior matrix: negative entry");
  detail::require(((posteriors.rowwise().sum().array() - 1.0).abs() < 1e-6).all(),
                  "posterior matrix: rows do not sum to 1");
}

}  // namespace

std::pair<ProbVector, Matrix> em_step(const Matrix& source_posteriors,
                                      const ProbVector& source_prior,
                                      const ProbVector& current_prior) {
  const Eigen::Index K = source_prior.size();
  detail::require(current_prior.size() == K, "em_step: prior size mismatch");
  detail::require(source_prior.values().minCoeff() > 0.0, "zero source prior");
  detail::require(current_prior.values().minCoeff() > 0.0,
                  "em_step: current prior has zero entry");
  check_posterior_rows(source_posteriors, K);

  const Vector ratio =
      current_prior.values().cwiseQuotient(source_prior.values());
  Matrix target = source_posteriors.array().rowwise() * ratio.transpose().array();
  for (Eigen::Index i = 0; i < target.rows(); ++i) {
    const double z = target.row(i).sum();
    detail::require(z > 0.0, "vanishing posterior mass");
    target.row(i) /= z;
  }
  const Vector col_mean = target.colwise().mean();
  return {ProbVector::normalized(col_mean), std::move(target)};
}

PriorShiftResult em_run(const Matrix& source_posteriors,
                        const ProbVector& source_prior, double tol,
                        int max_iter) {
  detail::require(tol > 0.0, "em_run: tolerance must be positive");
  detail::require(max_iter >= 0, "em_run: negative iteration budget");

  PriorShiftResult result{.prior_trajectory = {source_prior},
                          .final_priors = source_prior,
                          .target_posteriors = Matrix()};
  ProbVector theta = source_prior;
  for (int s = 0; s < max_iter; ++s) {
    auto [next, posteriors] = em_step(source_posteriors, source_prior, theta);
    result.prior_trajectory.push_back(next);
    result.target_posteriors = std::move(posteriors);
    result.iterations_used = s + 1;
    const double change = next.linf_distance(theta);
    theta = next;
    if (change < tol) {
      result.converged = true;
      break;
    }
  }
  result.final_priors = theta;
  return result;
}

double likelihood_ratio_statistic(const Matrix& source_posteriors,
                                  const Matrix& target_posteriors,
                                  const ProbVector& source_prior,
                                  const ProbVector& target_prior, int k) {
  const Eigen::Index K = source_prior.size();
  detail::require(k >= 0 && k < K, "likelihood_ratio_statistic: class out of range");
  detail::require(target_prior.size() == K,
                  "likelihood_ratio_statistic: prior size mismatch");
  detail::require(source_posteriors.rows() == target_posteriors.rows() &&
                      source_posteriors.cols() == target_posteriors.cols() &&
                      source_posteriors.cols() == K,
                  "likelihood_ratio_statistic: shape mismatch");
  detail::require(source_prior[k] > 0.0 && target_prior[k] > 0.0,
                  "undefined log-ratio");

  const Eigen::Index m = source_posteriors.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = source_posteriors(i, k);
    const double t = target_posteriors(i, k);
    detail::require(s > 0.0 && t > 0.0, "undefined log-ratio");
    sum += std::log(s / t);
  }
  return sum + static_cast<double>(m) * std::log(target_prior[k] / source_prior[k]);
}

namespace {

// Regularized incomplete gamma P(a,x) by series expansion (x < a+1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper gamma Q(a,x) by modified Lentz continued fraction.
double gamma_q_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_survival(double x, int dof) {
  detail::require(dof >= 1, "chi2_survival: dof must be positive");
  detail::require(x >= 0.0, "chi2_survival: negative argument");
  const double a = 0.5 * dof;
  const double z = 0.5 * x;
  if (z == 0.0) return 1.0;
  if (z < a + 1.0) return 1.0 - gamma_p_series(a, z);
  return gamma_q_cf(a, z);
}

Matrix smooth_posteriors(Matrix posteriors, double floor) {
  detail::require(floor > 0.0 && floor < 0.5, "smooth_posteriors: bad floor");
  posteriors = posteriors.cwiseMax(floor).cwiseMin(1.0 - floor);
  for (Eigen::Index i = 0; i < posteriors.rows(); ++i)
    posteriors.row(i) /= posteriors.row(i).sum();
  return posteriors;
}

double marginal_log_likelihood(const Matrix& source_posteriors,
                               const ProbVector& source_prior,
                               const ProbVector& theta) {
  const Vector ratio = theta.values().cwiseQuotient(source_prior.values());
  double ll = 0.0;
  for (Eigen::Index i = 0; i < source_posteriors.rows(); ++i) {
    const double z = source_posteriors.row(i) * ratio;
    detail::require(z > 0.0, "vanishing posterior mass");
    ll += std::log(z);
  }
  return ll;
}

PriorShiftResult prior_shift_adapt(const models::SoftmaxClassifier& clf,
                                   const Matrix& target_features, double tol,
                                   int max_iter, double alpha) {
  detail::require(target_features.rows() >= 1, "empty target");
  detail::require(alpha > 0.0 && alpha < 1.0, "prior_shift_adapt: bad level");

  const ProbVector& source_prior = clf.class_frequencies();
  detail::require(source_prior.values().minCoeff() > 0.0, "zero source prior");

  const Matrix posteriors =
      smooth_posteriors(clf.predict_proba_matrix(target_features));
  PriorShiftResult result = em_run(posteriors, source_prior, tol, max_iter);
  if (result.iterations_used == 0) return result;

  result.test_statistic = likelihood_ratio_statistic(
      posteriors, result.target_posteriors, source_prior, result.final_priors, 0);
  const int dof = static_cast<int>(source_prior.size()) - 1;
  result.p_value = chi2_survival(2.0 * std::abs(result.test_statistic), dof);
  result.significant = result.p_value <= alpha;
  return result;
}

}  // namespace shiftlab::priorshift
