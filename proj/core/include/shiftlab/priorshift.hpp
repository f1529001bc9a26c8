#pragma once

#include "shiftlab/core.hpp"
#include "shiftlab/models.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace shiftlab::priorshift {

/// Outcome of the prior-correction iteration. target_posteriors holds one
/// row per target observation; final_priors is its column mean (the M-step
/// identity). When no iteration ran the posterior matrix is empty and the
/// test fields of em_run outputs are NaN until the significance test runs.
struct PriorShiftResult {
  std::vector<ProbVector> prior_trajectory;
  ProbVector final_priors;
  Matrix target_posteriors;
  int iterations_used = 0;
  bool converged = false;
  double test_statistic = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  bool significant = false;
};

/// Class proportions of the training sample; every class must appear.
ProbVector source_priors(const LabeledDataset& data, int K);

/// Reweights a source posterior by target_prior/source_prior and normalizes.
ProbVector corrected_posterior(const ProbVector& source_post,
                               const ProbVector& source_prior,
                               const ProbVector& target_prior);

/// One fixed-point sweep: corrected posteriors under current_prior, then the
/// column mean as the updated prior.
std::pair<ProbVector, Matrix> em_step(const Matrix& source_posteriors,
                                      const ProbVector& source_prior,
                                      const ProbVector& current_prior);

/// Iterates em_step from the source prior until the L-inf prior change
/// drops below tol or max_iter is reached.
PriorShiftResult em_run(const Matrix& source_posteriors,
                        const ProbVector& source_prior, double tol = 1e-6,
                        int max_iter = 1000);

/// Log likelihood ratio of the corrected target model to the source model,
/// evaluated through class k:
///   sum_i log(pS(k|x_i)/pT(k|x_i)) + m log(pT(k)/pS(k)).
/// Independent of k when the posteriors were formed from target_prior.
double likelihood_ratio_statistic(const Matrix& source_posteriors,
                                  const Matrix& target_posteriors,
                                  const ProbVector& source_prior,
                                  const ProbVector& target_prior, int k);

/// Upper-tail probability of the chi-square law with `dof` degrees of
/// freedom (regularized incomplete gamma, series + continued fraction).
double chi2_survival(double x, int dof);

/// Clamps rows to [floor, 1-floor] and renormalizes; guards the log-ratios
/// against underflowing classifier outputs.
Matrix smooth_posteriors(Matrix posteriors, double floor = 1e-12);

/// Marginal log likelihood of target observations under prior theta,
///   sum_i log sum_k theta_k pS(k|x_i)/pS(k);
/// the quantity the EM iteration ascends.
double marginal_log_likelihood(const Matrix& source_posteriors,
                               const ProbVector& source_prior,
                               const ProbVector& theta);

/// End-to-end correction: classifier posteriors on the target sample are
/// smoothed, the EM iteration estimates the target priors, and the
/// likelihood-ratio test (2|statistic| against chi-square K-1) decides
/// whether the correction is significant at level alpha.
PriorShiftResult prior_shift_adapt(const models::SoftmaxClassifier& clf,
                                   const Matrix& target_features,
                                   double tol = 1e-6, int max_iter = 1000,
                                   double alpha = 0.05);

}  // namespace shiftlab::priorshift
