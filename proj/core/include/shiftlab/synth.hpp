#pragma once

#include "shiftlab/core.hpp"
#include "shiftlab/rng.hpp"

#include <cstdint>

namespace shiftlab::synth {

/// Gaussian mixture with diagonal class covariances: means and variances are
/// K x d, one row per class.
struct GaussianMixtureSpec {
  Matrix means;
  Matrix variances;
  ProbVector priors;
  std::uint64_t seed = 0;

  GaussianMixtureSpec(Matrix means_, Matrix variances_, ProbVector priors_,
                      std::uint64_t seed_);

  int num_classes() const { return static_cast<int>(means.rows()); }
  int dim() const { return static_cast<int>(means.cols()); }

  /// Class-conditional density p(x | class k).
  double class_density(int k, const Vector& x) const;

  /// Marginal density under the given priors (defaults to spec priors).
  double marginal_density(const Vector& x) const;
  double marginal_density(const Vector& x, const ProbVector& priors_override) const;
};

/// m draws: label ~ priors, features ~ class conditional.
LabeledDataset sample_mixture(const GaussianMixtureSpec& spec, int m);

/// Exactly per_class rows for each class, features from the class
/// conditionals (rows grouped by class).
LabeledDataset stratified_source(const GaussianMixtureSpec& spec, int per_class);

/// Keeps each row independently with probability p_low when
/// features(row, column) <= threshold and p_high otherwise.
LabeledDataset bias_individual_feature(const LabeledDataset& data, int column,
                                       double threshold, double p_low,
                                       double p_high, std::uint64_t seed);

/// Keeps each row with probability exp(-gamma * ||x - mean||^2); the
/// proportionality constant is 1, so rows at the sample mean always survive.
LabeledDataset bias_joint_feature(const LabeledDataset& data, double gamma,
                                  std::uint64_t seed);

/// Invertible affine distortion x -> A x + b.
struct AffineMap {
  Matrix A;
  Vector b;
};

/// Strictly increasing cubic distortion z -> a z + b + c z^3 for 1-D
/// features (a > 0, c >= 0).
struct Monotone1DMap {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
};

/// Distorted target sample; labels ride along for evaluation only.
struct ShiftedSample {
  Matrix features;
  Vector hidden_labels;
};

ShiftedSample subspace_shift(const LabeledDataset& data, const AffineMap& map);
ShiftedSample subspace_shift(const LabeledDataset& data, const Monotone1DMap& map);

}  // namespace shiftlab::synth
