#include "shiftlab/synth.hpp"

#include <cmath>
#include <vector>

namespace shiftlab::synth {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

GaussianMixtureSpec::GaussianMixtureSpec(Matrix means_, Matrix variances_,
                                         ProbVector priors_, std::uint64_t seed_)
    : means(std::move(means_)),
      variances(std::move(variances_)),
      priors(std::move(priors_)),
      seed(seed_) {
  detail::require(means.rows() >= 1 && means.cols() >= 1,
                  "GaussianMixtureSpec: empty means");
  detail::require(variances.rows() == means.rows() && variances.cols() == means.cols(),
                  "GaussianMixtureSpec: variance shape mismatch");
  detail::require(priors.size() == means.rows(),
                  "GaussianMixtureSpec: prior count mismatch");
  detail::require_finite(means, "GaussianMixtureSpec means");
  detail::require_finite(variances, "GaussianMixtureSpec variances");
  detail::require(variances.minCoeff() > 0.0,
                  "GaussianMixtureSpec: nonpositive variance");
}

double GaussianMixtureSpec::class_density(int k, const Vector& x) const {
  detail::require(k >= 0 && k < num_classes(), "class_density: class out of range");
  detail::require(x.size() == dim(), "class_density: dimension mismatch");
  double log_p = 0.0;
  for (int j = 0; j < dim(); ++j) {
    const double var = variances(k, j);
    const double d = x[j] - means(k, j);
    log_p += -0.5 * d * d / var - 0.5 * std::log(kTwoPi * var);
  }
  return std::exp(log_p);
}

double GaussianMixtureSpec::marginal_density(const Vector& x) const {
  return marginal_density(x, priors);
}

double GaussianMixtureSpec::marginal_density(const Vector& x,
                                             const ProbVector& priors_override) const {
  detail::require(priors_override.size() == num_classes(),
                  "marginal_density: prior count mismatch");
  double p = 0.0;
  for (int k = 0; k < num_classes(); ++k)
    p += priors_override[k] * class_density(k, x);
  return p;
}

namespace {

Vector draw_class_point(const GaussianMixtureSpec& spec, int k, CounterRng& rng) {
  Vector x(spec.dim());
  for (int j = 0; j < spec.dim(); ++j)
    x[j] = spec.means(k, j) + std::sqrt(spec.variances(k, j)) * rng.next_normal();
  return x;
}

}  // namespace

LabeledDataset sample_mixture(const GaussianMixtureSpec& spec, int m) {
  detail::require(m >= 1, "empty sample");
  CounterRng rng(spec.seed);
  Matrix features(m, spec.dim());
  Vector labels(m);
  for (int i = 0; i < m; ++i) {
    const int k = rng.next_category(spec.priors);
    labels[i] = k;
    features.row(i) = draw_class_point(spec, k, rng);
  }
  return LabeledDataset(std::move(features), std::move(labels));
}

LabeledDataset stratified_source(const GaussianMixtureSpec& spec, int per_class) {
  detail::require(per_class >= 1, "empty sample");
  CounterRng rng(spec.seed);
  const int K = spec.num_classes();
  Matrix features(static_cast<Eigen::Index>(per_class) * K, spec.dim());
  Vector labels(features.rows());
  Eigen::Index row = 0;
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < per_class; ++i, ++row) {
      labels[row] = k;
      features.row(row) = draw_class_point(spec, k, rng);
    }
  }
  return LabeledDataset(std::move(features), std::move(labels));
}

namespace {

LabeledDataset keep_rows(const LabeledDataset& data,
                         const std::vector<Eigen::Index>& kept) {
  detail::require(!kept.empty(), "bias injector: empty result");
  return data.subset(kept);
}

}  // namespace

LabeledDataset bias_individual_feature(const LabeledDataset& data, int column,
                                       double threshold, double p_low,
                                       double p_high, std::uint64_t seed) {
  detail::require(column >= 0 && column < data.dim(),
                  "bias_individual_feature: column out of range");
  detail::require(p_low >= 0.0 && p_low <= 1.0 && p_high >= 0.0 && p_high <= 1.0,
                  "bias_individual_feature: keep probability outside [0,1]");
  CounterRng rng(seed);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double keep_p = data.features()(i, column) <= threshold ? p_low : p_high;
    if (rng.next_double() < keep_p) kept.push_back(i);
  }
  return keep_rows(data, kept);
}

LabeledDataset bias_joint_feature(const LabeledDataset& data, double gamma,
                                  std::uint64_t seed) {
  detail::require(gamma >= 0.0, "bias_joint_feature: negative gamma");
  const Vector mean = data.features().colwise().mean();
  CounterRng rng(seed);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double d2 = (data.features().row(i).transpose() - mean).squaredNorm();
    if (rng.next_double() < std::exp(-gamma * d2)) kept.push_back(i);
  }
  return keep_rows(data, kept);
}

ShiftedSample subspace_shift(const LabeledDataset& data, const AffineMap& map) {
  detail::require(map.A.rows() == data.dim() && map.A.cols() == data.dim(),
                  "subspace_shift: map dimension mismatch");
  detail::require(map.b.size() == data.dim(),
                  "subspace_shift: offset dimension mismatch");
  Eigen::FullPivLU<Matrix> lu(map.A);
  detail::require(lu.isInvertible(), "subspace_shift: singular map");
  Matrix shifted = (data.features() * map.A.transpose()).rowwise() + map.b.transpose();
  return ShiftedSample{std::move(shifted), data.labels()};
}

ShiftedSample subspace_shift(const LabeledDataset& data, const Monotone1DMap& map) {
  detail::require(data.dim() == 1, "subspace_shift: monotone map needs 1-D features");
  detail::require(map.a > 0.0 && map.c >= 0.0,
                  "subspace_shift: map is not strictly increasing");
  Matrix shifted(data.size(), 1);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double z = data.features()(i, 0);
    shifted(i, 0) = map.a * z + map.b + map.c * z * z * z;
  }
  return ShiftedSample{std::move(shifted), data.labels()};
}

}  // namespace shiftlab::synth
