#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace shiftlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

inline constexpr double kSimplexTol = 1e-12;

/// Probability vector over K classes. The constructor rejects vectors that
/// are not on the simplex; use normalized() to build from unnormalized mass.
class ProbVector {
 public:
  explicit ProbVector(Vector values, double tol = kSimplexTol);

  /// Renormalizes nonnegative mass to sum 1 (throws on zero total mass).
  static ProbVector normalized(Vector mass);

  /// Uniform distribution over k classes.
  static ProbVector uniform(int k);

  const Vector& values() const { return values_; }
  double operator[](Eigen::Index k) const { return values_[k]; }
  Eigen::Index size() const { return values_.size(); }

  /// Largest absolute componentwise difference.
  double linf_distance(const ProbVector& other) const;

 private:
  Vector values_;
};

/// Discrete measure: n support points in R^d with positive weights summing
/// to 1. Support points need not be distinct (multiset semantics).
class DiscreteMeasure {
 public:
  DiscreteMeasure(Matrix support, Vector weights, double tol = kSimplexTol);

  static DiscreteMeasure normalized(Matrix support, Vector weights);

  const Matrix& support() const { return support_; }
  const Vector& weights() const { return weights_; }
  Eigen::Index size() const { return support_.rows(); }
  Eigen::Index dim() const { return support_.cols(); }

 private:
  Matrix support_;
  Vector weights_;
};

/// Sample of m observations: feature matrix (m x p), labels (class indices
/// stored as doubles, or real regression targets) and per-row weights.
/// Immutable after construction.
class LabeledDataset {
 public:
  LabeledDataset(Matrix features, Vector labels);
  LabeledDataset(Matrix features, Vector labels, Vector weights);

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  const Vector& weights() const { return weights_; }

  Eigen::Index size() const { return features_.rows(); }
  Eigen::Index dim() const { return features_.cols(); }

  /// Label i as a class index; throws if the stored value is not integral
  /// or negative.
  int class_label(Eigen::Index i) const;

  /// All labels as class indices.
  IntVector class_labels() const;

  /// max class index + 1.
  int num_classes() const;

  /// Row-subset copy (keeps weights).
  LabeledDataset subset(const std::vector<Eigen::Index>& rows) const;

 private:
  Matrix features_;
  Vector labels_;
  Vector weights_;
};

/// Uniform empirical distribution over the given points.
DiscreteMeasure empirical_measure(const Matrix& points);

/// m x K indicator matrix with entry (i,k)=1 iff labels[i]==k.
Matrix one_hot(const IntVector& labels, int K);

namespace detail {
void require(bool cond, const std::string& message);
void require_finite(const Eigen::Ref<const Matrix>& m, const std::string& what);
}  // namespace detail

}  // namespace shiftlab
