#include "shiftlab/core.hpp"

#include <cmath>
#include <vector>

namespace shiftlab {

namespace detail {

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

void require_finite(const Eigen::Ref<const Matrix>& m, const std::string& what) {
  if (!m.allFinite()) throw std::invalid_argument(what + ": non-finite entries");
}

}  // namespace detail

ProbVector::ProbVector(Vector values, double tol) : values_(std::move(values)) {
  detail::require(values_.size() >= 1, "ProbVector: empty");
  detail::require_finite(values_, "ProbVector");
  detail::require(values_.minCoeff() >= 0.0, "ProbVector: negative entry");
  detail::require(std::abs(values_.sum() - 1.0) <= tol,
                  "ProbVector: entries do not sum to 1");
}

ProbVector ProbVector::normalized(Vector mass) {
  detail::require(mass.size() >= 1, "ProbVector: empty");
  detail::require_finite(mass, "ProbVector");
  detail::require(mass.minCoeff() >= 0.0, "ProbVector: negative entry");
  const double total = mass.sum();
  detail::require(total > 0.0, "ProbVector: zero total mass");
  return ProbVector(mass / total, 1e-9);
}

ProbVector ProbVector::uniform(int k) {
  detail::require(k >= 1, "ProbVector: empty");
  return ProbVector(Vector::Constant(k, 1.0 / k), 1e-9);
}

double ProbVector::linf_distance(const ProbVector& other) const {
  detail::require(size() == other.size(), "ProbVector: size mismatch");
  return (values_ - other.values_).cwiseAbs().maxCoeff();
}

DiscreteMeasure::DiscreteMeasure(Matrix support, Vector weights, double tol)
    : support_(std::move(support)), weights_(std::move(weights)) {
  detail::require(support_.rows() >= 1, "empty sample");
  detail::require(support_.rows() == weights_.size(),
                  "DiscreteMeasure: support/weight size mismatch");
  detail::require_finite(support_, "DiscreteMeasure support");
  detail::require_finite(weights_, "DiscreteMeasure weights");
  detail::require(weights_.minCoeff() > 0.0, "DiscreteMeasure: nonpositive weight");
  detail::require(std::abs(weights_.sum() - 1.0) <= tol,
                  "DiscreteMeasure: weights do not sum to 1");
}

DiscreteMeasure DiscreteMeasure::normalized(Matrix support, Vector weights) {
  detail::require(weights.size() >= 1, "empty sample");
  const double total = weights.sum();
  detail::require(total > 0.0, "DiscreteMeasure: zero total mass");
  return DiscreteMeasure(std::move(support), weights / total, 1e-9);
}

LabeledDataset::LabeledDataset(Matrix features, Vector labels)
    : LabeledDataset(std::move(features), std::move(labels), Vector()) {}

LabeledDataset::LabeledDataset(Matrix features, Vector labels, Vector weights)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      weights_(std::move(weights)) {
  detail::require(features_.rows() >= 1, "empty sample");
  detail::require(features_.cols() >= 1, "LabeledDataset: no features");
  detail::require(labels_.size() == features_.rows(),
                  "LabeledDataset: label count mismatch");
  if (weights_.size() == 0) weights_ = Vector::Ones(features_.rows());
  detail::require(weights_.size() == features_.rows(),
                  "LabeledDataset: weight count mismatch");
  detail::require_finite(features_, "LabeledDataset features");
  detail::require_finite(labels_, "LabeledDataset labels");
  detail::require_finite(weights_, "LabeledDataset weights");
  detail::require(weights_.minCoeff() >= 0.0, "LabeledDataset: negative weight");
}

int LabeledDataset::class_label(Eigen::Index i) const {
  const double v = labels_[i];
  const double r = std::round(v);
  detail::require(std::abs(v - r) < 1e-9 && r >= 0.0,
                  "LabeledDataset: label is not a class index");
  return static_cast<int>(r);
}

IntVector LabeledDataset::class_labels() const {
  IntVector out(size());
  for (Eigen::Index i = 0; i < size(); ++i) out[i] = class_label(i);
  return out;
}

int LabeledDataset::num_classes() const {
  return class_labels().maxCoeff() + 1;
}

LabeledDataset LabeledDataset::subset(const std::vector<Eigen::Index>& rows) const {
  detail::require(!rows.empty(), "empty sample");
  Matrix f(rows.size(), dim());
  Vector l(rows.size());
  Vector w(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    f.row(r) = features_.row(rows[r]);
    l[r] = labels_[rows[r]];
    w[r] = weights_[rows[r]];
  }
  return LabeledDataset(std::move(f), std::move(l), std::move(w));
}

DiscreteMeasure empirical_measure(const Matrix& points) {
  detail::require(points.rows() >= 1, "empty sample");
  detail::require_finite(points, "empirical_measure");
  const Eigen::Index n = points.rows();
  return DiscreteMeasure(points, Vector::Constant(n, 1.0 / n), 1e-9);
}

Matrix one_hot(const IntVector& labels, int K) {
  detail::require(K >= 1, "one_hot: K must be positive");
  Matrix out = Matrix::Zero(labels.size(), K);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    detail::require(labels[i] >= 0 && labels[i] < K, "one_hot: label out of range");
    out(i, labels[i]) = 1.0;
  }
  return out;
}

}  // namespace shiftlab
