#pragma once

#include "shiftlab/core.hpp"

#include <optional>

namespace shiftlab::models {

/// Gaussian kernel exp(-||x - y||^2 / (2 sigma^2)).
double gaussian_kernel(const Vector& x, const Vector& y, double sigma);

struct KernelSpec {
  double bandwidth;

  explicit KernelSpec(double sigma);
  double operator()(const Vector& x, const Vector& y) const {
    return gaussian_kernel(x, y, bandwidth);
  }
};

/// Gram matrix K(a_i, b_j) for row samples A (n x d) and B (m x d).
Matrix gram_matrix(const Matrix& A, const Matrix& B, const KernelSpec& kernel);

/// Median of pairwise Euclidean distances between rows of A and B (distinct
/// pairs, zero distances included); the usual bandwidth default.
double median_pairwise_distance(const Matrix& A, const Matrix& B);

/// Per-column affine transform fitted from weighted data; constant columns
/// get unit scale. Applied inside the learners when standardize is on.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& X, const Vector& weights);
  static Standardizer identity(Eigen::Index p);
  Matrix apply(const Matrix& X) const;
  Vector apply(const Vector& x) const;
};

struct SoftmaxOptions {
  bool standardize = true;
  int max_iter = 5000;
  double grad_tol = 1e-7;
};

/// Multinomial softmax classifier with bias column, trained by full-batch
/// gradient descent with backtracking line search (deterministic).
class SoftmaxClassifier {
 public:
  SoftmaxClassifier(Matrix weights, Standardizer standardizer,
                    ProbVector class_frequencies, double reg);

  ProbVector predict_proba(const Vector& x) const;
  /// Row i = class probabilities for X.row(i).
  Matrix predict_proba_matrix(const Matrix& X) const;
  int predict(const Vector& x) const;
  IntVector predict_matrix(const Matrix& X) const;

  int num_classes() const { return static_cast<int>(weights_.rows()); }
  Eigen::Index dim() const { return weights_.cols() - 1; }
  /// K x (p+1); last column is the bias.
  const Matrix& weights() const { return weights_; }
  /// Weighted label frequencies of the training sample (the source priors).
  const ProbVector& class_frequencies() const { return class_frequencies_; }
  double regularization() const { return reg_; }

 private:
  Matrix weights_;
  Standardizer standardizer_;
  ProbVector class_frequencies_;
  double reg_;
};

/// Weighted cross-entropy objective used by fit_softmax:
///   (1/sum w) sum_i w_i * (-log p(y_i | x_i))  +  reg * ||W_features||_F^2
/// with the bias column unpenalized. X is raw (unstandardized) here.
double softmax_objective(const Matrix& W, const Matrix& X, const IntVector& y,
                         const Vector& weights, double reg);
Matrix softmax_gradient(const Matrix& W, const Matrix& X, const IntVector& y,
                        const Vector& weights, double reg);

SoftmaxClassifier fit_softmax(const LabeledDataset& data, const Vector& weights,
                              double reg, const SoftmaxOptions& options = {});
SoftmaxClassifier fit_softmax(const LabeledDataset& data, double reg,
                              const SoftmaxOptions& options = {});

struct RidgeOptions {
  bool standardize = true;
};

/// Linear model y = w . x + b.
class RidgeModel {
 public:
  RidgeModel(Vector w, double b, double eps_reg);

  double predict(const Vector& x) const;
  Vector predict_matrix(const Matrix& X) const;

  const Vector& slope() const { return w_; }
  double intercept() const { return b_; }
  double regularization() const { return eps_reg_; }

 private:
  Vector w_;
  double b_;
  double eps_reg_;
};

/// Weighted Ridge via the normal equations (exact direct solve):
///   min_{w,b} (1/sum r) sum_i r_i (y_i - w.x_i - b)^2 + eps_reg ||w||^2
/// With standardize on, the penalty applies to the coefficients of the
/// standardized features; the returned model is expressed in raw space.
RidgeModel fit_ridge(const Matrix& X, const Vector& y, const Vector& row_weights,
                     double eps_reg, const RidgeOptions& options = {});

}  // namespace shiftlab::models
