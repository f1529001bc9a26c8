#include "shiftlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace shiftlab::models {

double gaussian_kernel(const Vector& x, const Vector& y, double sigma) {
  detail::require(sigma > 0.0, "gaussian_kernel: bandwidth must be positive");
  detail::require(x.size() == y.size(), "gaussian_kernel: dimension mismatch");
  return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

KernelSpec::KernelSpec(double sigma) : bandwidth(sigma) {
  detail::require(sigma > 0.0, "KernelSpec: bandwidth must be positive");
}

Matrix gram_matrix(const Matrix& A, const Matrix& B, const KernelSpec& kernel) {
  detail::require(A.cols() == B.cols(), "gram_matrix: dimension mismatch");
  const double inv_two_sigma2 = 1.0 / (2.0 * kernel.bandwidth * kernel.bandwidth);
  const Vector a2 = A.rowwise().squaredNorm();
  const Vector b2 = B.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * A * B.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  return (-inv_two_sigma2 * d2.cwiseMax(0.0)).array().exp();
}

double median_pairwise_distance(const Matrix& A, const Matrix& B) {
  detail::require(A.cols() == B.cols(), "median_pairwise_distance: dimension mismatch");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(A.rows()) * B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      dists.push_back((A.row(i) - B.row(j)).norm());
  std::sort(dists.begin(), dists.end());
  const std::size_t n = dists.size();
  return n % 2 == 1 ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

Standardizer Standardizer::fit(const Matrix& X, const Vector& weights) {
  detail::require(X.rows() == weights.size(), "Standardizer: weight count mismatch");
  const double total = weights.sum();
  detail::require(total > 0.0, "Standardizer: zero total weight");
  Standardizer s;
  s.mean = (X.transpose() * weights) / total;
  Vector var = Vector::Zero(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector d = X.row(i).transpose() - s.mean;
    var += weights[i] * d.cwiseProduct(d);
  }
  var /= total;
  s.scale = var.cwiseSqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j)
    if (s.scale[j] < 1e-300) s.scale[j] = 1.0;
  return s;
}

Standardizer Standardizer::identity(Eigen::Index p) {
  return Standardizer{Vector::Zero(p), Vector::Ones(p)};
}

Matrix Standardizer::apply(const Matrix& X) const {
  return (X.rowwise() - mean.transpose()).array().rowwise() /
         scale.transpose().array();
}

Vector Standardizer::apply(const Vector& x) const {
  return (x - mean).cwiseQuotient(scale);
}

namespace {

// Row-wise softmax of logits with max subtraction.
Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    p.row(i).array() -= p.row(i).maxCoeff();
    p.row(i) = p.row(i).array().exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Matrix with_bias_column(const Matrix& X) {
  Matrix out(X.rows(), X.cols() + 1);
  out.leftCols(X.cols()) = X;
  out.col(X.cols()).setOnes();
  return out;
}

}  // namespace

double softmax_objective(const Matrix& W, const Matrix& X, const IntVector& y,
                         const Vector& weights, double reg) {
  const Matrix Xb = with_bias_column(X);
  const Matrix logits = Xb * W.transpose();
  const double total = weights.sum();
  double nll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double max_logit = logits.row(i).maxCoeff();
    const double lse =
        max_logit + std::log((logits.row(i).array() - max_logit).exp().sum());
    nll += weights[i] * (lse - logits(i, y[i]));
  }
  const double penalty = W.leftCols(W.cols() - 1).squaredNorm();
  return nll / total + reg * penalty;
}

Matrix softmax_gradient(const Matrix& W, const Matrix& X, const IntVector& y,
                        const Vector& weights, double reg) {
  const Matrix Xb = with_bias_column(X);
  const Matrix probs = softmax_rows(Xb * W.transpose());
  Matrix resid = probs - one_hot(y, static_cast<int>(W.rows()));
  resid.array().colwise() *= weights.array();
  Matrix grad = (resid.transpose() * Xb) / weights.sum();
  grad.leftCols(W.cols() - 1) += 2.0 * reg * W.leftCols(W.cols() - 1);
  return grad;
}

SoftmaxClassifier::SoftmaxClassifier(Matrix weights, Standardizer standardizer,
                                     ProbVector class_frequencies, double reg)
    : weights_(std::move(weights)),
      standardizer_(std::move(standardizer)),
      class_frequencies_(std::move(class_frequencies)),
      reg_(reg) {
  detail::require_finite(weights_, "SoftmaxClassifier weights");
  detail::require(weights_.rows() == class_frequencies_.size(),
                  "SoftmaxClassifier: class count mismatch");
}

ProbVector SoftmaxClassifier::predict_proba(const Vector& x) const {
  detail::require(x.size() == dim(), "predict_proba: dimension mismatch");
  const Vector xs = standardizer_.apply(x);
  Vector logits = weights_.leftCols(dim()) * xs + weights_.col(dim());
  logits.array() -= logits.maxCoeff();
  Vector p = logits.array().exp();
  return ProbVector(p / p.sum(), 1e-9);
}

Matrix SoftmaxClassifier::predict_proba_matrix(const Matrix& X) const {
  detail::require(X.cols() == dim(), "predict_proba: dimension mismatch");
  const Matrix Xs = with_bias_column(standardizer_.apply(X));
  return softmax_rows(Xs * weights_.transpose());
}

int SoftmaxClassifier::predict(const Vector& x) const {
  Eigen::Index argmax = 0;
  predict_proba(x).values().maxCoeff(&argmax);
  return static_cast<int>(argmax);
}

IntVector SoftmaxClassifier::predict_matrix(const Matrix& X) const {
  const Matrix probs = predict_proba_matrix(X);
  IntVector out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::Index argmax = 0;
    probs.row(i).maxCoeff(&argmax);
    out[i] = static_cast<int>(argmax);
  }
  return out;
}

SoftmaxClassifier fit_softmax(const LabeledDataset& data, const Vector& weights,
                              double reg, const SoftmaxOptions& options) {
  detail::require(weights.size() == data.size(), "fit_softmax: weight count mismatch");
  detail::require(weights.minCoeff() >= 0.0, "fit_softmax: negative weight");
  detail::require(weights.sum() > 0.0, "fit_softmax: all weights zero");
  detail::require(reg >= 0.0, "fit_softmax: negative regularization");

  const IntVector y = data.class_labels();
  const int K = y.maxCoeff() + 1;
  Vector class_mass = Vector::Zero(K);
  for (Eigen::Index i = 0; i < y.size(); ++i) class_mass[y[i]] += weights[i];
  int present = 0;
  for (int k = 0; k < K; ++k) present += class_mass[k] > 0.0 ? 1 : 0;
  detail::require(present >= 2, "degenerate labels");

  const Standardizer standardizer =
      options.standardize ? Standardizer::fit(data.features(), weights)
                          : Standardizer::identity(data.dim());
  const Matrix Xs = standardizer.apply(data.features());

  // Bias starts at the log class frequencies, the optimum of the
  // feature-free problem.
  Matrix W = Matrix::Zero(K, data.dim() + 1);
  for (int k = 0; k < K; ++k)
    W(k, data.dim()) = std::log(std::max(class_mass[k] / weights.sum(), 1e-12));
  double objective = softmax_objective(W, Xs, y, weights, reg);
  double step = 1.0;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Matrix grad = softmax_gradient(W, Xs, y, weights, reg);
    const double grad_norm2 = grad.squaredNorm();
    if (std::sqrt(grad_norm2) < options.grad_tol) break;

    // Backtracking line search (Armijo), warm-started from the last step.
    step = std::min(step * 2.0, 1e6);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Matrix candidate = W - step * grad;
      const double cand_obj = softmax_objective(candidate, Xs, y, weights, reg);
      if (cand_obj <= objective - 1e-4 * step * grad_norm2) {
        W = candidate;
        objective = cand_obj;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }

  return SoftmaxClassifier(W, standardizer,
                           ProbVector::normalized(class_mass), reg);
}

SoftmaxClassifier fit_softmax(const LabeledDataset& data, double reg,
                              const SoftmaxOptions& options) {
  return fit_softmax(data, data.weights(), reg, options);
}

RidgeModel::RidgeModel(Vector w, double b, double eps_reg)
    : w_(std::move(w)), b_(b), eps_reg_(eps_reg) {
  detail::require_finite(w_, "RidgeModel slope");
  detail::require(std::isfinite(b_), "RidgeModel: non-finite intercept");
  detail::require(eps_reg_ > 0.0, "RidgeModel: regularization must be positive");
}

double RidgeModel::predict(const Vector& x) const {
  detail::require(x.size() == w_.size(), "RidgeModel: dimension mismatch");
  return w_.dot(x) + b_;
}

Vector RidgeModel::predict_matrix(const Matrix& X) const {
  detail::require(X.cols() == w_.size(), "RidgeModel: dimension mismatch");
  return (X * w_).array() + b_;
}

RidgeModel fit_ridge(const Matrix& X, const Vector& y, const Vector& row_weights,
                     double eps_reg, const RidgeOptions& options) {
  detail::require(eps_reg > 0.0, "fit_ridge: regularization must be positive");
  detail::require(X.rows() == y.size(), "fit_ridge: target count mismatch");
  detail::require(X.rows() == row_weights.size(), "fit_ridge: weight count mismatch");
  detail::require(row_weights.minCoeff() >= 0.0, "fit_ridge: negative weight");
  const double total = row_weights.sum();
  detail::require(total > 0.0, "fit_ridge: all weights zero");

  const Standardizer standardizer =
      options.standardize ? Standardizer::fit(X, row_weights)
                          : Standardizer::identity(X.cols());
  const Matrix Xb = with_bias_column(standardizer.apply(X));
  const Eigen::Index p = X.cols();

  // (Xb^T R Xb / total + eps_reg D) theta = Xb^T R y / total, D = diag(1..1,0).
  Matrix lhs = (Xb.transpose() * row_weights.asDiagonal() * Xb) / total;
  lhs.topLeftCorner(p, p) += eps_reg * Matrix::Identity(p, p);
  const Vector rhs = (Xb.transpose() * row_weights.cwiseProduct(y)) / total;
  const Vector theta = lhs.ldlt().solve(rhs);

  const double residual = (lhs * theta - rhs).norm() / (rhs.norm() + 1e-300);
  if (residual > 1e-8)
    throw std::runtime_error("fit_ridge: normal-equation solve failed");

  // Map coefficients back to raw feature space.
  const Vector w_std = theta.head(p);
  const Vector w_raw = w_std.cwiseQuotient(standardizer.scale);
  const double b_raw = theta[p] - w_raw.dot(standardizer.mean);
  return RidgeModel(w_raw, b_raw, eps_reg);
}

}  // namespace shiftlab::models
