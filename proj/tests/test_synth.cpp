#include "doctest.h"

#include "shiftlab/synth.hpp"

#include <vector>

using namespace shiftlab;
using namespace shiftlab::synth;

namespace {

GaussianMixtureSpec two_class_1d(double prior0, std::uint64_t seed) {
  Matrix means(2, 1), vars(2, 1);
  means << 0.0, 3.0;
  vars << 1.0, 1.0;
  Vector p(2);
  p << prior0, 1.0 - prior0;
  return GaussianMixtureSpec(means, vars, ProbVector(p, 1e-9), seed);
}

}  // namespace

TEST_CASE("sample_mixture respects degenerate priors") {
  Matrix means(2, 1), vars(2, 1);
  means << 0.0, 3.0;
  vars << 1.0, 1.0;
  Vector p(2);
  p << 1.0, 0.0;
  const GaussianMixtureSpec spec(means, vars, ProbVector(p, 1e-9), 5);
  const LabeledDataset data = sample_mixture(spec, 50);
  CHECK(data.labels().maxCoeff() == 0.0);
}

TEST_CASE("sample_mixture empirical priors concentrate") {
  Matrix means(2, 1), vars(2, 1);
  means << 0.0, 3.0;
  vars << 1.0, 1.0;
  Vector p(2);
  p << 0.3, 0.7;
  const GaussianMixtureSpec spec(means, vars, ProbVector(p, 1e-9), 9);
  const LabeledDataset data = sample_mixture(spec, 10000);
  const double frac1 = data.labels().sum() / data.size();
  CHECK(std::abs(frac1 - 0.7) < 0.02);
}

TEST_CASE("sample_mixture is seed-deterministic") {
  const GaussianMixtureSpec spec = two_class_1d(0.5, 123);
  const LabeledDataset a = sample_mixture(spec, 100);
  const LabeledDataset b = sample_mixture(spec, 100);
  CHECK(a.features() == b.features());
  CHECK(a.labels() == b.labels());
}

TEST_CASE("stratified_source yields exact per-class counts") {
  const GaussianMixtureSpec spec = two_class_1d(0.5, 3);
  const LabeledDataset data = stratified_source(spec, 5);
  CHECK(data.size() == 10);
  CHECK(data.labels().sum() == doctest::Approx(5.0));

  Matrix means(3, 2), vars(3, 2);
  means.setRandom();
  vars.setOnes();
  const GaussianMixtureSpec spec3(means, vars, ProbVector::uniform(3), 4);
  const LabeledDataset data3 = stratified_source(spec3, 4);
  std::vector<int> histogram(3, 0);
  for (Eigen::Index i = 0; i < data3.size(); ++i) ++histogram[data3.class_label(i)];
  for (int k = 0; k < 3; ++k) CHECK(histogram[k] == 4);
}

TEST_CASE("bias_individual_feature keep rates") {
  // Uniform integers 1..10 in the biased column.
  const int m = 10000;
  Matrix X(m, 1);
  Vector y(m);
  CounterRng rng(77);
  for (int i = 0; i < m; ++i) {
    X(i, 0) = 1.0 + static_cast<double>(rng.next_below(10));
    y[i] = 0.0;
  }
  const LabeledDataset data(X, y);

  const LabeledDataset kept = bias_individual_feature(data, 0, 5.0, 0.2, 0.8, 1);
  const double frac = static_cast<double>(kept.size()) / m;
  CHECK(std::abs(frac - 0.5) < 0.02);

  // Keep probability one leaves the dataset unchanged.
  const LabeledDataset all = bias_individual_feature(data, 0, 5.0, 1.0, 1.0, 1);
  CHECK(all.size() == data.size());
  CHECK(all.features() == data.features());

  // All values below threshold with zero keep probability: empty result.
  Matrix low = Matrix::Constant(10, 1, 2.0);
  Vector ylow = Vector::Zero(10);
  CHECK_THROWS_AS(bias_individual_feature(LabeledDataset(low, ylow), 0, 5.0, 0.0,
                                          0.8, 1),
                  std::invalid_argument);
}

TEST_CASE("bias_joint_feature shrinks spread and keeps the mean point") {
  // gamma = 0 keeps everything.
  const GaussianMixtureSpec spec = two_class_1d(0.5, 21);
  const LabeledDataset data = sample_mixture(spec, 500);
  const LabeledDataset all = bias_joint_feature(data, 0.0, 3);
  CHECK(all.size() == data.size());

  // Variance shrinks under the centered keep rule (median over 20 seeds).
  int shrunk = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix X(2000, 1);
    CounterRng rng(seed + 100);
    for (int i = 0; i < 2000; ++i) X(i, 0) = rng.next_normal();
    Vector y = Vector::Zero(2000);
    const LabeledDataset sample(X, y);
    const LabeledDataset kept = bias_joint_feature(sample, 0.5, seed);
    const auto variance = [](const Matrix& f) {
      const double mean = f.col(0).mean();
      return (f.col(0).array() - mean).square().mean();
    };
    if (variance(kept.features()) < variance(sample.features())) ++shrunk;
  }
  CHECK(shrunk >= 11);
}

TEST_CASE("bias injectors only drop rows") {
  const GaussianMixtureSpec spec = two_class_1d(0.5, 8);
  const LabeledDataset data = sample_mixture(spec, 300);
  const LabeledDataset kept = bias_joint_feature(data, 0.3, 4);
  // Every surviving row appears verbatim in the original, in order.
  Eigen::Index cursor = 0;
  for (Eigen::Index i = 0; i < kept.size(); ++i) {
    bool found = false;
    for (; cursor < data.size(); ++cursor) {
      if (data.features().row(cursor) == kept.features().row(i) &&
          data.labels()[cursor] == kept.labels()[i]) {
        found = true;
        ++cursor;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("subspace_shift affine") {
  const GaussianMixtureSpec spec = two_class_1d(0.5, 31);
  const LabeledDataset data = sample_mixture(spec, 50);

  AffineMap identity{Matrix::Identity(1, 1), Vector::Zero(1)};
  CHECK(subspace_shift(data, identity).features == data.features());

  AffineMap shift{Matrix::Identity(1, 1), Vector::Constant(1, 2.0)};
  const ShiftedSample shifted = subspace_shift(data, shift);
  CHECK(shifted.features.col(0).mean() ==
        doctest::Approx(data.features().col(0).mean() + 2.0));
  CHECK(shifted.hidden_labels == data.labels());

  // Scaling doubles pairwise distances exactly.
  Matrix X2 = Matrix::Random(20, 2);
  Vector y2 = Vector::Zero(20);
  const LabeledDataset d2(X2, y2);
  AffineMap scale{2.0 * Matrix::Identity(2, 2), Vector::Zero(2)};
  const ShiftedSample s2 = subspace_shift(d2, scale);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK((s2.features.row(i) - s2.features.row(j)).norm() ==
            doctest::Approx(2.0 * (X2.row(i) - X2.row(j)).norm()));

  AffineMap singular{Matrix::Zero(1, 1), Vector::Zero(1)};
  CHECK_THROWS_AS(subspace_shift(data, singular), std::invalid_argument);
}

TEST_CASE("subspace_shift monotone cubic preserves order") {
  Matrix X(4, 1);
  X << -2.0, -0.5, 0.5, 2.0;
  Vector y = Vector::Zero(4);
  const LabeledDataset data(X, y);
  const ShiftedSample out = subspace_shift(data, Monotone1DMap{1.0, 0.5, 0.2});
  for (int i = 0; i + 1 < 4; ++i) CHECK(out.features(i, 0) < out.features(i + 1, 0));
  CHECK_THROWS_AS(subspace_shift(data, Monotone1DMap{-1.0, 0.0, 0.0}),
                  std::invalid_argument);
}
