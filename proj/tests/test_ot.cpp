#include "doctest.h"

#include "shiftlab/ot.hpp"
#include "shiftlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace shiftlab;
using namespace shiftlab::ot;

namespace {

// Minimum over all n! assignment plans for uniform equal-size marginals.
double permutation_oracle(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost(i, perm[i]);
    best = std::min(best, total / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matrix random_cost(CounterRng& rng, int r, int s) {
  Matrix C(r, s);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < s; ++j) C(i, j) = rng.next_double() * 3.0;
  return C;
}

Vector random_weights(CounterRng& rng, int n) {
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.05 + rng.next_double();
  return w / w.sum();
}

DiscreteMeasure random_measure(CounterRng& rng, int n, int d) {
  Matrix pts(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) pts(i, j) = rng.next_normal();
  return DiscreteMeasure(pts, random_weights(rng, n), 1e-9);
}

}  // namespace

TEST_CASE("push_forward moves support and keeps weights") {
  CounterRng rng(3);
  const DiscreteMeasure mu = random_measure(rng, 5, 2);

  const auto identity = [](const Vector& z) { return z; };
  const DiscreteMeasure same = push_forward(mu, identity);
  CHECK(same.support() == mu.support());
  CHECK(same.weights() == mu.weights());

  Vector offset(2);
  offset << 1.5, -2.0;
  const DiscreteMeasure moved =
      push_forward(mu, [&](const Vector& z) { return Vector(z + offset); });
  CHECK(((moved.support().rowwise() - offset.transpose()) - mu.support())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK(moved.weights() == mu.weights());

  // Two points mapped to one location stay separate points.
  Matrix two(2, 1);
  two << -1.0, 1.0;
  Vector w(2);
  w << 0.25, 0.75;
  const DiscreteMeasure collapsed = push_forward(
      DiscreteMeasure(two, w, 1e-9),
      [](const Vector& z) { return Vector(z.cwiseAbs()); });
  CHECK(collapsed.size() == 2);
  CHECK(collapsed.support()(0, 0) == doctest::Approx(1.0));
  CHECK(collapsed.support()(1, 0) == doctest::Approx(1.0));
  CHECK(collapsed.weights() == w);
}

TEST_CASE("plan_cost hand values") {
  TransportPlan diag{0.5 * Matrix::Identity(2, 2), ProbVector::uniform(2),
                     ProbVector::uniform(2), true};

  CHECK(plan_cost(diag, CostMatrix(Matrix::Zero(2, 2))) == doctest::Approx(0.0));

  Matrix C(2, 2);
  C << 1, 9, 9, 1;
  CHECK(plan_cost(diag, CostMatrix(C)) == doctest::Approx(1.0));

  CHECK_THROWS_AS(plan_cost(diag, CostMatrix(Matrix::Zero(3, 2))),
                  std::invalid_argument);
}

TEST_CASE("solve_exact trivial and shifted-grid instances") {
  // Single atom.
  Matrix c11(1, 1);
  c11 << 4.2;
  const TransportPlan single =
      solve_exact(Vector::Ones(1), Vector::Ones(1), CostMatrix(c11));
  CHECK(single.coupling(0, 0) == doctest::Approx(1.0));
  CHECK(plan_cost(single, CostMatrix(c11)) == doctest::Approx(4.2));

  // Uniform mass on {0,1,2} to {10,11,12} with |z - z'| cost: the identity
  // matching is optimal and costs 10.
  Matrix C(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) C(i, j) = std::abs(i - (10.0 + j));
  const Vector third = Vector::Constant(3, 1.0 / 3.0);
  const TransportPlan plan = solve_exact(third, third, CostMatrix(C));
  plan.validate();
  CHECK(plan_cost(plan, CostMatrix(C)) == doctest::Approx(10.0).epsilon(1e-12));
  for (int i = 0; i < 3; ++i)
    CHECK(plan.coupling(i, i) == doctest::Approx(1.0 / 3.0));

  // Mismatched totals are rejected.
  Vector bad(3);
  bad << 0.5, 0.25, 0.5;
  CHECK_THROWS_WITH_AS(solve_exact(bad, third, CostMatrix(C)),
                       "solve_exact: infeasible marginals", std::invalid_argument);
}

TEST_CASE("solve_exact equals the permutation oracle on uniform instances") {
  CounterRng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(5));  // up to 6
    const Matrix C = random_cost(rng, n, n);
    const Vector uniform = Vector::Constant(n, 1.0 / n);
    const TransportPlan plan = solve_exact(uniform, uniform, CostMatrix(C));
    plan.validate();
    CHECK(plan_cost(plan, CostMatrix(C)) ==
          doctest::Approx(permutation_oracle(C)).epsilon(1e-10));
  }
}

TEST_CASE("solve_exact handles rectangular random-weight instances") {
  CounterRng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int r = 2 + static_cast<int>(rng.next_below(5));
    const int s = 2 + static_cast<int>(rng.next_below(5));
    const Matrix C = random_cost(rng, r, s);
    const Vector alpha = random_weights(rng, r);
    const Vector beta = random_weights(rng, s);
    const TransportPlan plan = solve_exact(alpha, beta, CostMatrix(C));
    plan.validate(1e-10);
    CHECK(plan.converged);

    // Optimality certificate: any feasible product-form competitor is no
    // cheaper along cost-decreasing vertex swaps; checked cheaply against
    // the independent-coupling baseline.
    TransportPlan product{alpha * beta.transpose(), ProbVector(alpha, 1e-9),
                          ProbVector(beta, 1e-9), true};
    CHECK(plan_cost(plan, CostMatrix(C)) <=
          plan_cost(product, CostMatrix(C)) + 1e-10);
  }
}

TEST_CASE("solve_sinkhorn basics") {
  Matrix c11(1, 1);
  c11 << 2.0;
  for (const double eps : {1e-3, 0.1, 10.0}) {
    const TransportPlan plan =
        solve_sinkhorn(Vector::Ones(1), Vector::Ones(1), CostMatrix(c11), eps);
    CHECK(plan.converged);
    CHECK(plan.coupling(0, 0) == doctest::Approx(1.0));
  }

  CounterRng rng(13);
  const Matrix C = random_cost(rng, 10, 7);
  const Vector alpha = random_weights(rng, 10);
  const Vector beta = random_weights(rng, 7);
  const TransportPlan plan = solve_sinkhorn(alpha, beta, CostMatrix(C));
  CHECK(plan.converged);
  const double row_violation =
      (plan.coupling.rowwise().sum() - alpha).cwiseAbs().sum();
  const double col_violation =
      (plan.coupling.colwise().sum().transpose() - beta).cwiseAbs().sum();
  CHECK(row_violation + col_violation < 1e-6);

  // Iteration starvation returns the flagged last iterate.
  const TransportPlan starved =
      solve_sinkhorn(alpha, beta, CostMatrix(C), 0.05, 1, 1e-12);
  CHECK_FALSE(starved.converged);
}

TEST_CASE("solve_sinkhorn approaches the exact cost as epsilon shrinks") {
  CounterRng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix C = random_cost(rng, 4, 4);
    const Vector uniform = Vector::Constant(4, 0.25);
    const double exact_cost =
        plan_cost(solve_exact(uniform, uniform, CostMatrix(C)), CostMatrix(C));
    // At this epsilon the alternating projections approach the constraint
    // set tangentially (violation ~ 1/iterations), so the budget is large.
    const double eps = 1e-3 * C.mean();
    const TransportPlan entropic =
        solve_sinkhorn(uniform, uniform, CostMatrix(C), eps, 2000000, 5e-7);
    const double violation =
        (entropic.coupling.rowwise().sum() - uniform).cwiseAbs().sum() +
        (entropic.coupling.colwise().sum().transpose() - uniform)
            .cwiseAbs()
            .sum();
    CHECK(violation < 1e-6);
    const double cost = plan_cost(entropic, CostMatrix(C));
    // Below-optimum slack is bounded by the marginal violation times the
    // largest cost entry.
    CHECK(cost >= exact_cost - 1e-6 * C.maxCoeff());
    CHECK(cost - exact_cost < 1e-3 * C.mean());
  }
}

TEST_CASE("wasserstein distance properties") {
  CounterRng rng(19);
  const DiscreteMeasure mu = random_measure(rng, 5, 2);
  CHECK(wasserstein(mu, mu) == doctest::Approx(0.0).epsilon(1e-12));

  // Point masses: W_p reduces to the ground distance for any p.
  Matrix za(1, 2), zb(1, 2);
  za << 0.0, 0.0;
  zb << 3.0, 4.0;
  const DiscreteMeasure da(za, Vector::Ones(1), 1e-9);
  const DiscreteMeasure db(zb, Vector::Ones(1), 1e-9);
  for (const double p : {1.0, 2.0, 3.0}) {
    CHECK(wasserstein(da, db, euclidean_distance, p) == doctest::Approx(5.0));
  }
  CHECK_THROWS_AS(wasserstein(da, db, euclidean_distance, 0.5),
                  std::invalid_argument);

  // Symmetry and translation invariance.
  const DiscreteMeasure nu = random_measure(rng, 4, 2);
  const double w_mu_nu = wasserstein(mu, nu);
  CHECK(w_mu_nu == doctest::Approx(wasserstein(nu, mu)).epsilon(1e-9));

  Vector shift(2);
  shift << 0.7, -1.1;
  const auto translate = [&](const Vector& z) { return Vector(z + shift); };
  CHECK(wasserstein(push_forward(mu, translate), push_forward(nu, translate)) ==
        doctest::Approx(w_mu_nu).epsilon(1e-9));

  // Triangle inequality on random triples.
  for (int trial = 0; trial < 25; ++trial) {
    const DiscreteMeasure a = random_measure(rng, 5, 2);
    const DiscreteMeasure b = random_measure(rng, 5, 2);
    const DiscreteMeasure c = random_measure(rng, 5, 2);
    CHECK(wasserstein(a, c) <= wasserstein(a, b) + wasserstein(b, c) + 1e-8);
  }
}

TEST_CASE("bijective plans agree with the induced point map") {
  // Uniform equal-size instances whose optimum is a permutation: the plan
  // cost equals the push-forward cost of the induced map.
  CounterRng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_below(3));
    Matrix src(n, 2), dst(n, 2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) {
        src(i, j) = rng.next_normal();
        dst(i, j) = rng.next_normal() + 2.0;
      }
    const CostMatrix C = pairwise_cost(src, dst);
    const Vector uniform = Vector::Constant(n, 1.0 / n);
    const TransportPlan plan = solve_exact(uniform, uniform, CostMatrix(C));

    // Collect the support; skip instances with split mass (ties).
    std::vector<int> image(n, -1);
    bool bijection = true;
    for (int i = 0; i < n && bijection; ++i)
      for (int j = 0; j < n; ++j)
        if (plan.coupling(i, j) > 1e-12) {
          if (image[i] >= 0)
            bijection = false;
          else
            image[i] = j;
        }
    if (!bijection) continue;
    double map_cost = 0.0;
    for (int i = 0; i < n; ++i)
      map_cost += (src.row(i) - dst.row(image[i])).norm() / n;
    CHECK(map_cost == doctest::Approx(plan_cost(plan, C)).epsilon(1e-10));
  }
}
