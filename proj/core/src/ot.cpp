#include "shiftlab/ot.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace shiftlab::ot {

double euclidean_distance(const Vector& a, const Vector& b) {
  detail::require(a.size() == b.size(), "euclidean_distance: dimension mismatch");
  return (a - b).norm();
}

CostMatrix::CostMatrix(Matrix values_) : values(std::move(values_)) {
  detail::require(values.rows() >= 1 && values.cols() >= 1, "CostMatrix: empty");
  detail::require_finite(values, "CostMatrix");
  detail::require(values.minCoeff() >= 0.0, "CostMatrix: negative cost");
}

CostMatrix pairwise_cost(const Matrix& A, const Matrix& B,
                         const GroundMetric& metric, double power) {
  detail::require(A.cols() == B.cols(), "pairwise_cost: dimension mismatch");
  Matrix C(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      C(i, j) = std::pow(metric(A.row(i), B.row(j)), power);
  return CostMatrix(std::move(C));
}

void TransportPlan::validate(double tol) const {
  detail::require(coupling.rows() == row_marginal.size() &&
                      coupling.cols() == col_marginal.size(),
                  "TransportPlan: shape mismatch");
  detail::require_finite(coupling, "TransportPlan coupling");
  detail::require(coupling.minCoeff() >= -tol, "TransportPlan: negative mass");
  const Vector row_sums = coupling.rowwise().sum();
  const Vector col_sums = coupling.colwise().sum();
  detail::require(
      (row_sums - row_marginal.values()).cwiseAbs().maxCoeff() <= tol,
      "TransportPlan: row marginal violated");
  detail::require(
      (col_sums - col_marginal.values()).cwiseAbs().maxCoeff() <= tol,
      "TransportPlan: column marginal violated");
  detail::require(std::abs(total_mass() - 1.0) <= tol * coupling.rows(),
                  "TransportPlan: total mass is not 1");
}

DiscreteMeasure push_forward(const DiscreteMeasure& mu,
                             const std::function<Vector(const Vector&)>& T) {
  Matrix moved(mu.size(), mu.dim());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const Vector image = T(mu.support().row(i));
    detail::require(image.size() == mu.dim(), "push_forward: map changes dimension");
    moved.row(i) = image;
  }
  return DiscreteMeasure(std::move(moved), mu.weights(), 1e-9);
}

double plan_cost(const TransportPlan& plan, const CostMatrix& cost) {
  detail::require(plan.coupling.rows() == cost.rows() &&
                      plan.coupling.cols() == cost.cols(),
                  "plan_cost: shape mismatch");
  return plan.coupling.cwiseProduct(cost.values).sum();
}

namespace {

struct BasicCell {
  int i;
  int j;
  double flow;
};

// Transportation simplex state: spanning-tree basis on the bipartite graph
// with row nodes 0..r-1 and column nodes r..r+s-1.
class NetworkSimplex {
 public:
  NetworkSimplex(const Vector& alpha, const Vector& beta, const Matrix& cost)
      : r_(static_cast<int>(alpha.size())),
        s_(static_cast<int>(beta.size())),
        cost_(cost) {
    northwest_corner(alpha, beta);
  }

  Matrix solve() {
    const double scale = std::max(cost_.cwiseAbs().maxCoeff(), 1.0);
    const double red_tol = 1e-11 * scale;
    const long bland_after = 64L * (r_ + s_);
    const long pivot_cap = 4'000'000L;
    Vector u(r_), v(s_);
    for (long pivots = 0;; ++pivots) {
      if (pivots > pivot_cap)
        throw std::runtime_error("solve_exact: pivot limit exceeded");
      compute_potentials(u, v);
      Matrix reduced = cost_;
      reduced.colwise() -= u;
      reduced.rowwise() -= v.transpose();
      int bi = -1, bj = -1;
      if (pivots < bland_after) {
        Eigen::Index mi, mj;
        if (reduced.minCoeff(&mi, &mj) < -red_tol) {
          bi = static_cast<int>(mi);
          bj = static_cast<int>(mj);
        }
      } else {
        // Bland's rule: first improving arc in fixed order (anti-cycling).
        for (int i = 0; i < r_ && bi < 0; ++i)
          for (int j = 0; j < s_; ++j)
            if (reduced(i, j) < -red_tol) {
              bi = i;
              bj = j;
              break;
            }
      }
      if (bi < 0) break;
      pivot(bi, bj);
    }
    Matrix plan = Matrix::Zero(r_, s_);
    for (const BasicCell& cell : basis_)
      plan(cell.i, cell.j) = std::max(cell.flow, 0.0);
    return plan;
  }

 private:
  void northwest_corner(const Vector& alpha, const Vector& beta) {
    Vector a = alpha, b = beta;
    basis_.reserve(r_ + s_ - 1);
    int i = 0, j = 0;
    while (true) {
      const double f = std::min(a[i], b[j]);
      basis_.push_back({i, j, f});
      a[i] -= f;
      b[j] -= f;
      if (i == r_ - 1 && j == s_ - 1) break;
      if (i == r_ - 1)
        ++j;
      else if (j == s_ - 1)
        ++i;
      else if (a[i] <= b[j])
        ++i;
      else
        ++j;
    }
  }

  void rebuild_adjacency() {
    adjacency_.assign(r_ + s_, {});
    for (int c = 0; c < static_cast<int>(basis_.size()); ++c) {
      adjacency_[basis_[c].i].push_back(c);
      adjacency_[r_ + basis_[c].j].push_back(c);
    }
  }

  // u_i + v_j = cost(i,j) on basic arcs, rooted at u_0 = 0.
  void compute_potentials(Vector& u, Vector& v) {
    rebuild_adjacency();
    std::vector<char> seen(r_ + s_, 0);
    std::vector<int> stack{0};
    u[0] = 0.0;
    seen[0] = 1;
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      for (const int c : adjacency_[node]) {
        const BasicCell& cell = basis_[c];
        const int other = node < r_ ? r_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < r_)
          v[cell.j] = cost_(cell.i, cell.j) - u[cell.i];
        else
          u[cell.i] = cost_(cell.i, cell.j) - v[cell.j];
        stack.push_back(other);
      }
    }
  }

  // Tree path from entering row node to entering column node; alternating
  // +/- flow updates around the induced cycle, leaving arc = first minimum.
  void pivot(int enter_i, int enter_j) {
    std::vector<int> parent_arc(r_ + s_, -1);
    std::vector<int> parent_node(r_ + s_, -1);
    std::vector<char> seen(r_ + s_, 0);
    std::vector<int> stack{enter_i};
    seen[enter_i] = 1;
    const int target = r_ + enter_j;
    while (!stack.empty() && !seen[target]) {
      const int node = stack.back();
      stack.pop_back();
      for (const int c : adjacency_[node]) {
        const BasicCell& cell = basis_[c];
        const int other = node < r_ ? r_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_arc[other] = c;
        parent_node[other] = node;
        stack.push_back(other);
      }
    }
    detail::require(seen[target], "solve_exact: basis is not a spanning tree");

    // Walk from the column endpoint back to the row endpoint; the arc
    // adjacent to the entering column gets sign -, alternating onward.
    std::vector<int> path;
    for (int node = target; node != enter_i; node = parent_node[node])
      path.push_back(parent_arc[node]);

    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (basis_[path[k]].flow < theta) {
        theta = basis_[path[k]].flow;
        leaving = path[k];
      }
    }
    detail::require(leaving >= 0, "solve_exact: unbounded pivot");

    for (std::size_t k = 0; k < path.size(); ++k)
      basis_[path[k]].flow += (k % 2 == 0) ? -theta : theta;
    basis_[leaving] = {enter_i, enter_j, theta};
  }

  int r_;
  int s_;
  const Matrix& cost_;
  std::vector<BasicCell> basis_;
  std::vector<std::vector<int>> adjacency_;
};

}  // namespace

TransportPlan solve_exact(const Vector& alpha, const Vector& beta,
                          const CostMatrix& cost) {
  detail::require(alpha.size() == cost.rows() && beta.size() == cost.cols(),
                  "solve_exact: marginal/cost shape mismatch");
  detail::require(alpha.minCoeff() >= 0.0 && beta.minCoeff() >= 0.0,
                  "solve_exact: negative marginal");
  detail::require(std::abs(alpha.sum() - beta.sum()) <= 1e-9,
                  "solve_exact: infeasible marginals");

  NetworkSimplex simplex(alpha, beta, cost.values);
  Matrix plan = simplex.solve();
  return TransportPlan{std::move(plan), ProbVector::normalized(alpha),
                       ProbVector::normalized(beta), true};
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Vector& z) {
  const double zmax = z.maxCoeff();
  if (zmax == kNegInf) return kNegInf;
  return zmax + std::log((z.array() - zmax).exp().sum());
}

}  // namespace

TransportPlan solve_sinkhorn(const Vector& alpha, const Vector& beta,
                             const CostMatrix& cost,
                             std::optional<double> epsilon, int max_iter,
                             double tol) {
  detail::require(alpha.size() == cost.rows() && beta.size() == cost.cols(),
                  "solve_sinkhorn: marginal/cost shape mismatch");
  detail::require(alpha.minCoeff() >= 0.0 && beta.minCoeff() >= 0.0,
                  "solve_sinkhorn: negative marginal");
  detail::require(std::abs(alpha.sum() - beta.sum()) <= 1e-9,
                  "solve_sinkhorn: infeasible marginals");
  double eps = epsilon.value_or(0.05 * cost.mean());
  if (epsilon.has_value())
    detail::require(eps > 0.0, "solve_sinkhorn: epsilon must be positive");
  if (eps <= 0.0) eps = 1.0;  // all-zero cost; any feasible plan is optimal

  const Eigen::Index r = cost.rows(), s = cost.cols();
  Vector log_a(r), log_b(s);
  for (Eigen::Index i = 0; i < r; ++i)
    log_a[i] = alpha[i] > 0.0 ? std::log(alpha[i]) : kNegInf;
  for (Eigen::Index j = 0; j < s; ++j)
    log_b[j] = beta[j] > 0.0 ? std::log(beta[j]) : kNegInf;

  Vector f = Vector::Zero(r), g = Vector::Zero(s);
  Matrix plan(r, s);
  bool converged = false;
  for (int it = 0; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i < r; ++i) {
      if (log_a[i] == kNegInf) {
        f[i] = kNegInf;
        continue;
      }
      const Vector z = (g - cost.values.row(i).transpose()) / eps;
      f[i] = eps * (log_a[i] - log_sum_exp(z));
    }
    for (Eigen::Index j = 0; j < s; ++j) {
      if (log_b[j] == kNegInf) {
        g[j] = kNegInf;
        continue;
      }
      const Vector z = (f - cost.values.col(j)) / eps;
      g[j] = eps * (log_b[j] - log_sum_exp(z));
    }
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < s; ++j) {
        const double log_gamma = f[i] == kNegInf || g[j] == kNegInf
                                     ? kNegInf
                                     : (f[i] + g[j] - cost.values(i, j)) / eps;
        plan(i, j) = std::exp(log_gamma);
      }
    const double violation =
        (plan.rowwise().sum() - alpha).cwiseAbs().sum() +
        (plan.colwise().sum().transpose() - beta).cwiseAbs().sum();
    if (violation < tol) {
      converged = true;
      break;
    }
  }
  return TransportPlan{std::move(plan), ProbVector::normalized(alpha),
                       ProbVector::normalized(beta), converged};
}

double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   const GroundMetric& metric, double p) {
  detail::require(mu.dim() == nu.dim(), "wasserstein: dimension mismatch");
  detail::require(p >= 1.0, "wasserstein: order must be >= 1");
  const CostMatrix cost = pairwise_cost(mu.support(), nu.support(), metric, p);
  const TransportPlan plan = solve_exact(mu.weights(), nu.weights(), cost);
  return std::pow(plan_cost(plan, cost), 1.0 / p);
}

}  // namespace shiftlab::ot
