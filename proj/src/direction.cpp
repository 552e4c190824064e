#include "clda/direction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace clda::direction {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

void check_problem(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, double lambda) {
  if (q.rows() != q.cols() || q.rows() != c.size()) {
    throw std::invalid_argument("solver: dimension mismatch");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("solver: lambda must be finite and non-negative");
  }
  if (!q.allFinite() || !c.allFinite()) throw std::invalid_argument("solver: non-finite input");
  if ((q.diagonal().array() <= 0.0).any()) {
    throw std::invalid_argument("solver: Gram matrix needs a positive diagonal");
  }
}

std::vector<std::size_t> support_of(const Eigen::VectorXd& beta) {
  std::vector<std::size_t> s;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) s.push_back(static_cast<std::size_t>(j));
  }
  return s;
}

}  // namespace

double objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, const Eigen::VectorXd& beta,
                 double lambda) {
  return 0.5 * beta.dot(q * beta) - c.dot(beta) + lambda * beta.lpNorm<1>();
}

double kkt_residual(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, const Eigen::VectorXd& beta,
                    double lambda) {
  const Eigen::VectorXd g = q * beta - c;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) != 0.0 ? std::abs(g(j) + lambda * (beta(j) > 0.0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(g(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

SparseDirection solve_lasso_qp(const Eigen::MatrixXd& q, const Eigen::VectorXd& c, double lambda,
                               const Eigen::VectorXd* warm_start, const SolverOptions& opts) {
  check_problem(q, c, lambda);
  const Eigen::Index p = c.size();

  SparseDirection out;
  out.lambda = lambda;
  out.beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
  if (out.beta.size() != p) throw std::invalid_argument("solver: warm start has wrong length");
  Eigen::VectorXd& beta = out.beta;
  Eigen::VectorXd qb = q * beta;

  auto update = [&](Eigen::Index j) {
    const double qjj = q(j, j);
    const double z = c(j) - qb(j) + qjj * beta(j);
    const double next = soft_threshold(z, lambda) / qjj;
    const double delta = next - beta(j);
    if (delta != 0.0) {
      qb.noalias() += delta * q.col(j);
      beta(j) = next;
    }
    return std::abs(delta);
  };

  auto record = [&] {
    ++out.iterations;
    if (opts.record_objective) out.objective_trace.push_back(objective(q, c, beta, lambda));
  };

  auto converged = [&] {
    qb.noalias() = q * beta;  // drop accumulated rounding before the KKT check
    out.kkt_residual = kkt_residual(q, c, beta, lambda);
    return out.kkt_residual <= opts.tol_kkt;
  };

  // Primal active-set iterations from the current iterate. With the signs
  // fixed the problem is a linear system; a step that would flip a sign is
  // cut at the first zero crossing and that coordinate leaves the set.
  // Finishes ill-conditioned problems where coordinate descent crawls.
  auto try_exact = [&](std::vector<Eigen::Index> act) {
    const Eigen::VectorXd saved = beta;
    const double saved_obj = objective(q, c, beta, lambda);
    Eigen::VectorXd sign = beta.array().sign();
    const int max_steps = 4 * static_cast<int>(p) + 10;
    for (int step = 0; step < max_steps; ++step) {
      const auto k = static_cast<Eigen::Index>(act.size());
      if (k > 0) {
        Eigen::MatrixXd qa(k, k);
        Eigen::VectorXd rhs(k);
        for (Eigen::Index a = 0; a < k; ++a) {
          for (Eigen::Index b = 0; b < k; ++b) qa(a, b) = q(act[a], act[b]);
          rhs(a) = c(act[a]) - lambda * sign(act[a]);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(qa);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
        const Eigen::VectorXd sol = ldlt.solve(rhs);
        if (!sol.allFinite()) break;
        double t = 1.0;
        Eigen::Index leaving = -1;
        for (Eigen::Index a = 0; a < k; ++a) {
          if (sol(a) * sign(act[a]) <= 0.0) {
            const double cur = beta(act[a]);
            const double ta = cur / (cur - sol(a));
            if (ta < t) {
              t = ta;
              leaving = a;
            }
          }
        }
        for (Eigen::Index a = 0; a < k; ++a) beta(act[a]) += t * (sol(a) - beta(act[a]));
        if (leaving >= 0) {
          beta(act[leaving]) = 0.0;
          sign(act[leaving]) = 0.0;
          act.erase(act.begin() + leaving);
          continue;
        }
      }
      if (converged()) return true;
      // Bring in the worst violator of the zero-coordinate conditions.
      const Eigen::VectorXd g = qb - c;
      Eigen::Index worst = -1;
      double worst_v = opts.tol_kkt;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (beta(j) == 0.0 && std::abs(g(j)) - lambda > worst_v) {
          worst_v = std::abs(g(j)) - lambda;
          worst = j;
        }
      }
      if (worst < 0) break;
      sign(worst) = g(worst) > 0.0 ? -1.0 : 1.0;
      act.push_back(worst);
      std::sort(act.begin(), act.end());
    }
    if (objective(q, c, beta, lambda) > saved_obj) beta = saved;
    qb.noalias() = q * beta;
    return false;
  };

  std::vector<Eigen::Index> active, previous;
  Eigen::VectorXd previous_sign;
  while (out.iterations < opts.max_sweeps) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) change = std::max(change, update(j));
    record();
    if (change < opts.tol_change && converged()) {
      out.support = support_of(beta);
      return out;
    }
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (beta(j) != 0.0) active.push_back(j);
    }
    const Eigen::VectorXd sign = beta.array().sign();
    if (!active.empty() && active == previous && sign == previous_sign && try_exact(active)) {
      out.support = support_of(beta);
      return out;
    }
    previous = active;
    previous_sign = sign;
    for (int r = 1; r < opts.full_sweep_every && out.iterations < opts.max_sweeps; ++r) {
      double inner = 0.0;
      for (const Eigen::Index j : active) inner = std::max(inner, update(j));
      record();
      if (inner < opts.tol_change) break;
    }
  }
  out.kkt_residual = kkt_residual(q, c, beta, lambda);
  out.support = support_of(beta);
  throw ConvergenceError("coordinate descent did not converge after " +
                             std::to_string(opts.max_sweeps) + " sweeps (KKT residual " +
                             std::to_string(out.kkt_residual) + ")",
                         out);
}

SparseDirection solve_direction(const Eigen::MatrixXd& sigma22, const Eigen::VectorXd& sigma21,
                                double lambda, const std::optional<Eigen::VectorXd>& warm_start,
                                const SolverOptions& opts) {
  if (sigma22.rows() == sigma22.cols() &&
      (sigma22.diagonal().array() - 1.0).abs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("solve_direction: Sigma22 must have a unit diagonal");
  }
  return solve_lasso_qp(sigma22, sigma21, lambda, warm_start ? &*warm_start : nullptr, opts);
}

std::vector<double> lambda_grid(double lambda_max, int n, double ratio) {
  if (n < 1) throw std::invalid_argument("lambda_grid: need at least one value");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("lambda_grid: ratio must lie in (0,1)");
  if (!(lambda_max > 0.0)) throw std::invalid_argument("lambda_grid: lambda_max must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  out[0] = lambda_max;
  const double step = n > 1 ? std::log(ratio) / (n - 1) : 0.0;
  for (int k = 1; k < n; ++k) out[static_cast<std::size_t>(k)] = lambda_max * std::exp(step * k);
  return out;
}

LambdaPath solve_path(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                      const std::vector<double>& lambdas, const SolverOptions& opts) {
  LambdaPath path;
  path.lambdas = lambdas;
  path.solutions.reserve(lambdas.size());
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (k > 0 && !(lambdas[k] < lambdas[k - 1])) {
      throw std::invalid_argument("solve_path: lambdas must be strictly decreasing");
    }
    const Eigen::VectorXd* warm = k > 0 ? &path.solutions.back().beta : nullptr;
    path.solutions.push_back(solve_lasso_qp(q, c, lambdas[k], warm, opts));
  }
  return path;
}

LambdaPath lambda_path(const Eigen::MatrixXd& sigma22, const Eigen::VectorXd& sigma21, int n_lambdas,
                       double ratio, const SolverOptions& opts) {
  const double lmax = sigma21.lpNorm<Eigen::Infinity>();
  if (!(lmax > 0.0)) throw NumericalError("lambda_path: Sigma21 is identically zero");
  return solve_path(sigma22, sigma21, lambda_grid(lmax, n_lambdas, ratio), opts);
}

}  // namespace clda::direction
