#include "clda/coda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "clda/errors.hpp"
#include "clda/gauss.hpp"
#include "clda/latentcorr.hpp"
#include "clda/parallel.hpp"
#include "clda/rng.hpp"
#include "clda/tune.hpp"

namespace clda::coda {

namespace {

Eigen::VectorXd column_sd(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double denom = std::max<double>(1.0, static_cast<double>(x.rows() - 1));
  return ((x.rowwise() - mean).array().square().colwise().sum() / denom).sqrt().transpose();
}

Eigen::MatrixXd class_rows(const Dataset& d, int label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.n(); ++i) {
    if (d.labels[i] == label) idx.push_back(i);
  }
  return d.rows(idx).x;
}

}  // namespace

MomentTransform MomentTransform::fit(const Dataset& data) {
  MomentTransform t;
  const auto n = static_cast<double>(data.n());
  t.delta_n = 1.0 / (2.0 * n);
  t.mean = data.x.colwise().mean().transpose();
  t.sd = column_sd(data.x);
  t.sorted.resize(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) {
    const Eigen::VectorXd col = data.x.col(static_cast<Eigen::Index>(j));
    t.sorted[j].assign(col.data(), col.data() + col.size());
    std::sort(t.sorted[j].begin(), t.sorted[j].end());
  }
  return t;
}

double MomentTransform::apply(std::size_t j, double x) const {
  const auto& s = sorted[j];
  const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
  const double f = std::clamp(static_cast<double>(count) / static_cast<double>(s.size()), delta_n, 1.0 - delta_n);
  const auto jj = static_cast<Eigen::Index>(j);
  return mean(jj) + sd(jj) * gauss::norm_quantile(f);
}

Eigen::VectorXd MomentTransform::apply(std::span<const double> x) const {
  if (x.size() != sorted.size()) throw InputError("observation has the wrong number of covariates");
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) out(static_cast<Eigen::Index>(j)) = apply(j, x[j]);
  return out;
}

Eigen::MatrixXd MomentTransform::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out(i, j) = apply(static_cast<std::size_t>(j), x(i, j));
  }
  return out;
}

Eigen::MatrixXd pooled_kendall_covariance(const Dataset& data) {
  const auto p = static_cast<Eigen::Index>(data.p());
  const double n = static_cast<double>(data.n());
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(p, p);
  for (int g = 0; g <= 1; ++g) {
    const Eigen::MatrixXd xg = class_rows(data, g);
    if (xg.rows() < 2) throw InputError("each class needs at least two observations");
    const Eigen::VectorXd d = column_sd(xg);
    Eigen::MatrixXd s(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      s(j, j) = d(j) * d(j);
      const Eigen::VectorXd cj = xg.col(j);
      for (Eigen::Index k = j + 1; k < p; ++k) {
        const Eigen::VectorXd ck = xg.col(k);
        const double tau = latent::kendall_tau({cj.data(), static_cast<std::size_t>(cj.size())},
                                               {ck.data(), static_cast<std::size_t>(ck.size())});
        s(j, k) = s(k, j) = d(j) * d(k) * std::sin(0.5 * std::numbers::pi * tau);
      }
    }
    pooled += (static_cast<double>(xg.rows()) / n) * s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pooled);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= 0.0) return pooled;
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd CodaProblem::gram() const {
  const Eigen::VectorXd d = mu_d();
  return pooled_s + nu * d * d.transpose();
}

Eigen::VectorXd CodaProblem::linear() const { return nu * mu_d(); }

double CodaProblem::lambda_max() const { return linear().lpNorm<Eigen::Infinity>(); }

CodaProblem prepare(const Dataset& data) {
  validate_dataset(data);
  CodaProblem prob;
  prob.transform = MomentTransform::fit(data);
  prob.n0 = data.count(0);
  prob.n1 = data.count(1);
  const double n = static_cast<double>(data.n());
  prob.nu = static_cast<double>(prob.n0) * static_cast<double>(prob.n1) / (n * n);
  // Moments are taken on the raw scale; the transform is assumed to
  // preserve them.
  prob.mu0 = class_rows(data, 0).colwise().mean().transpose();
  prob.mu1 = class_rows(data, 1).colwise().mean().transpose();
  prob.pooled_s = pooled_kendall_covariance(data);
  // A column constant within both classes has zero variance; keep the
  // coordinate solvable.
  for (Eigen::Index j = 0; j < prob.pooled_s.rows(); ++j) {
    if (!(prob.pooled_s(j, j) > 0.0)) prob.pooled_s(j, j) = 1e-12;
  }
  return prob;
}

double optimal_intercept(const CodaProblem& prob, const Eigen::VectorXd& beta, bool* fallback) {
  const double log_ratio = std::log(static_cast<double>(prob.n1) / static_cast<double>(prob.n0));
  const double denom = prob.mu_d().dot(beta);
  if (fallback) *fallback = denom == 0.0;
  if (denom == 0.0) return log_ratio;
  return -prob.mu_a().dot(beta) + beta.dot(prob.pooled_s * beta) / denom * log_ratio;
}

CodaModel finish(CodaProblem prob, Eigen::VectorXd beta, double lambda) {
  CodaModel m;
  m.intercept = optimal_intercept(prob, beta, &m.intercept_fallback);
  m.beta = std::move(beta);
  m.lambda = lambda;
  m.problem = std::move(prob);
  return m;
}

CodaModel coda_fit(const Dataset& data, double lambda, const direction::SolverOptions& opts) {
  CodaProblem prob = prepare(data);
  auto sol = direction::solve_lasso_qp(prob.gram(), prob.linear(), lambda, nullptr, opts);
  return finish(std::move(prob), std::move(sol.beta), lambda);
}

double coda_score(const CodaModel& model, std::span<const double> x) {
  return model.problem.transform.apply(x).dot(model.beta) + model.intercept;
}

int coda_predict(const CodaModel& model, std::span<const double> x) {
  return coda_score(model, x) > 0.0 ? 1 : 0;
}

std::vector<int> coda_predict(const CodaModel& model, const Eigen::MatrixXd& x) {
  const Eigen::VectorXd score = (model.problem.transform.apply(x) * model.beta).array() + model.intercept;
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = score(i) > 0.0 ? 1 : 0;
  return out;
}

CodaCvResult coda_cross_validate(const Dataset& data, const CodaConfig& cfg) {
  if (cfg.n_folds < 2 || cfg.n_lambdas < 1) throw InputError("CODA needs n_folds >= 2 and n_lambdas >= 1");
  validate_dataset(data);
  CodaCvResult cv;
  const double lmax = prepare(data).lambda_max();
  if (!(lmax > 0.0)) throw NumericalError("class means coincide; CODA direction is zero");
  cv.lambdas = direction::lambda_grid(lmax, cfg.n_lambdas, cfg.lambda_ratio);

  const auto folds = tune::stratified_folds(data.labels, cfg.n_folds, derive_seed(cfg.seed, 0xc0da));
  std::vector<Eigen::VectorXd> per_fold(static_cast<std::size_t>(cfg.n_folds));
  parallel_for(per_fold.size(), cfg.threads, [&](std::size_t f) {
    std::vector<std::size_t> tr, te;
    for (std::size_t i = 0; i < folds.size(); ++i) (static_cast<std::size_t>(folds[i]) == f ? te : tr).push_back(i);
    const Dataset train = data.rows(tr), held = data.rows(te);
    if (held.count(0) == 0 || held.count(1) == 0) {
      throw InputError("fold " + std::to_string(f + 1) + " is missing a class; use fewer folds or a different seed");
    }
    const CodaProblem prob = prepare(train);
    const auto path = direction::solve_path(prob.gram(), prob.linear(), cv.lambdas);
    const Eigen::MatrixXd z = prob.transform.apply(held.x);
    Eigen::VectorXd err = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cv.lambdas.size()));
    for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
      const Eigen::VectorXd& beta = path.solutions[l].beta;
      const double b0 = optimal_intercept(prob, beta);
      const Eigen::VectorXd score = (z * beta).array() + b0;
      for (std::size_t i = 0; i < held.n(); ++i) {
        if ((score(static_cast<Eigen::Index>(i)) > 0.0 ? 1 : 0) != held.labels[i]) err(static_cast<Eigen::Index>(l)) += 1.0;
      }
    }
    per_fold[f] = err / static_cast<double>(held.n());
  });
  cv.error = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cv.lambdas.size()));
  for (const auto& e : per_fold) cv.error += e;
  cv.error /= static_cast<double>(cfg.n_folds);

  cv.best_index = 0;
  for (std::size_t l = 1; l < cv.lambdas.size(); ++l) {
    if (cv.error(static_cast<Eigen::Index>(l)) < cv.error(static_cast<Eigen::Index>(cv.best_index)) - 1e-12) cv.best_index = l;
  }
  cv.best_lambda = cv.lambdas[cv.best_index];
  cv.best_error = cv.error(static_cast<Eigen::Index>(cv.best_index));
  return cv;
}

CodaFit coda_fit_cv(const Dataset& data, const CodaConfig& cfg) {
  CodaFit out{{}, coda_cross_validate(data, cfg)};
  out.model = coda_fit(data, out.cv.best_lambda);
  return out;
}

}  // namespace clda::coda
