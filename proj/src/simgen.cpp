#include "clda/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "clda/errors.hpp"
#include "clda/gauss.hpp"
#include "clda/io.hpp"
#include "clda/rng.hpp"

namespace clda::simgen {

namespace {

// Stream ids under the root seed.
enum Stream : std::uint64_t { kTrain = 1, kTest = 2, kRotation = 3, kLibrary = 4, kParams = 5, kTables = 6 };

Eigen::MatrixXd gaussian_rows(Rng& rng, Eigen::Index n, const Eigen::MatrixXd& chol_lower) {
  const Eigen::Index d = chol_lower.rows();
  Eigen::MatrixXd e(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) e(i, j) = rng.normal();
  }
  return e * chol_lower.transpose();
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

// Latent variances must be one; only GD needs the rescaling.
Eigen::MatrixXd latent_structure(Structure structure, int p, std::uint64_t seed) {
  const Eigen::MatrixXd m = build_structure(structure, p, seed);
  const Eigen::VectorXd inv_sd = m.diagonal().array().rsqrt();
  return inv_sd.asDiagonal() * m * inv_sd.asDiagonal();
}

Eigen::VectorXd signal_indicator(int p, int s) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  b.head(s).setOnes();
  return b;
}

// Value at which the equal mixture of U[a0, a0 + w] and U[a1, a1 + w] has CDF u.
double uniform_mixture_quantile(double a0, double a1, double w, double u) {
  auto cdf = [&](double d) {
    return 0.5 * std::clamp((d - a0) / w, 0.0, 1.0) + 0.5 * std::clamp((d - a1) / w, 0.0, 1.0);
  };
  double lo = std::min(a0, a1), hi = std::max(a0, a1) + w;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void shuffled_classes(Rng& rng, int n, std::vector<int>& labels) {
  labels.assign(static_cast<std::size_t>(n), 0);
  for (int i = n / 2; i < n; ++i) labels[static_cast<std::size_t>(i)] = 1;
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
}

}  // namespace

const char* to_string(Family f) { return f == Family::Joint ? "joint" : "mixture"; }

const char* to_string(Structure s) {
  switch (s) {
    case Structure::AR: return "ar";
    case Structure::CS: return "cs";
    case Structure::GD: return "gd";
  }
  return "?";
}

const char* to_string(Truncation t) {
  switch (t) {
    case Truncation::None: return "none";
    case Truncation::Low: return "low";
    case Truncation::High: return "high";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "joint") return Family::Joint;
  if (s == "mixture") return Family::Mixture;
  throw InputError("unknown family '" + s + "' (expected joint or mixture)");
}

Structure parse_structure(const std::string& s) {
  if (s == "ar") return Structure::AR;
  if (s == "cs") return Structure::CS;
  if (s == "gd") return Structure::GD;
  throw InputError("unknown structure '" + s + "' (expected ar, cs or gd)");
}

Truncation parse_truncation(const std::string& s) {
  if (s == "none") return Truncation::None;
  if (s == "low") return Truncation::Low;
  if (s == "high") return Truncation::High;
  throw InputError("unknown truncation '" + s + "' (expected none, low or high)");
}

std::pair<double, double> truncation_band(Truncation t) {
  switch (t) {
    case Truncation::None: return {0.0, 0.0};
    case Truncation::Low: return {0.1, 0.5};
    case Truncation::High: return {0.4, 0.8};
  }
  return {0.0, 0.0};
}

double EmpiricalTable::zero_mass() const {
  const auto zeros = std::upper_bound(values.begin(), values.end(), 0.0) - values.begin();
  return static_cast<double>(zeros) / static_cast<double>(values.size());
}

double EmpiricalTable::generalized_inverse(double u) const {
  const auto m = static_cast<double>(values.size());
  const double k = std::ceil(u * m - 1e-12);
  const auto idx = static_cast<std::size_t>(std::clamp(k, 1.0, m)) - 1;
  return values[idx];
}

const std::vector<EmpiricalTable>& MarginalLibrary::level(Truncation t) const {
  const auto& v = t == Truncation::None ? none : t == Truncation::Low ? low : high;
  if (v.empty()) throw InputError(std::string("marginal library has no tables for level ") + to_string(t));
  return v;
}

MarginalLibrary MarginalLibrary::synthetic(std::uint64_t seed, int tables_per_level, int table_size) {
  if (tables_per_level < 1 || table_size < 10) throw std::invalid_argument("synthetic library too small");
  MarginalLibrary lib;
  Rng rng(seed);
  for (const Truncation t : {Truncation::None, Truncation::Low, Truncation::High}) {
    const auto [lo, hi] = truncation_band(t);
    auto& out = t == Truncation::None ? lib.none : t == Truncation::Low ? lib.low : lib.high;
    for (int k = 0; k < tables_per_level; ++k) {
      const double pi = t == Truncation::None ? 0.0 : rng.uniform(lo, hi);
      const auto zeros = static_cast<int>(std::lround(pi * table_size));
      // Log-scale location and spread loosely matching absolute abundances.
      const double loc = rng.uniform(2.0, 8.0), spread = rng.uniform(0.5, 2.0);
      EmpiricalTable tab;
      tab.values.assign(static_cast<std::size_t>(zeros), 0.0);
      for (int i = zeros; i < table_size; ++i) tab.values.push_back(std::exp(loc + spread * rng.normal()));
      std::sort(tab.values.begin(), tab.values.end());
      out.push_back(std::move(tab));
    }
  }
  return lib;
}

MarginalLibrary MarginalLibrary::from_csv(const std::string& path) {
  const auto t = io::read_csv(path);
  if (t.header.size() != 2 || t.header[0] != "table" || t.header[1] != "value") {
    throw InputError(path + ": expected header 'table,value'");
  }
  std::map<std::string, std::vector<double>> tables;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double v = io::parse_number(t.rows[i][1], path, t.line_numbers[i], "value");
    if (v < 0.0) throw InputError(path + ":" + std::to_string(t.line_numbers[i]) + ": negative value");
    tables[t.rows[i][0]].push_back(v);
  }
  MarginalLibrary lib;
  for (auto& [name, values] : tables) {
    if (values.size() < 2) throw InputError(path + ": table '" + name + "' needs at least two values");
    std::sort(values.begin(), values.end());
    EmpiricalTable tab{std::move(values)};
    if (tab.values.back() == 0.0) throw InputError(path + ": table '" + name + "' is all zeros");
    const double z = tab.zero_mass();
    if (z == 0.0) lib.none.push_back(tab);
    if (z >= 0.1 && z <= 0.5) lib.low.push_back(tab);
    if (z >= 0.4 && z <= 0.8) lib.high.push_back(tab);
  }
  return lib;
}

void validate(const SimConfig& cfg) {
  if (cfg.p < 2) throw InputError("p must be at least 2");
  if (cfg.s < 1 || cfg.s > cfg.p) throw InputError("s must satisfy 1 <= s <= p");
  if (cfg.n < 2 || cfg.n_test < 2) throw InputError("n and n_test must be at least 2");
  if (!(cfg.v2 > 0.0 && cfg.v2 < 1.0)) throw InputError("v2 must lie in (0,1)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 0.5)) throw InputError("alpha must lie in (0, 0.5)");
  if (cfg.mean_shift && !(*cfg.mean_shift > 0.0)) throw InputError("mean_shift must be positive");
}

Eigen::VectorXd gd_eigenvalues(int p) {
  Eigen::VectorXd nu(p);
  const double denom = 1.0 - std::pow(0.9, p);
  for (int j = 1; j <= p; ++j) nu(j - 1) = p * (std::pow(0.9, j - 1) - std::pow(0.9, j)) / denom;
  return nu;
}

Eigen::MatrixXd haar_orthogonal(int p, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd g(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Eigen::MatrixXd build_structure(Structure structure, int p, std::uint64_t seed) {
  if (p < 2) throw InputError("p must be at least 2");
  Eigen::MatrixXd m(p, p);
  switch (structure) {
    case Structure::AR:
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) m(i, j) = std::pow(0.7, std::abs(i - j));
      }
      break;
    case Structure::CS:
      m = Eigen::MatrixXd::Constant(p, p, 0.7);
      m.diagonal().setOnes();
      break;
    case Structure::GD: {
      const Eigen::MatrixXd g = haar_orthogonal(p, seed);
      m = g * gd_eigenvalues(p).asDiagonal() * g.transpose();
      m = 0.5 * (m + m.transpose());
      break;
    }
  }
  return m;
}

std::vector<int> oracle_classify(const OracleRule& rule, const Eigen::MatrixXd& latent) {
  Eigen::VectorXd score = latent * rule.beta;
  if (rule.center.size() > 0) score.array() -= rule.center.dot(rule.beta);
  std::vector<int> out(static_cast<std::size_t>(latent.rows()));
  for (Eigen::Index i = 0; i < latent.rows(); ++i) out[static_cast<std::size_t>(i)] = score(i) > 0.0 ? 1 : 0;
  return out;
}

Simulation generate_joint(const SimConfig& cfg, const MarginalLibrary& library) {
  validate(cfg);
  const int p = cfg.p;
  const Eigen::MatrixXd s22 = latent_structure(cfg.structure, p, derive_seed(cfg.seed, kRotation));
  const Eigen::VectorXd b = signal_indicator(p, cfg.s);
  const double bsb = b.dot(s22 * b);
  if (!(bsb > 0.0)) throw NumericalError("degenerate signal: b'Sigma22 b <= 0");
  const double c = std::sqrt(1.0 - cfg.v2) / std::sqrt(bsb);

  Simulation sim;
  sim.sigma = Eigen::MatrixXd::Identity(p + 1, p + 1);
  sim.sigma.bottomRightCorner(p, p) = s22;
  const Eigen::VectorXd s21 = c * (s22 * b);
  sim.sigma.col(0).tail(p) = s21;
  sim.sigma.row(0).tail(p) = s21.transpose();
  const Eigen::MatrixXd chol = cholesky_lower(sim.sigma, "joint correlation");
  sim.oracle = {Family::Joint, c * b, Eigen::VectorXd()};

  const auto& tables = library.level(cfg.truncation);
  Rng lib_rng(derive_seed(cfg.seed, kTables));
  sim.table_index.resize(static_cast<std::size_t>(p));
  for (auto& t : sim.table_index) t = static_cast<std::size_t>(lib_rng.below(tables.size()));

  auto draw = [&](int n, std::uint64_t stream, Dataset& out, Eigen::MatrixXd& latent) {
    Rng rng(derive_seed(cfg.seed, stream));
    const Eigen::MatrixXd z = gaussian_rows(rng, n, chol);
    latent = z.rightCols(p);
    out.names = default_names(static_cast<std::size_t>(p));
    out.labels.resize(static_cast<std::size_t>(n));
    out.x.resize(n, p);
    for (int i = 0; i < n; ++i) {
      out.labels[static_cast<std::size_t>(i)] = z(i, 0) > 0.0 ? 1 : 0;
      for (int j = 0; j < p; ++j) {
        const auto& tab = tables[sim.table_index[static_cast<std::size_t>(j)]];
        out.x(i, j) = tab.generalized_inverse(gauss::norm_cdf(z(i, j + 1)));
      }
    }
  };
  draw(cfg.n, kTrain, sim.train, sim.train_latent);
  draw(cfg.n_test, kTest, sim.test, sim.test_latent);
  return sim;
}

Simulation generate_mixture(const SimConfig& cfg) {
  validate(cfg);
  const int p = cfg.p;
  const Eigen::MatrixXd s22 = latent_structure(cfg.structure, p, derive_seed(cfg.seed, kRotation));

  Simulation sim;
  Rng prng(derive_seed(cfg.seed, kParams));
  sim.scales.resize(p);
  for (int j = 0; j < p; ++j) sim.scales(j) = prng.uniform(0.5, 2.0);
  // Covariance of the class-conditional latents; the transform below needs
  // var(z_j) = s_j^2 to be mean and variance preserving.
  sim.sigma = sim.scales.asDiagonal() * s22 * sim.scales.asDiagonal();
  const Eigen::MatrixXd chol = cholesky_lower(sim.sigma, "mixture covariance");

  const Eigen::VectorXd b = signal_indicator(p, cfg.s);
  const Eigen::VectorXd beta = -2.0 * gauss::norm_quantile(cfg.alpha) * b / std::sqrt(b.dot(sim.sigma * b));
  const Eigen::VectorXd mu_d = sim.sigma * beta;
  const double shift = cfg.mean_shift.value_or(10.0 * sim.scales.maxCoeff());
  sim.mu0 = Eigen::VectorXd::Constant(p, shift);
  sim.mu1 = sim.mu0 + mu_d;
  sim.oracle = {Family::Mixture, beta, 0.5 * (sim.mu0 + sim.mu1)};

  const double sqrt12 = std::sqrt(12.0);
  sim.thresholds = Eigen::VectorXd::Constant(p, -std::numeric_limits<double>::infinity());
  if (cfg.truncation != Truncation::None) {
    const auto [lo, hi] = truncation_band(cfg.truncation);
    for (int j = 0; j < p; ++j) {
      const double u = prng.uniform(lo, hi);
      const double w = sqrt12 * sim.scales(j);
      sim.thresholds(j) = uniform_mixture_quantile(sim.mu0(j) - 0.5 * w, sim.mu1(j) - 0.5 * w, w, u);
    }
  }

  auto draw = [&](int n, std::uint64_t stream, Dataset& out, Eigen::MatrixXd& latent) {
    Rng rng(derive_seed(cfg.seed, stream));
    shuffled_classes(rng, n, out.labels);
    latent = gaussian_rows(rng, n, chol);
    out.names = default_names(static_cast<std::size_t>(p));
    out.x.resize(n, p);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd& mu = out.labels[static_cast<std::size_t>(i)] ? sim.mu1 : sim.mu0;
      latent.row(i) += mu.transpose();
      for (int j = 0; j < p; ++j) {
        const double s = sim.scales(j);
        const double xs = s * sqrt12 * (gauss::norm_cdf((latent(i, j) - mu(j)) / s) - 0.5) + mu(j);
        out.x(i, j) = xs > sim.thresholds(j) ? xs : 0.0;
      }
    }
  };
  draw(cfg.n, kTrain, sim.train, sim.train_latent);
  draw(cfg.n_test, kTest, sim.test, sim.test_latent);
  return sim;
}

Simulation generate(const SimConfig& cfg, const std::optional<MarginalLibrary>& library) {
  if (cfg.family == Family::Mixture) return generate_mixture(cfg);
  if (library) return generate_joint(cfg, *library);
  return generate_joint(cfg, MarginalLibrary::synthetic(derive_seed(cfg.seed, kLibrary)));
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw std::invalid_argument("error_rate: size mismatch");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace clda::simgen
