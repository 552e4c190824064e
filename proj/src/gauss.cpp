#include "clda/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace clda::gauss {

namespace {

constexpr double kTwoPi = 2.0 * kPi;
constexpr double kClamp = 8.5;

double poly(const double* c, int n, double x) {
  double v = c[n - 1];
  for (int i = n - 2; i >= 0; --i) v = v * x + c[i];
  return v;
}

// Gauss-Legendre rule on [0, 1], computed once by Newton iteration on P_n.
struct Legendre01 {
  std::vector<double> x;
  std::vector<double> w;

  explicit Legendre01(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      x[i] = 0.5 * (1.0 - z);
      w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

// Path nodes. The integrand sharpens near t = 1 when the target matrix is
// close to singular, so nodes are pulled toward that end by t = 1 - (1-u)^2.
struct PathRule {
  std::vector<double> t;
  std::vector<double> w;

  explicit PathRule(int n) {
    const Legendre01 g(n);
    t.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
      const double s = 1.0 - g.x[i];
      t[i] = 1.0 - s * s;
      w[i] = g.w[i] * 2.0 * s;
    }
  }
};

const PathRule& path3() {
  static const PathRule rule(32);
  return rule;
}

const PathRule& path4() {
  static const PathRule rule(40);
  return rule;
}

double clamp_limit(double x) {
  if (std::isnan(x)) throw std::invalid_argument("mvn_cdf: NaN limit");
  return std::clamp(x, -kClamp, kClamp);
}

// Genz's BVNU: P(Z1 > h, Z2 > k).
double bvnu(double h, double k, double r) {
  if (r == 0.0) return norm_cdf(-h) * norm_cdf(-k);

  static constexpr double w6[3] = {0.1713244923791705, 0.3607615730481384,
                                   0.4679139345726904};
  static constexpr double x6[3] = {0.9324695142031522, 0.6612093864662647,
                                   0.2386191860831970};
  static constexpr double w12[6] = {0.04717533638651177, 0.1069393259953183,
                                    0.1600783285433464,  0.2031674267230659,
                                    0.2334925365383547,  0.2491470458134029};
  static constexpr double x12[6] = {0.9815606342467191, 0.9041172563704750,
                                    0.7699026741943050, 0.5873179542866171,
                                    0.3678314989981802, 0.1252334085114692};
  static constexpr double w20[10] = {
      0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
      0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
      0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
      0.1527533871307259};
  static constexpr double x20[10] = {
      0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
      0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
      0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
      0.07652652113349733};

  const double* w;
  const double* x;
  int lg;
  const double ar = std::abs(r);
  if (ar < 0.3) {
    w = w6, x = x6, lg = 3;
  } else if (ar < 0.75) {
    w = w12, x = x12, lg = 6;
  } else {
    w = w20, x = x20, lg = 10;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (int i = 0; i < lg; ++i) {
      for (const double xi : {1.0 - x[i], 1.0 + x[i]}) {
        const double sn = std::sin(asr * xi);
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return std::clamp(bvn * asr / kTwoPi + norm_cdf(-h) * norm_cdf(-k), 0.0, 1.0);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 80.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
    }
    if (hk > -100.0) {
      const double b = std::sqrt(bs);
      const double sp = std::sqrt(kTwoPi) * norm_cdf(-b / a);
      bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
    }
    a /= 2.0;
    double acc = 0.0;
    for (int i = 0; i < lg; ++i) {
      for (const double xi : {1.0 - x[i], 1.0 + x[i]}) {
        const double xs = (a * xi) * (a * xi);
        asr = -(bs / xs + hk) / 2.0;
        if (asr <= -100.0) continue;
        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
        const double rs = std::sqrt(1.0 - xs);
        const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
        acc += w[i] * std::exp(asr) * (sp - ep);
      }
    }
    bvn = (a * acc - bvn) / kTwoPi;
  }
  if (r > 0.0) {
    bvn += norm_cdf(-std::max(h, k));
  } else if (h >= k) {
    bvn = -bvn;
  } else {
    const double l = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
    bvn = l - bvn;
  }
  return std::clamp(bvn, 0.0, 1.0);
}

// Standardized limit and correlation of (Z_k, Z_l) given Z_i = b_i, Z_j = b_j.
struct Conditional2 {
  double uk, ul, rho;
};

// Phi of a univariate conditional limit; a vanishing conditional variance
// turns the probability into a step.
double cond_cdf(double diff, double var) {
  if (var <= 1e-15) return diff > 0.0 ? 1.0 : (diff < 0.0 ? 0.0 : 0.5);
  return norm_cdf(diff / std::sqrt(var));
}

// Phi_3 via Plackett's identity along R(t) = R0 + t (R - R0), where R0
// keeps the strongest pair (i,j) and decouples the third index m.
double phi3(const std::array<double, 3>& b, const CorrelationMatrixSmall& c) {
  int i = 0, j = 1, m = 2;
  if (std::abs(c(0, 2)) > std::abs(c(i, j))) i = 0, j = 2, m = 1;
  if (std::abs(c(1, 2)) > std::abs(c(i, j))) i = 1, j = 2, m = 0;

  const double rij = c(i, j);
  const double rim = c(i, m);
  const double rjm = c(j, m);
  double total = bvn_cdf(b[i], b[j], rij) * norm_cdf(b[m]);

  const PathRule& rule = path3();
  double integral = 0.0;
  for (std::size_t q = 0; q < rule.t.size(); ++q) {
    const double t = rule.t[q];
    const double a_im = t * rim;
    const double a_jm = t * rjm;
    double f = 0.0;
    // d/drho_im: condition on (Z_i, Z_m), remaining index j.
    if (rim != 0.0) {
      const double den = 1.0 - a_im * a_im;
      const double mean = ((rij - a_im * a_jm) * b[i] + (a_jm - a_im * rij) * b[m]) / den;
      const double var = 1.0 - (rij * rij + a_jm * a_jm - 2.0 * a_im * rij * a_jm) / den;
      f += rim * bvn_pdf(b[i], b[m], a_im) * cond_cdf(b[j] - mean, var);
    }
    if (rjm != 0.0) {
      const double den = 1.0 - a_jm * a_jm;
      const double mean = ((rij - a_jm * a_im) * b[j] + (a_im - a_jm * rij) * b[m]) / den;
      const double var = 1.0 - (rij * rij + a_im * a_im - 2.0 * a_jm * rij * a_im) / den;
      f += rjm * bvn_pdf(b[j], b[m], a_jm) * cond_cdf(b[i] - mean, var);
    }
    integral += rule.w[q] * f;
  }
  total += integral;
  return std::clamp(total, 0.0, 1.0);
}

double cond_bvn(const std::array<double, 4>& b, const std::array<double, 16>& r,
                int i, int j, int k, int l) {
  auto at = [&](int a, int bb) { return r[a * 4 + bb]; };
  const double rij = at(i, j);
  const double det = 1.0 - rij * rij;
  // Rows of B A^{-1} for the remaining pair.
  const double ki = at(k, i), kj = at(k, j), li = at(l, i), lj = at(l, j);
  const double gk_i = (ki - rij * kj) / det, gk_j = (kj - rij * ki) / det;
  const double gl_i = (li - rij * lj) / det, gl_j = (lj - rij * li) / det;
  const double mk = gk_i * b[i] + gk_j * b[j];
  const double ml = gl_i * b[i] + gl_j * b[j];
  const double vk = 1.0 - (gk_i * ki + gk_j * kj);
  const double vl = 1.0 - (gl_i * li + gl_j * lj);
  const double ckl = at(k, l) - (gk_i * li + gk_j * lj);
  const double dk = b[k] - mk;
  const double dl = b[l] - ml;
  if (vk <= 1e-15 || vl <= 1e-15) {
    if (vk <= 1e-15 && vl <= 1e-15) return cond_cdf(dk, 0.0) * cond_cdf(dl, 0.0);
    return vk <= 1e-15 ? cond_cdf(dk, 0.0) * cond_cdf(dl, vl)
                       : cond_cdf(dk, vk) * cond_cdf(dl, 0.0);
  }
  const double sk = std::sqrt(vk), sl = std::sqrt(vl);
  const double rho = std::clamp(ckl / (sk * sl), -1.0, 1.0);
  return bvn_cdf(dk / sk, dl / sl, rho);
}

// Phi_4 via Plackett's identity. R0 keeps the pairing {(i,j),(k,l)} with
// the strongest retained correlation, so Phi_4(b; R0) factors into two
// bivariate probabilities; the four cross correlations are integrated in.
double phi4(const std::array<double, 4>& b, const CorrelationMatrixSmall& c) {
  static constexpr int pairings[3][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}};
  int best = 0;
  double best_max = -1.0, best_sum = -1.0;
  for (int p = 0; p < 3; ++p) {
    const double ra = std::abs(c(pairings[p][0], pairings[p][1]));
    const double rb = std::abs(c(pairings[p][2], pairings[p][3]));
    const double mx = std::max(ra, rb), sm = ra * ra + rb * rb;
    if (mx > best_max + 1e-12 || (std::abs(mx - best_max) <= 1e-12 && sm > best_sum)) {
      best = p, best_max = mx, best_sum = sm;
    }
  }
  const int i = pairings[best][0], j = pairings[best][1];
  const int k = pairings[best][2], l = pairings[best][3];

  double total = bvn_cdf(b[i], b[j], c(i, j)) * bvn_cdf(b[k], b[l], c(k, l));

  const std::array<std::array<int, 4>, 4> cross = {{{i, k, j, l},
                                                    {i, l, j, k},
                                                    {j, k, i, l},
                                                    {j, l, i, k}}};
  std::array<double, 16> r{};
  const PathRule& rule = path4();
  double integral = 0.0;
  for (std::size_t q = 0; q < rule.t.size(); ++q) {
    const double t = rule.t[q];
    for (int a = 0; a < 4; ++a) {
      for (int bb = 0; bb < 4; ++bb) r[a * 4 + bb] = c(a, bb);
    }
    for (const auto& e : cross) {
      r[e[0] * 4 + e[1]] *= t;
      r[e[1] * 4 + e[0]] *= t;
    }
    double f = 0.0;
    for (const auto& e : cross) {
      const double rho = c(e[0], e[1]);
      if (rho == 0.0) continue;
      f += rho * bvn_pdf(b[e[0]], b[e[1]], t * rho) * cond_bvn(b, r, e[0], e[1], e[2], e[3]);
    }
    integral += rule.w[q] * f;
  }
  total += integral;
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace

double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 1.0 / std::sqrt(kTwoPi);
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  static constexpr double a[8] = {3.387132872796366608,  133.14166789178437745,
                                  1971.5909503065514427, 13731.693765509461125,
                                  45921.953931549871457, 67265.770927008700853,
                                  33430.575583588128105, 2509.0809287301226727};
  static constexpr double b[8] = {1.0,
                                  42.313330701600911252,
                                  687.1870074920579083,
                                  5394.1960214247511077,
                                  21213.794301586595867,
                                  39307.89580009271061,
                                  28729.085735721942674,
                                  5226.495278852545925};
  static constexpr double c[8] = {1.42343711074968357734,  4.6303378461565452959,
                                  5.7694972214606914055,   3.64784832476320460504,
                                  1.27045825245236838258,  0.24178072517745061177,
                                  0.0227238449892691845833, 7.7454501427834140764e-4};
  static constexpr double d[8] = {1.0,
                                  2.05319162663775882187,
                                  1.6763848301838038494,
                                  0.68976733498510000455,
                                  0.14810397642748007459,
                                  0.0151986665636164571966,
                                  5.475938084995344946e-4,
                                  1.05075007164441684324e-9};
  static constexpr double e[8] = {6.6579046435011037772,   5.4637849111641143699,
                                  1.7848265399172913358,   0.29656057182850489123,
                                  0.026532189526576123093, 0.0012426609473880784386,
                                  2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {1.0,
                                  0.59983220655588793769,
                                  0.13692988092273580531,
                                  0.0148753612908506148525,
                                  7.868691311456132591e-4,
                                  1.8463183175100546818e-5,
                                  1.4215117583164458887e-7,
                                  2.04426310338993978564e-15};
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, 8, r) / poly(b, 8, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = poly(c, 8, r) / poly(d, 8, r);
  } else {
    r -= 5.0;
    v = poly(e, 8, r) / poly(f, 8, r);
  }
  return q < 0.0 ? -v : v;
}

double bvn_pdf(double x, double y, double rho) {
  const double om = 1.0 - rho * rho;
  return std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * om)) /
         (kTwoPi * std::sqrt(om));
}

double bvn_cdf(double a, double b, double rho) {
  if (std::isnan(a) || std::isnan(b) || std::isnan(rho)) {
    throw std::invalid_argument("bvn_cdf: NaN argument");
  }
  if (a == -std::numeric_limits<double>::infinity() ||
      b == -std::numeric_limits<double>::infinity()) {
    return 0.0;
  }
  if (a == std::numeric_limits<double>::infinity()) return norm_cdf(b);
  if (b == std::numeric_limits<double>::infinity()) return norm_cdf(a);
  return bvnu(-a, -b, std::clamp(rho, -1.0, 1.0));
}

CorrelationMatrixSmall::CorrelationMatrixSmall(std::size_t dim, std::span<const double> entries)
    : dim_(dim) {
  if (dim < 2 || dim > 4) throw std::invalid_argument("correlation matrix dimension must be 2-4");
  if (entries.size() != dim * dim) {
    throw std::invalid_argument("correlation matrix needs dim*dim entries");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) a_[i * 4 + j] = entries[i * dim + j];
  }
  validate();
}

CorrelationMatrixSmall::CorrelationMatrixSmall(std::size_t dim,
                                               std::initializer_list<double> entries)
    : CorrelationMatrixSmall(dim, std::span<const double>(entries.begin(), entries.size())) {}

void CorrelationMatrixSmall::validate() const {
  for (std::size_t i = 0; i < dim_; ++i) {
    if (std::abs((*this)(i, i) - 1.0) > 1e-12) {
      throw std::invalid_argument("correlation matrix must have unit diagonal");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const double v = (*this)(i, j);
      if (!std::isfinite(v) || std::abs(v - (*this)(j, i)) > 1e-12 || std::abs(v) > 1.0) {
        throw std::invalid_argument("correlation matrix must be symmetric with entries in [-1,1]");
      }
    }
  }
  // Cholesky as the definiteness test.
  double l[4][4] = {};
  for (std::size_t j = 0; j < dim_; ++j) {
    double s = (*this)(j, j);
    for (std::size_t k = 0; k < j; ++k) s -= l[j][k] * l[j][k];
    if (!(s > 0.0)) throw std::invalid_argument("correlation matrix is not positive definite");
    l[j][j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < dim_; ++i) {
      double t = (*this)(i, j);
      for (std::size_t k = 0; k < j; ++k) t -= l[i][k] * l[j][k];
      l[i][j] = t / l[j][j];
    }
  }
}

double mvn_cdf(std::span<const double> upper, const CorrelationMatrixSmall& corr) {
  if (upper.size() != corr.dim()) {
    throw std::invalid_argument("mvn_cdf: limit vector and matrix dimensions differ");
  }
  switch (corr.dim()) {
    case 2:
      return bvn_cdf(clamp_limit(upper[0]), clamp_limit(upper[1]), corr(0, 1));
    case 3:
      return phi3({clamp_limit(upper[0]), clamp_limit(upper[1]), clamp_limit(upper[2])}, corr);
    default:
      return phi4({clamp_limit(upper[0]), clamp_limit(upper[1]), clamp_limit(upper[2]),
                   clamp_limit(upper[3])},
                  corr);
  }
}

}  // namespace clda::gauss
