#pragma once

// Synthetic zero-inflated data: latent correlation structures, the joint
// copula generator, the two-class mixture generator and their oracle rules.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clda/dataset.hpp"

namespace clda::simgen {

enum class Family { Joint, Mixture };
enum class Structure { AR, CS, GD };
enum class Truncation { None, Low, High };

const char* to_string(Family f);
const char* to_string(Structure s);
const char* to_string(Truncation t);
Family parse_family(const std::string& s);        // "joint" | "mixture"
Structure parse_structure(const std::string& s);  // "ar" | "cs" | "gd"
Truncation parse_truncation(const std::string& s);  // "none" | "low" | "high"

// Zero-proportion band of a truncation level.
std::pair<double, double> truncation_band(Truncation t);

// A marginal distribution given by a sample: F(x) = #{v <= x} / m.
struct EmpiricalTable {
  std::vector<double> values;  // sorted, non-negative

  double zero_mass() const;
  // min{x in values : F(x) >= u}, u in (0, 1].
  double generalized_inverse(double u) const;
};

// Tables grouped by truncation level.
struct MarginalLibrary {
  std::vector<EmpiricalTable> none, low, high;

  const std::vector<EmpiricalTable>& level(Truncation t) const;

  // Zero-inflated log-normal tables whose zero masses fall in each band.
  static MarginalLibrary synthetic(std::uint64_t seed, int tables_per_level = 40,
                                   int table_size = 200);

  // Long-format CSV with columns table,value. Every table goes to the level
  // whose band holds its zero mass; tables with no zeros are `none`.
  static MarginalLibrary from_csv(const std::string& path);
};

struct SimConfig {
  Family family = Family::Joint;
  Structure structure = Structure::AR;
  Truncation truncation = Truncation::Low;
  int n = 150;
  int n_test = 300;
  int p = 300;
  int s = 15;
  double v2 = 0.05;                 // joint: conditional variance of the label latent
  double alpha = 0.2;               // mixture: Bayes error
  std::optional<double> mean_shift;  // mixture: C; default 10 * max s_j
  std::uint64_t seed = 0;
};

void validate(const SimConfig& cfg);

// AR and CS are correlation matrices. GD is Gamma N Gamma' with a Haar
// rotation drawn from `seed`; its diagonal is not one, and the generators
// rescale it to a correlation matrix.
Eigen::MatrixXd build_structure(Structure structure, int p, std::uint64_t seed);

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// signs of diag(R) folded into Q.
Eigen::MatrixXd haar_orthogonal(int p, std::uint64_t seed);

// Eigenvalues of the GD structure, summing to p.
Eigen::VectorXd gd_eigenvalues(int p);

struct OracleRule {
  Family family = Family::Joint;
  Eigen::VectorXd beta;    // true direction
  Eigen::VectorXd center;  // mixture: (mu0 + mu1) / 2; zero for the joint model
};

// Applied to latent rows: 1((z - center)'beta > 0).
std::vector<int> oracle_classify(const OracleRule& rule, const Eigen::MatrixXd& latent);

struct Simulation {
  Dataset train;
  Dataset test;
  Eigen::MatrixXd train_latent;
  Eigen::MatrixXd test_latent;
  OracleRule oracle;
  Eigen::MatrixXd sigma;  // joint: full (1+p) correlation; mixture: p x p covariance
  Eigen::VectorXd mu0, mu1, scales, thresholds;  // mixture only
  std::vector<std::size_t> table_index;           // joint only: library table per covariate
};

Simulation generate_joint(const SimConfig& cfg, const MarginalLibrary& library);
Simulation generate_mixture(const SimConfig& cfg);
Simulation generate(const SimConfig& cfg, const std::optional<MarginalLibrary>& library = std::nullopt);

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace clda::simgen
