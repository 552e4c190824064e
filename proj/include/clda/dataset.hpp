#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clda {

// Binary labels plus an n x p matrix of non-negative, possibly zero-inflated
// covariates.
struct Dataset {
  std::vector<int> labels;
  Eigen::MatrixXd x;
  std::vector<std::string> names;

  std::size_t n() const { return labels.size(); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
  std::size_t count(int label) const;

  Dataset rows(std::span<const std::size_t> idx) const;

  // n x (1+p) matrix with the label in column 0.
  Eigen::MatrixXd joint() const;
};

// Names x1..xp, used when a dataset has no header.
std::vector<std::string> default_names(std::size_t p);

// Rejects non-binary labels, a missing class, non-finite or negative
// covariates, and constant columns (all-zero included). Throws InputError
// naming the offending column.
void validate_dataset(const Dataset& data);

}  // namespace clda
