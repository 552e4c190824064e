#include "clda/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "clda/errors.hpp"

namespace clda {

std::size_t Dataset::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset Dataset::rows(std::span<const std::size_t> idx) const {
  Dataset out;
  out.names = names;
  out.labels.reserve(idx.size());
  out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.labels.push_back(labels[idx[i]]);
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

Eigen::MatrixXd Dataset::joint() const {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = labels[i];
  }
  out.rightCols(x.cols()) = x;
  return out;
}

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> out;
  out.reserve(p);
  for (std::size_t j = 0; j < p; ++j) out.push_back("x" + std::to_string(j + 1));
  return out;
}

void validate_dataset(const Dataset& data) {
  if (static_cast<std::size_t>(data.x.rows()) != data.labels.size()) {
    throw InputError("label count does not match covariate rows");
  }
  if (data.n() < 2) throw InputError("need at least two observations");
  if (data.p() == 0) throw InputError("need at least one covariate");
  if (!data.names.empty() && data.names.size() != data.p()) {
    throw InputError("column name count does not match covariate columns");
  }
  for (const int y : data.labels) {
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
  }
  if (data.count(0) == 0 || data.count(1) == 0) {
    throw InputError("both classes must be present");
  }
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
    const std::string name =
        data.names.empty() ? "x" + std::to_string(j + 1) : data.names[static_cast<std::size_t>(j)];
    const auto col = data.x.col(j);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (!std::isfinite(col(i))) throw InputError("column '" + name + "' has a non-finite value");
      if (col(i) < 0.0) throw InputError("column '" + name + "' has a negative value");
    }
    if (col.maxCoeff() == col.minCoeff()) {
      throw InputError(col.maxCoeff() == 0.0 ? "column '" + name + "' is all zeros"
                                             : "column '" + name + "' is constant");
    }
  }
}

}  // namespace clda
