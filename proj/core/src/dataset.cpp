#include "fepca/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fepca {

void Dataset::validate() const {
  if (n() < 3) {
    throw std::invalid_argument("dataset needs at least 3 rows, got " + std::to_string(n()));
  }
  if (p() < 2) {
    throw std::invalid_argument("dataset needs at least 2 columns, got " + std::to_string(p()));
  }
  if (static_cast<int>(row_labels.size()) != n()) {
    throw std::invalid_argument("row label count " + std::to_string(row_labels.size()) +
                                " does not match " + std::to_string(n()) + " rows");
  }
  if (static_cast<int>(col_labels.size()) != p()) {
    throw std::invalid_argument("column label count " + std::to_string(col_labels.size()) +
                                " does not match " + std::to_string(p()) + " columns");
  }
  for (int j = 0; j < p(); ++j) {
    for (int i = 0; i < n(); ++i) {
      if (!std::isfinite(values(i, j))) {
        throw std::invalid_argument("non-finite value at row " + std::to_string(i + 1) +
                                    " (" + row_labels[i] + "), column " + std::to_string(j + 1) +
                                    " (" + col_labels[j] + ")");
      }
    }
  }
}

Eigen::MatrixXd Preprocess::apply(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd out = m.rowwise() - col_means.transpose();
  out.array().rowwise() /= col_scales.transpose().array();
  return out;
}

Eigen::MatrixXd Preprocess::undo(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd out = m;
  out.array().rowwise() *= col_scales.transpose().array();
  out.rowwise() += col_means.transpose();
  return out;
}

std::pair<Eigen::MatrixXd, Preprocess> preprocess(const Dataset& data, bool scale) {
  data.validate();
  const int n = data.n();
  const int p = data.p();

  Preprocess pre;
  pre.scaled = scale;
  pre.col_means = data.values.colwise().mean();
  pre.col_scales = Eigen::VectorXd::Ones(p);

  Eigen::MatrixXd work = data.values.rowwise() - pre.col_means.transpose();
  if (scale) {
    for (int j = 0; j < p; ++j) {
      const double sd = std::sqrt(work.col(j).squaredNorm() / (n - 1));
      if (sd <= 0.0) {
        throw std::invalid_argument("cannot scale zero-variance column " +
                                    std::to_string(j + 1) + " (" + data.col_labels[j] + ")");
      }
      pre.col_scales(j) = sd;
    }
    work.array().rowwise() /= pre.col_scales.transpose().array();
  }
  return {std::move(work), std::move(pre)};
}

}  // namespace fepca
