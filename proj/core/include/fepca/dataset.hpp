#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace fepca {

/// A labeled numeric table: n individuals (rows) by p variables (columns).
struct Dataset {
  Eigen::MatrixXd values;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }

  /// Throws std::invalid_argument unless n >= 3, p >= 2, every entry is
  /// finite, and the label vectors match the matrix shape.
  void validate() const;
};

/// Column transform (centering, optional unit-variance scaling) recorded so
/// the original units can be recovered exactly.
struct Preprocess {
  Eigen::VectorXd col_means;
  Eigen::VectorXd col_scales;  // all ones unless scaled
  bool scaled = false;

  /// Original units -> working coordinates.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;
  /// Working coordinates -> original units.
  Eigen::MatrixXd undo(const Eigen::MatrixXd& m) const;
};

/// Centers every column; with scale also divides by the sample standard
/// deviation. Returns the working matrix together with the inverse map.
/// Scaling a zero-variance column is an error.
std::pair<Eigen::MatrixXd, Preprocess> preprocess(const Dataset& data, bool scale);

}  // namespace fepca
