#pragma once

#include <Eigen/Core>
#include <vector>

#include "fepca/pca.hpp"

namespace fepca {

/// A data matrix with an observation mask; true marks an observed cell.
/// Values under unobserved cells are ignored.
struct MaskedMatrix {
  Eigen::MatrixXd values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
  long observed_count() const;

  /// Checks that a rank-`rank` fit is identified: shapes match, observed
  /// cells are finite, every row keeps at least one observation, every
  /// column at least two, and the observed count is at least the parameter
  /// count p + (n - 1) * rank + p * rank - rank^2 (column means plus the
  /// rank-`rank` structure). Throws std::invalid_argument otherwise.
  void validate(int rank) const;

  /// Fully observed matrix with exactly one cell masked out.
  static MaskedMatrix without_cell(const Eigen::MatrixXd& values, int i, int j);
};

enum class EmInit { ColumnMean, Zero, Provided };

struct EmConfig {
  double tol = 1e-8;  // relative Frobenius change of the completed matrix
  int max_iter = 1000;
  EmInit init = EmInit::ColumnMean;
  Eigen::MatrixXd init_values;  // full matrix, used when init == Provided
};

struct EmFit {
  PcaFit fit;  // fit of the completed matrix at the final iteration
  Eigen::MatrixXd completed;  // observed values with converged fills
  bool converged = false;
  int iterations = 0;
  std::vector<double> loss_trace;  // observed-cell squared error per iteration
};

/// Squared reconstruction error over observed cells only.
double weighted_loss(const MaskedMatrix& masked, const PcaFit& fit);

/// Alternating imputation: fill the masked cells (column means of the
/// observed values by default), then repeat [center, rank-S fit, refill the
/// masked cells from the fit] until the completed matrix moves by less than
/// tol in relative Frobenius norm. Each iteration weakly decreases the
/// observed-cell loss. Hitting max_iter leaves converged == false; the last
/// iterate is still returned.
EmFit em_pca(const MaskedMatrix& masked, int rank, const EmConfig& cfg = {});

}  // namespace fepca
