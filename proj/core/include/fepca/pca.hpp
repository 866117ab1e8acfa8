#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "fepca/dataset.hpp"

namespace fepca {

/// Rank-S truncated SVD of a column-centered matrix.
///
/// The factors satisfy  centered_fitted() = U * diag(singular_values) * V',
/// with orthonormal U (columns summing to zero) and V. Each column of V is
/// signed so that its largest-magnitude entry is positive, which pins the
/// otherwise arbitrary factor signs and makes refits reproducible.
struct PcaFit {
  Eigen::MatrixXd U;                // n x S
  Eigen::VectorXd singular_values;  // length S, non-increasing
  Eigen::MatrixXd V;                // p x S
  int rank = 0;
  Preprocess preprocess;     // centering applied before the SVD
  Eigen::MatrixXd fitted;    // rank-S reconstruction, input coordinates
  bool degenerate_spectrum = false;  // last kept eigenvalue ties the first dropped one
  double total_variance = 0.0;       // squared Frobenius norm of the centered input

  int n() const { return static_cast<int>(U.rows()); }
  int p() const { return static_cast<int>(V.rows()); }

  /// Eigenvalues of the covariance-scale problem: squared singular values.
  Eigen::VectorXd eigenvalues() const;
  /// Row coordinates on the principal axes: U * diag(singular_values).
  Eigen::MatrixXd scores() const;
  /// Fitted matrix minus the estimated column means.
  Eigen::MatrixXd centered_fitted() const;
};

/// Centers `data` by column and keeps the top `rank` singular directions.
/// Requires 1 <= rank <= min(n - 1, p).
PcaFit fit_pca(const Eigen::MatrixXd& data, int rank);

/// Residual-based estimate of the noise variance under the fixed-rank model.
struct NoiseModel {
  double sigma2 = 0.0;
  long df = 0;  // residual degrees of freedom, (n - 1 - S)(p - S)
};

/// sigma2 = ||data - fitted||^2 / df. Throws when df <= 0 (rank too large
/// relative to the matrix for an unbiased residual variance).
NoiseModel estimate_noise_variance(const Eigen::MatrixXd& data, const PcaFit& fit);

/// Reciprocal of the smallest retained singular value. The product
/// sigma * curvature_index is a cheap diagnostic: when it is small the local
/// linearization of the rank-S manifold (and hence the asymptotic regions)
/// can be trusted.
double curvature_index(const PcaFit& fit);

/// Residuals rescaled for cell leverage: (data - fitted) / sqrt(1 - leverage),
/// which restores the full noise scale that projection removed. Cells whose
/// leverage is within 1e-10 of one become NaN and are appended to `flagged`
/// when it is given.
Eigen::MatrixXd corrected_residuals(const Eigen::MatrixXd& data, const PcaFit& fit,
                                    const Eigen::VectorXd& leverage,
                                    std::vector<std::pair<int, int>>* flagged = nullptr);

}  // namespace fepca
