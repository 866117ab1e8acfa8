#pragma once

#include <Eigen/Core>

#include "fepca/pca.hpp"

namespace fepca {

/// Dense projector onto the tangent space of the rank-S model at the fit,
/// expressed in vec coordinates (columns stacked, cell (i, j) at j*n + i).
/// Symmetric and idempotent by construction.
struct ProjectionOperator {
  Eigen::MatrixXd P;         // np x np
  Eigen::VectorXd diagonal;  // leverages P(k, k)
};

/// Materializes the projector. Refuses (std::invalid_argument) when
/// n * p > max_cells, since the matrix grows as (np)^2; use
/// apply_projection or projection_diagonal for large problems.
ProjectionOperator projection_operator(const PcaFit& fit, long max_cells = 4000);

/// Cell leverages P(k, k) without materializing P:
///   1/n + pv_j (1 - 1/n) + pu_i - pv_j pu_i,
/// where pu_i, pv_j are the diagonals of the U- and V-projectors.
Eigen::VectorXd projection_diagonal(const PcaFit& fit);

/// Applies the projector to an n x p matrix exactly, in O(np(n+p)) time:
/// keeps z's column means, projects the centered part onto the span of the
/// fit's row and column spaces.
Eigen::MatrixXd apply_projection(const PcaFit& fit, const Eigen::MatrixXd& z);

}  // namespace fepca
