#pragma once

#include <Eigen/Core>
#include <vector>

#include "fepca/inference.hpp"

namespace fepca {

/// Orthogonal alignment map; R'R = I, reflections allowed, no scaling or
/// translation.
struct Rotation {
  Eigen::MatrixXd R;
  bool degenerate = false;  // replicate was zero; R fell back to identity
};

/// The orthogonal R minimizing ||reference - replicate * R||_F, from the
/// SVD of replicate' * reference.
Rotation procrustes_rotation(const Eigen::MatrixXd& reference,
                             const Eigen::MatrixXd& replicate);

/// Rotates each matrix toward the target. Column geometry goes through the
/// same function with everything transposed.
std::vector<Eigen::MatrixXd> align_matrices(const std::vector<Eigen::MatrixXd>& replicates,
                                            const Eigen::MatrixXd& target);

/// align_matrices with the set's centered reference fit as target (the
/// row-point problem in the reference's centered frame).
std::vector<Eigen::MatrixXd> align_set(const PseudoRealizationSet& set);

/// Row coordinates of `aligned` on the reference axes listed in `dims`
/// (0-based component indices): aligned * V[:, dims]. The caller supplies
/// matrices already expressed in the reference's centered frame.
Eigen::MatrixXd project_scores(const Eigen::MatrixXd& aligned, const PcaFit& reference,
                               const std::vector<int>& dims);

/// Gaussian confidence region: mean, sample covariance, and the chi-square
/// radius for the nominal level.
struct ConfidenceEllipsoid {
  Eigen::VectorXd center;
  Eigen::MatrixXd cov;
  double level = 0.95;
  double radius2 = 0.0;  // chi-square quantile at `level`, dim(center) dof

  int dim() const { return static_cast<int>(center.size()); }
};

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
double chi_square_quantile(int dof, double prob);

/// Fits the level-`level` ellipsoid to the rows of `points` (K x d, K > d).
/// A covariance that is numerically singular is nudged by a relative ridge
/// so the region stays usable.
ConfidenceEllipsoid fit_ellipsoid(const Eigen::MatrixXd& points, double level);

/// Mahalanobis containment test. A collapsed (zero-covariance) region
/// contains only points at its center, up to a relative tolerance.
bool contains(const ConfidenceEllipsoid& e, const Eigen::VectorXd& point);

/// m >= 8 points tracing the boundary of a 2-D ellipsoid, in order, ready
/// to close into a polyline.
Eigen::MatrixXd ellipse_outline(const ConfidenceEllipsoid& e, int m_points);

}  // namespace fepca
