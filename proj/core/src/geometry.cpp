#include "fepca/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fepca/parallel.hpp"

namespace fepca {

Rotation procrustes_rotation(const Eigen::MatrixXd& reference,
                             const Eigen::MatrixXd& replicate) {
  if (reference.rows() != replicate.rows() || reference.cols() != replicate.cols()) {
    throw std::invalid_argument("procrustes inputs must share a shape");
  }
  Rotation rot;
  if (replicate.norm() == 0.0) {
    rot.R = Eigen::MatrixXd::Identity(reference.cols(), reference.cols());
    rot.degenerate = true;
    return rot;
  }
  // argmax_R tr(R' M) with M = replicate' reference: R = (left factors)(right factors)'.
  const Eigen::MatrixXd m = replicate.transpose() * reference;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  rot.R = svd.matrixU() * svd.matrixV().transpose();
  return rot;
}

std::vector<Eigen::MatrixXd> align_matrices(const std::vector<Eigen::MatrixXd>& replicates,
                                            const Eigen::MatrixXd& target) {
  std::vector<Eigen::MatrixXd> aligned(replicates.size());
  parallel_for(replicates.size(), [&](std::size_t k) {
    aligned[k] = replicates[k] * procrustes_rotation(target, replicates[k]).R;
  });
  return aligned;
}

std::vector<Eigen::MatrixXd> align_set(const PseudoRealizationSet& set) {
  // Express every replicate in the reference's centered frame first: the
  // common column means must not masquerade as estimator variability, while
  // each replicate's own mean *deviation* is variability and survives.
  const Eigen::RowVectorXd means = set.reference.preprocess.col_means.transpose();
  std::vector<Eigen::MatrixXd> devs(set.replicates.size());
  for (std::size_t k = 0; k < set.replicates.size(); ++k) {
    devs[k] = set.replicates[k].rowwise() - means;
  }
  return align_matrices(devs, set.reference.centered_fitted());
}

Eigen::MatrixXd project_scores(const Eigen::MatrixXd& aligned, const PcaFit& reference,
                               const std::vector<int>& dims) {
  if (aligned.cols() != reference.p()) {
    throw std::invalid_argument("matrix width does not match the reference fit");
  }
  if (dims.empty()) {
    throw std::invalid_argument("no axes requested");
  }
  Eigen::MatrixXd axes(reference.p(), dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (dims[k] < 0 || dims[k] >= reference.rank) {
      throw std::invalid_argument("axis " + std::to_string(dims[k] + 1) +
                                  " outside the fitted rank " + std::to_string(reference.rank));
    }
    axes.col(static_cast<long>(k)) = reference.V.col(dims[k]);
  }
  return aligned * axes;
}

double chi_square_quantile(int dof, double prob) {
  if (dof < 1) throw std::invalid_argument("chi-square needs dof >= 1");
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::invalid_argument("probability must lie strictly between 0 and 1");
  }
  return boost::math::quantile(boost::math::chi_squared(dof), prob);
}

ConfidenceEllipsoid fit_ellipsoid(const Eigen::MatrixXd& points, double level) {
  const long k = points.rows();
  const long d = points.cols();
  if (d < 1) throw std::invalid_argument("points need at least one coordinate");
  if (k < d + 1) {
    throw std::invalid_argument("need more than " + std::to_string(d) +
                                " replicates to fit a " + std::to_string(d) +
                                "-dimensional ellipsoid, got " + std::to_string(k));
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie strictly between 0 and 1");
  }

  ConfidenceEllipsoid e;
  e.level = level;
  e.center = points.colwise().mean();
  const Eigen::MatrixXd centered = points.rowwise() - e.center.transpose();
  e.cov = centered.transpose() * centered / static_cast<double>(k - 1);
  e.radius2 = chi_square_quantile(static_cast<int>(d), level);

  // A replicate cloud can be numerically flat (e.g. a method that returned
  // near-identical replicates). Nudge such covariances with a relative
  // ridge so containment tests stay well defined; a truly zero covariance
  // is left alone and handled by contains().
  const double tr = e.cov.trace();
  if (tr > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e.cov);
    const double floor = 1e-12 * tr / static_cast<double>(d);
    if (eig.eigenvalues()(0) < floor) {
      e.cov += floor * Eigen::MatrixXd::Identity(d, d);
    }
  }
  return e;
}

bool contains(const ConfidenceEllipsoid& e, const Eigen::VectorXd& point) {
  if (point.size() != e.center.size()) {
    throw std::invalid_argument("point dimension does not match the ellipsoid");
  }
  const Eigen::VectorXd diff = point - e.center;
  // Collapsed region (noise-free data, or replicates identical to floating-
  // point precision): membership degenerates to "is this the center".
  const double collapse_scale = 1e-9 * std::max(1.0, e.center.norm());
  const double spread = std::sqrt(std::max(e.cov.trace(), 0.0));
  if (spread <= collapse_scale) {
    return diff.norm() <= collapse_scale;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(e.cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error("ellipsoid covariance is not positive definite");
  }
  const double maha = diff.dot(ldlt.solve(diff));
  return maha <= e.radius2;
}

Eigen::MatrixXd ellipse_outline(const ConfidenceEllipsoid& e, int m_points) {
  if (e.dim() != 2) {
    throw std::invalid_argument("outline only defined for 2-D ellipsoids, got dimension " +
                                std::to_string(e.dim()));
  }
  if (m_points < 8) throw std::invalid_argument("outline needs at least 8 points");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e.cov);
  const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd half =
      eig.eigenvectors() * clamped.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

  const double r = std::sqrt(e.radius2);
  Eigen::MatrixXd out(m_points, 2);
  for (int k = 0; k < m_points; ++k) {
    const double theta = 2.0 * M_PI * k / m_points;
    Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    out.row(k) = (e.center + r * (half * u)).transpose();
  }
  return out;
}

}  // namespace fepca
