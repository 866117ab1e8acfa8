#include "fepca/pca.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fepca {

Eigen::VectorXd PcaFit::eigenvalues() const {
  return singular_values.array().square();
}

Eigen::MatrixXd PcaFit::scores() const {
  return U * singular_values.asDiagonal();
}

Eigen::MatrixXd PcaFit::centered_fitted() const {
  return fitted.rowwise() - preprocess.col_means.transpose();
}

PcaFit fit_pca(const Eigen::MatrixXd& data, int rank) {
  const int n = static_cast<int>(data.rows());
  const int p = static_cast<int>(data.cols());
  if (n < 3 || p < 2) {
    throw std::invalid_argument("matrix too small for a PCA fit: " + std::to_string(n) +
                                " x " + std::to_string(p));
  }
  const int max_rank = std::min(n - 1, p);
  if (rank < 1 || rank > max_rank) {
    throw std::invalid_argument("rank " + std::to_string(rank) + " outside [1, " +
                                std::to_string(max_rank) + "] for a " + std::to_string(n) +
                                " x " + std::to_string(p) + " matrix");
  }
  if (!data.allFinite()) {
    throw std::invalid_argument("matrix passed to fit_pca has non-finite entries");
  }

  PcaFit fit;
  fit.rank = rank;
  fit.preprocess.col_means = data.colwise().mean();
  fit.preprocess.col_scales = Eigen::VectorXd::Ones(p);
  fit.preprocess.scaled = false;

  const Eigen::MatrixXd centered = data.rowwise() - fit.preprocess.col_means.transpose();
  fit.total_variance = centered.squaredNorm();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  fit.U = svd.matrixU().leftCols(rank);
  fit.V = svd.matrixV().leftCols(rank);
  fit.singular_values = sv.head(rank);

  // Pin the sign indeterminacy of each component: the loading entry with
  // the largest magnitude is made positive (first index wins ties).
  for (int s = 0; s < rank; ++s) {
    int arg = 0;
    double best = std::abs(fit.V(0, s));
    for (int j = 1; j < p; ++j) {
      const double a = std::abs(fit.V(j, s));
      if (a > best) {
        best = a;
        arg = j;
      }
    }
    if (fit.V(arg, s) < 0.0) {
      fit.V.col(s) = -fit.V.col(s);
      fit.U.col(s) = -fit.U.col(s);
    }
  }

  if (rank < sv.size()) {
    const double kept = sv(rank - 1) * sv(rank - 1);
    const double dropped = sv(rank) * sv(rank);
    fit.degenerate_spectrum = std::abs(kept - dropped) <= 1e-10 * std::max(1.0, kept);
  }

  fit.fitted = fit.U * fit.singular_values.asDiagonal() * fit.V.transpose();
  fit.fitted.rowwise() += fit.preprocess.col_means.transpose();
  return fit;
}

NoiseModel estimate_noise_variance(const Eigen::MatrixXd& data, const PcaFit& fit) {
  const long n = fit.n();
  const long p = fit.p();
  const long S = fit.rank;
  if (data.rows() != n || data.cols() != p) {
    throw std::invalid_argument("data shape does not match the fit");
  }
  NoiseModel out;
  // np minus the dimension of the fitted family: p column means plus the
  // nS + pS - S - S^2 free structure parameters. The count factors as
  // (n - 1 - S)(p - S) and equals np - trace of the tangent projector, which
  // is what makes the estimate unbiased in the small-noise regime.
  out.df = (n - 1 - S) * (p - S);
  if (out.df <= 0) {
    throw std::invalid_argument("no residual degrees of freedom at rank " + std::to_string(S) +
                                " for a " + std::to_string(n) + " x " + std::to_string(p) +
                                " matrix");
  }
  out.sigma2 = (data - fit.fitted).squaredNorm() / static_cast<double>(out.df);
  return out;
}

double curvature_index(const PcaFit& fit) {
  const double smallest = fit.singular_values(fit.rank - 1);
  if (smallest <= 0.0) {
    throw std::runtime_error("curvature index undefined: smallest retained singular value is 0");
  }
  return 1.0 / smallest;
}

Eigen::MatrixXd corrected_residuals(const Eigen::MatrixXd& data, const PcaFit& fit,
                                    const Eigen::VectorXd& leverage,
                                    std::vector<std::pair<int, int>>* flagged) {
  const int n = fit.n();
  const int p = fit.p();
  if (data.rows() != n || data.cols() != p) {
    throw std::invalid_argument("data shape does not match the fit");
  }
  if (leverage.size() != static_cast<long>(n) * p) {
    throw std::invalid_argument("leverage vector has wrong length");
  }
  Eigen::MatrixXd out(n, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) {
      const double h = leverage(static_cast<long>(j) * n + i);
      if (h >= 1.0 - 1e-10) {
        out(i, j) = std::numeric_limits<double>::quiet_NaN();
        if (flagged) flagged->emplace_back(i, j);
      } else {
        out(i, j) = (data(i, j) - fit.fitted(i, j)) / std::sqrt(1.0 - h);
      }
    }
  }
  return out;
}

}  // namespace fepca
