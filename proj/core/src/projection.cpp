#include "fepca/projection.hpp"

#include <stdexcept>
#include <string>

namespace fepca {

// The projector splits into three mutually orthogonal pieces: column means,
// the loading span acting on the centered part, and what the row span
// catches outside the loading span. In Kronecker block form (cell (i, j) at
// vec index j*n + i) block (r, c) of P is
//   [r == c] (J/n + Pu) + Pv(r, c) (C - Pu),
// with Pu = U U', Pv = V V', J the all-ones matrix and C = I - J/n.

ProjectionOperator projection_operator(const PcaFit& fit, long max_cells) {
  const long n = fit.n();
  const long p = fit.p();
  if (n * p > max_cells) {
    throw std::invalid_argument(
        "refusing to materialize a " + std::to_string(n * p) + "^2 projector (limit " +
        std::to_string(max_cells) + " cells); use apply_projection or projection_diagonal");
  }
  const Eigen::MatrixXd Pu = fit.U * fit.U.transpose();
  const Eigen::MatrixXd Pv = fit.V * fit.V.transpose();
  Eigen::MatrixXd mean_block =
      Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n)) + Pu;
  Eigen::MatrixXd centered_complement =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n)) - Pu;

  ProjectionOperator op;
  op.P.setZero(n * p, n * p);
  for (long c = 0; c < p; ++c) {
    for (long r = 0; r < p; ++r) {
      Eigen::Ref<Eigen::MatrixXd> block = op.P.block(r * n, c * n, n, n);
      block = Pv(r, c) * centered_complement;
      if (r == c) block += mean_block;
    }
  }
  op.diagonal = op.P.diagonal();
  return op;
}

Eigen::VectorXd projection_diagonal(const PcaFit& fit) {
  const int n = fit.n();
  const int p = fit.p();
  const Eigen::VectorXd pu = fit.U.array().square().rowwise().sum();  // diag of U U'
  const Eigen::VectorXd pv = fit.V.array().square().rowwise().sum();  // diag of V V'
  Eigen::VectorXd diag(static_cast<long>(n) * p);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < n; ++i) {
      diag(static_cast<long>(j) * n + i) =
          inv_n + pv(j) * (1.0 - inv_n) + pu(i) - pv(j) * pu(i);
    }
  }
  return diag;
}

Eigen::MatrixXd apply_projection(const PcaFit& fit, const Eigen::MatrixXd& z) {
  const int n = fit.n();
  const int p = fit.p();
  if (z.rows() != n || z.cols() != p) {
    throw std::invalid_argument("matrix shape does not match the fit");
  }
  const Eigen::RowVectorXd zbar = z.colwise().mean();
  const Eigen::MatrixXd zc = z.rowwise() - zbar;

  // P z = means + Zc Pv + Pu Zc - Pu Zc Pv, evaluated factor-by-factor so
  // nothing bigger than n x p is formed.
  const Eigen::MatrixXd zv = zc * fit.V;                    // n x S
  const Eigen::MatrixXd utz = fit.U.transpose() * zc;       // S x p
  const Eigen::MatrixXd utzv = fit.U.transpose() * zv;      // S x S

  Eigen::MatrixXd out = zv * fit.V.transpose();
  out.noalias() += fit.U * utz;
  out.noalias() -= fit.U * (utzv * fit.V.transpose());
  out.rowwise() += zbar;
  return out;
}

}  // namespace fepca
