#pragma once

#include <Eigen/Core>
#include <string>

#include "fepca/rng.hpp"

namespace testsupport {

inline Eigen::MatrixXd random_matrix(int n, int p, fepca::Rng& rng) {
  Eigen::MatrixXd m(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = rng.normal();
  return m;
}

/// Rank-r signal plus iid Gaussian noise, a generic test surface.
inline Eigen::MatrixXd noisy_low_rank(int n, int p, int r, double sigma, fepca::Rng& rng) {
  const Eigen::MatrixXd u = random_matrix(n, r, rng);
  const Eigen::MatrixXd v = random_matrix(p, r, rng);
  Eigen::MatrixXd x = u * v.transpose();
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) += sigma * rng.normal();
  return x;
}

inline std::string data_dir() {
#ifdef FEPCA_TEST_DATA_DIR
  return FEPCA_TEST_DATA_DIR;
#else
  return "tests/data";
#endif
}

}  // namespace testsupport
