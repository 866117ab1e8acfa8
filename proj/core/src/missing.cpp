#include "fepca/missing.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fepca {

long MaskedMatrix::observed_count() const {
  long c = 0;
  for (int j = 0; j < p(); ++j)
    for (int i = 0; i < n(); ++i)
      if (mask(i, j)) ++c;
  return c;
}

void MaskedMatrix::validate(int rank) const {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
    throw std::invalid_argument("mask shape does not match the values");
  }
  if (n() < 3 || p() < 2) {
    throw std::invalid_argument("masked matrix too small: " + std::to_string(n()) + " x " +
                                std::to_string(p()));
  }
  if (rank < 1 || rank > std::min(n() - 1, p())) {
    throw std::invalid_argument("rank " + std::to_string(rank) + " infeasible for a " +
                                std::to_string(n()) + " x " + std::to_string(p()) + " matrix");
  }
  for (int i = 0; i < n(); ++i) {
    int row_obs = 0;
    for (int j = 0; j < p(); ++j) row_obs += mask(i, j) ? 1 : 0;
    if (row_obs < 1) {
      throw std::invalid_argument("row " + std::to_string(i + 1) + " has no observed cell");
    }
  }
  for (int j = 0; j < p(); ++j) {
    int col_obs = 0;
    for (int i = 0; i < n(); ++i) col_obs += mask(i, j) ? 1 : 0;
    if (col_obs < 2) {
      throw std::invalid_argument("column " + std::to_string(j + 1) +
                                  " has fewer than 2 observed cells");
    }
  }
  // Dimension of the fitted family: p column means plus the rank-S structure,
  // p + (n-1)S + pS - S^2. Fewer observations than parameters cannot pin the
  // fit down. (A fully observed matrix always passes for any feasible rank.)
  const long needed = static_cast<long>(p()) + static_cast<long>(n() - 1) * rank +
                      static_cast<long>(p()) * rank - static_cast<long>(rank) * rank;
  if (observed_count() < needed) {
    throw std::invalid_argument("only " + std::to_string(observed_count()) +
                                " observed cells; a rank-" + std::to_string(rank) +
                                " fit needs at least " + std::to_string(needed));
  }
  for (int j = 0; j < p(); ++j) {
    for (int i = 0; i < n(); ++i) {
      if (mask(i, j) && !std::isfinite(values(i, j))) {
        throw std::invalid_argument("non-finite observed cell at row " + std::to_string(i + 1) +
                                    ", column " + std::to_string(j + 1));
      }
    }
  }
}

MaskedMatrix MaskedMatrix::without_cell(const Eigen::MatrixXd& values, int i, int j) {
  if (i < 0 || i >= values.rows() || j < 0 || j >= values.cols()) {
    throw std::invalid_argument("cell (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                ") outside the matrix");
  }
  MaskedMatrix m;
  m.values = values;
  m.mask.setConstant(values.rows(), values.cols(), true);
  m.mask(i, j) = false;
  return m;
}

double weighted_loss(const MaskedMatrix& masked, const PcaFit& fit) {
  double loss = 0.0;
  for (int j = 0; j < masked.p(); ++j) {
    for (int i = 0; i < masked.n(); ++i) {
      if (!masked.mask(i, j)) continue;
      const double r = masked.values(i, j) - fit.fitted(i, j);
      loss += r * r;
    }
  }
  return loss;
}

namespace {

Eigen::MatrixXd initial_completion(const MaskedMatrix& masked, const EmConfig& cfg) {
  Eigen::MatrixXd completed = masked.values;
  switch (cfg.init) {
    case EmInit::ColumnMean:
      for (int j = 0; j < masked.p(); ++j) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < masked.n(); ++i) {
          if (masked.mask(i, j)) {
            sum += masked.values(i, j);
            ++count;
          }
        }
        const double mean = sum / count;  // validate() guarantees count >= 2
        for (int i = 0; i < masked.n(); ++i) {
          if (!masked.mask(i, j)) completed(i, j) = mean;
        }
      }
      break;
    case EmInit::Zero:
      for (int j = 0; j < masked.p(); ++j)
        for (int i = 0; i < masked.n(); ++i)
          if (!masked.mask(i, j)) completed(i, j) = 0.0;
      break;
    case EmInit::Provided:
      if (cfg.init_values.rows() != masked.values.rows() ||
          cfg.init_values.cols() != masked.values.cols()) {
        throw std::invalid_argument("init_values shape does not match the masked matrix");
      }
      for (int j = 0; j < masked.p(); ++j)
        for (int i = 0; i < masked.n(); ++i)
          if (!masked.mask(i, j)) completed(i, j) = cfg.init_values(i, j);
      break;
  }
  return completed;
}

}  // namespace

EmFit em_pca(const MaskedMatrix& masked, int rank, const EmConfig& cfg) {
  masked.validate(rank);
  if (cfg.tol <= 0.0 || cfg.max_iter < 1) {
    throw std::invalid_argument("em_pca needs tol > 0 and max_iter >= 1");
  }

  EmFit out;
  out.completed = initial_completion(masked, cfg);

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    out.fit = fit_pca(out.completed, rank);
    out.iterations = iter;
    out.loss_trace.push_back(weighted_loss(masked, out.fit));

    // Refill only the masked cells; observed cells always keep the data.
    double delta2 = 0.0;
    for (int j = 0; j < masked.p(); ++j) {
      for (int i = 0; i < masked.n(); ++i) {
        if (masked.mask(i, j)) continue;
        const double d = out.fit.fitted(i, j) - out.completed(i, j);
        delta2 += d * d;
        out.completed(i, j) = out.fit.fitted(i, j);
      }
    }
    const double scale = out.completed.norm();
    if (std::sqrt(delta2) <= cfg.tol * std::max(scale, 1e-300)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace fepca
