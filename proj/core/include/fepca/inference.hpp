#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "fepca/missing.hpp"
#include "fepca/pca.hpp"

namespace fepca {

enum class Method { Asymptotic, Bootstrap, Jackknife, ApproxJackknife };

/// Canonical names: asymptotic, bootstrap, jackknife, approx-jackknife.
std::string method_name(Method m);
Method method_from_name(const std::string& name);

/// The replicates one method produced for one fit. Every replicate is a
/// full n x p matrix in the same coordinates as the data the method saw,
/// ready for alignment and projection.
struct PseudoRealizationSet {
  Method method = Method::Bootstrap;
  std::vector<Eigen::MatrixXd> replicates;
  PcaFit reference;
  std::uint64_t seed = 0;
  /// Parallel to replicates; empty string = clean, otherwise the reason the
  /// replicate deserves suspicion (it is still included).
  std::vector<std::string> flags;
  /// Set-level warnings, e.g. cells a method had to skip.
  std::vector<std::string> notes;
};

struct AsymptoticOptions {
  int draws = 500;
  /// Use only per-cell variances (the projector diagonal) instead of the
  /// full tangent covariance. Cheaper, ignores cross-cell correlation.
  bool diagonal_only = false;
};

/// Gaussian draws from the local model: fitted + sigma * (projected noise).
/// With the full covariance the projection is applied exactly in matrix
/// form, so no np x np operator is ever built.
PseudoRealizationSet asymptotic_draws(const PcaFit& fit, const NoiseModel& noise,
                                      const AsymptoticOptions& opt, std::uint64_t seed);

/// Simulates data from the fitted model (fitted + fresh Gaussian noise at
/// the estimated variance) and refits; the replicate is the refit's fitted
/// matrix. Draws with a degenerate refit spectrum are flagged.
PseudoRealizationSet parametric_bootstrap(const Eigen::MatrixXd& data, int rank,
                                          int draws, std::uint64_t seed);

/// Leave-one-cell-out jackknife: each cell is masked in turn, the fit is
/// recomputed by alternating imputation, and the replicate is the
/// pseudo-value  fitted + sqrt(np) * (fitted_without_cell - fitted).
/// K = np replicates; non-converged refits are flagged but kept.
PseudoRealizationSet cellwise_jackknife(const Eigen::MatrixXd& data, int rank,
                                        const EmConfig& cfg = {});

/// Closed-form stand-in for the jackknife: the held-out cell's refit value
/// is predicted from its leverage,  x - (x - fitted) / (1 - leverage), the
/// cell is replaced, and a complete-data refit gives the same pseudo-value
/// as above. Cells with leverage within 1e-10 of one are skipped (noted),
/// shrinking K.
PseudoRealizationSet approximate_jackknife(const Eigen::MatrixXd& data, int rank);

}  // namespace fepca
