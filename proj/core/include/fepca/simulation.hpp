#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "fepca/geometry.hpp"
#include "fepca/inference.hpp"
#include "fepca/rng.hpp"

namespace fepca {

/// Noise size for one experimental condition: either an absolute standard
/// deviation (sigma >= 0) or a signal-to-noise ratio (snr > 0), never both.
struct NoiseSpec {
  double sigma = -1.0;
  double snr = -1.0;

  bool uses_snr() const { return snr > 0.0; }
  std::string label() const;
};

/// Rank-2 structure with two blocks of repeated orthonormal columns; the
/// Gram spectrum is exactly (p1, p2) with p1/p2 ~ ratio, so the block split
/// controls how separated the two signal directions are.
Eigen::MatrixXd generate_structure(int n, int p, double ratio, Rng& rng);

/// The sigma a NoiseSpec resolves to for this signal:
/// sigma, or ||signal||_F / (snr * sqrt(np)) in snr mode.
double noise_sigma(const Eigen::MatrixXd& signal, const NoiseSpec& noise);

/// signal + iid Gaussian noise at noise_sigma(...). sigma == 0 returns the
/// signal unchanged (the collapse case used to sanity-check coverage).
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& signal, const NoiseSpec& noise, Rng& rng);

/// Rank-S reconstruction of a working (preprocessed) matrix, used as the
/// ground truth when a real dataset seeds the experiment.
Eigen::MatrixXd signal_from_dataset(const Eigen::MatrixXd& working, int rank);

struct SimulationConfig {
  // Signal source: a fixed matrix (dataset mode) or the block generator.
  bool use_dataset = false;
  Eigen::MatrixXd dataset;   // working coordinates; signal = rank-S fit of it
  std::string dataset_path;  // provenance only
  int n = 0;                 // generator mode
  int p = 0;
  double ratio = 1.0;        // generator spectrum split
  bool regenerate_structure = true;  // fresh structure per replicate

  int rank = 2;
  std::vector<NoiseSpec> conditions;
  std::vector<Method> methods;
  int replicates = 50;   // Monte-Carlo repetitions per condition
  int draws = 500;       // bootstrap/asymptotic replicates per repetition
  double level = 0.95;
  std::uint64_t seed = 0;
  EmConfig em;

  void validate() const;
};

struct CoverageRow {
  std::string condition;
  Method method = Method::Asymptotic;
  long inside = 0;   // row points falling in their own ellipsoid
  long total = 0;    // points from repetitions that completed
  int replicates_used = 0;
  int failures = 0;  // repetitions discarded because the method threw

  double coverage() const { return total > 0 ? double(inside) / double(total) : 0.0; }
  /// Binomial Monte-Carlo standard error of `coverage`.
  double std_error() const;
};

struct CoverageTable {
  std::vector<std::string> conditions;  // in configuration order
  std::vector<Method> methods;          // in configuration order
  std::vector<CoverageRow> rows;        // condition-major

  const CoverageRow& at(const std::string& condition, Method m) const;
};

/// Runs the full coverage experiment: per repetition, simulate data around
/// the signal, fit, build each method's replicates, fit one ellipsoid per
/// row point at cfg.level, and check whether the true (noise-free) row
/// point falls inside. Repetitions where a method throws are excluded from
/// that method's tally and counted as failures. Deterministic for a fixed
/// seed regardless of thread count.
CoverageTable run_coverage_experiment(const SimulationConfig& cfg);

}  // namespace fepca
