#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fepca/dataset.hpp"
#include "fepca/geometry.hpp"
#include "fepca/simulation.hpp"

namespace fepca {

/// Reads a labeled CSV: header row of column names (first cell ignored),
/// one label in the first column of every data row, "." as the decimal
/// mark. delimiter == '\0' auto-detects among comma, semicolon and tab.
/// Errors carry the offending row and column.
Dataset read_csv(const std::filesystem::path& path, char delimiter = '\0');

/// One point's confidence region on the retained axes.
struct PointRegion {
  std::string label;
  ConfidenceEllipsoid ellipsoid;
};

/// Everything one `infer` run produced; serializes to results.json without
/// loss, so a written-then-read bundle compares equal field for field.
struct ResultBundle {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Preprocess pre;

  int rank = 0;
  Eigen::VectorXd singular_values;
  double total_variance = 0.0;
  Eigen::MatrixXd scores;    // n x rank, working coordinates
  Eigen::MatrixXd loadings;  // p x rank
  double sigma2 = 0.0;
  long noise_df = 0;
  double curvature = 0.0;
  bool degenerate_spectrum = false;

  std::string method;
  int replicate_count = 0;
  std::uint64_t seed = 0;
  double level = 0.95;
  std::vector<std::string> warnings;

  std::vector<PointRegion> row_regions;     // one per individual
  std::vector<PointRegion> column_regions;  // one per variable
};

void write_results_json(const ResultBundle& b, const std::filesystem::path& path);
ResultBundle read_results_json(const std::filesystem::path& path);

/// point,label-per-row coordinate tables.
void write_scores_csv(const ResultBundle& b, const std::filesystem::path& path);
void write_loadings_csv(const ResultBundle& b, const std::filesystem::path& path);

/// One row per individual per axis pair: the point's coordinates plus its
/// region's 2-D marginal (center, covariance block, level). Pairs use
/// 1-based axis numbers in the output.
void write_ellipses_csv(const ResultBundle& b,
                        const std::vector<std::pair<int, int>>& dim_pairs,
                        const std::filesystem::path& path);

/// Wide per-condition table (one column per method) plus a lossless JSON
/// twin carrying the raw counts.
void write_coverage_csv(const CoverageTable& t, const std::filesystem::path& path);
void write_coverage_json(const CoverageTable& t, const std::filesystem::path& path);
CoverageTable read_coverage_json(const std::filesystem::path& path);

/// key = value experiment description (# comments, blank lines ignored).
/// Recognized keys are documented in the README; a `data` path is resolved
/// relative to the file itself.
SimulationConfig read_simulation_config(const std::filesystem::path& path);

}  // namespace fepca
