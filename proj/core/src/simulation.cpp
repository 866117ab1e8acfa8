#include "fepca/simulation.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "fepca/parallel.hpp"

namespace fepca {

namespace {

constexpr std::uint64_t kStructureTag = 0x57;
constexpr std::uint64_t kNoiseTag = 0x40;
constexpr std::uint64_t kMethodSeedTag = 0x4D00;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::uint64_t method_tag(Method m) {
  switch (m) {
    case Method::Asymptotic: return 1;
    case Method::Bootstrap: return 2;
    case Method::Jackknife: return 3;
    case Method::ApproxJackknife: return 4;
  }
  return 0;
}

}  // namespace

std::string NoiseSpec::label() const {
  return uses_snr() ? "snr=" + format_number(snr) : "sigma=" + format_number(sigma);
}

Eigen::MatrixXd generate_structure(int n, int p, double ratio, Rng& rng) {
  if (n < 3 || p < 2) {
    throw std::invalid_argument("structure needs n >= 3 and p >= 2");
  }
  if (!(ratio > 0.0)) {
    throw std::invalid_argument("spectrum ratio must be positive");
  }
  const int p1 = static_cast<int>(std::lround(p * ratio / (1.0 + ratio)));
  const int p2 = p - p1;
  if (p1 < 1 || p2 < 1) {
    throw std::invalid_argument("spectrum ratio " + format_number(ratio) +
                                " leaves an empty column block for p = " + std::to_string(p));
  }

  Eigen::MatrixXd g(n, 2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU);
  Eigen::MatrixXd u = svd.matrixU();
  // Same sign pin as the PCA fits, for run-to-run reproducibility.
  for (int s = 0; s < 2; ++s) {
    int arg = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(u(i, s)) > std::abs(u(arg, s))) arg = i;
    if (u(arg, s) < 0.0) u.col(s) = -u.col(s);
  }

  Eigen::MatrixXd signal(n, p);
  for (int j = 0; j < p1; ++j) signal.col(j) = u.col(0);
  for (int j = p1; j < p; ++j) signal.col(j) = u.col(1);
  return signal;
}

double noise_sigma(const Eigen::MatrixXd& signal, const NoiseSpec& noise) {
  const bool has_sigma = noise.sigma >= 0.0;
  const bool has_snr = noise.snr > 0.0;
  if (has_sigma == has_snr) {
    throw std::invalid_argument("noise condition needs exactly one of sigma >= 0 or snr > 0");
  }
  if (has_sigma) return noise.sigma;
  const double np = static_cast<double>(signal.rows()) * static_cast<double>(signal.cols());
  return signal.norm() / (noise.snr * std::sqrt(np));
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& signal, const NoiseSpec& noise, Rng& rng) {
  const double sigma = noise_sigma(signal, noise);
  if (sigma == 0.0) return signal;
  Eigen::MatrixXd out = signal;
  for (long j = 0; j < out.cols(); ++j)
    for (long i = 0; i < out.rows(); ++i) out(i, j) += sigma * rng.normal();
  return out;
}

Eigen::MatrixXd signal_from_dataset(const Eigen::MatrixXd& working, int rank) {
  return fit_pca(working, rank).fitted;
}

void SimulationConfig::validate() const {
  if (use_dataset) {
    if (dataset.rows() < 3 || dataset.cols() < 2) {
      throw std::invalid_argument("dataset signal needs at least a 3 x 2 matrix");
    }
  } else {
    if (n < 3 || p < 2) {
      throw std::invalid_argument("generator needs n >= 3 and p >= 2");
    }
  }
  const int rows = use_dataset ? static_cast<int>(dataset.rows()) : n;
  const int cols = use_dataset ? static_cast<int>(dataset.cols()) : p;
  if (rank < 1 || rank > std::min(rows - 1, cols)) {
    throw std::invalid_argument("rank " + std::to_string(rank) + " infeasible for " +
                                std::to_string(rows) + " x " + std::to_string(cols));
  }
  if (conditions.empty()) throw std::invalid_argument("no noise conditions configured");
  for (const NoiseSpec& c : conditions) {
    if ((c.sigma >= 0.0) == (c.snr > 0.0)) {
      throw std::invalid_argument("condition '" + c.label() +
                                  "' needs exactly one of sigma >= 0 or snr > 0");
    }
  }
  if (methods.empty()) throw std::invalid_argument("no methods configured");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (draws < 2) throw std::invalid_argument("draws must be >= 2");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie strictly between 0 and 1");
  }
}

double CoverageRow::std_error() const {
  if (total <= 0) return 0.0;
  const double c = coverage();
  return std::sqrt(c * (1.0 - c) / static_cast<double>(total));
}

const CoverageRow& CoverageTable::at(const std::string& condition, Method m) const {
  for (const CoverageRow& row : rows) {
    if (row.condition == condition && row.method == m) return row;
  }
  throw std::out_of_range("no coverage row for condition '" + condition + "', method " +
                          method_name(m));
}

namespace {

struct RepetitionOutcome {
  bool ok = false;
  long inside = 0;
  long total = 0;
};

PseudoRealizationSet dispatch_method(Method m, const Eigen::MatrixXd& data,
                                     const SimulationConfig& cfg, std::uint64_t method_seed) {
  switch (m) {
    case Method::Asymptotic: {
      const PcaFit fit = fit_pca(data, cfg.rank);
      const NoiseModel noise = estimate_noise_variance(data, fit);
      AsymptoticOptions opt;
      opt.draws = cfg.draws;
      return asymptotic_draws(fit, noise, opt, method_seed);
    }
    case Method::Bootstrap:
      return parametric_bootstrap(data, cfg.rank, cfg.draws, method_seed);
    case Method::Jackknife:
      return cellwise_jackknife(data, cfg.rank, cfg.em);
    case Method::ApproxJackknife:
      return approximate_jackknife(data, cfg.rank);
  }
  throw std::invalid_argument("unknown method enum value");
}

}  // namespace

CoverageTable run_coverage_experiment(const SimulationConfig& cfg) {
  cfg.validate();

  Eigen::MatrixXd base_signal;
  if (cfg.use_dataset) {
    base_signal = signal_from_dataset(cfg.dataset, cfg.rank);
  } else if (!cfg.regenerate_structure) {
    Rng rng = Rng::substream(cfg.seed, kStructureTag, 0, 0);
    base_signal = generate_structure(cfg.n, cfg.p, cfg.ratio, rng);
  }

  const std::size_t n_conditions = cfg.conditions.size();
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  const std::size_t tasks = n_conditions * reps;

  std::vector<int> all_axes(cfg.rank);
  for (int s = 0; s < cfg.rank; ++s) all_axes[s] = s;

  std::vector<std::vector<RepetitionOutcome>> outcomes(tasks,
                                                       std::vector<RepetitionOutcome>(n_methods));

  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t c = t / reps;
    const std::size_t r = t % reps;
    const NoiseSpec& condition = cfg.conditions[c];

    Eigen::MatrixXd signal;
    if (cfg.use_dataset || !cfg.regenerate_structure) {
      signal = base_signal;
    } else {
      Rng rng = Rng::substream(cfg.seed, kStructureTag, c, r);
      signal = generate_structure(cfg.n, cfg.p, cfg.ratio, rng);
    }

    Rng noise_rng = Rng::substream(cfg.seed, kNoiseTag, c, r);
    const Eigen::MatrixXd data = add_noise(signal, condition, noise_rng);
    const int n = static_cast<int>(data.rows());

    const PcaFit fit = fit_pca(data, cfg.rank);
    // Noise-free row points, seen through the fitted frame: center the
    // signal with the data's column means, then read off the coordinates.
    const Eigen::MatrixXd truth =
        (signal.rowwise() - fit.preprocess.col_means.transpose()) * fit.V;
    const Eigen::MatrixXd target = fit.centered_fitted();

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      const Method m = cfg.methods[mi];
      RepetitionOutcome& out = outcomes[t][mi];
      try {
        const std::uint64_t method_seed =
            Rng::substream(cfg.seed, kMethodSeedTag + method_tag(m), c, r).next_u64();
        const PseudoRealizationSet set = dispatch_method(m, data, cfg, method_seed);

        const std::size_t k_reps = set.replicates.size();
        std::vector<Eigen::MatrixXd> cloud(
            static_cast<std::size_t>(n),
            Eigen::MatrixXd(static_cast<long>(k_reps), cfg.rank));
        const Eigen::RowVectorXd ref_means = fit.preprocess.col_means.transpose();
        for (std::size_t k = 0; k < k_reps; ++k) {
          // Replicates move into the reference's centered frame before
          // alignment; their own mean deviations stay, as uncertainty.
          const Eigen::MatrixXd dev = set.replicates[k].rowwise() - ref_means;
          const Rotation rot = procrustes_rotation(target, dev);
          const Eigen::MatrixXd pts = project_scores(dev * rot.R, fit, all_axes);
          for (int i = 0; i < n; ++i) cloud[i].row(static_cast<long>(k)) = pts.row(i);
        }

        out.ok = true;
        for (int i = 0; i < n; ++i) {
          const ConfidenceEllipsoid region = fit_ellipsoid(cloud[i], cfg.level);
          if (contains(region, truth.row(i).transpose())) ++out.inside;
        }
        out.total = n;
      } catch (...) {
        out.ok = false;
      }
    }
  });

  CoverageTable table;
  for (const NoiseSpec& c : cfg.conditions) table.conditions.push_back(c.label());
  table.methods = cfg.methods;
  for (std::size_t c = 0; c < n_conditions; ++c) {
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      CoverageRow row;
      row.condition = table.conditions[c];
      row.method = cfg.methods[mi];
      row.replicates_used = cfg.replicates;
      for (std::size_t r = 0; r < reps; ++r) {
        const RepetitionOutcome& out = outcomes[c * reps + r][mi];
        if (out.ok) {
          row.inside += out.inside;
          row.total += out.total;
        } else {
          ++row.failures;
        }
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace fepca
