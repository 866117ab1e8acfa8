#include "fepca/inference.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fepca/parallel.hpp"
#include "fepca/projection.hpp"
#include "fepca/rng.hpp"

namespace fepca {

namespace {

// Substream tags so different methods under the same seed never share a
// random stream.
constexpr std::uint64_t kAsymptoticTag = 0xA51;
constexpr std::uint64_t kBootstrapTag = 0xB00;

Eigen::MatrixXd normal_matrix(int n, int p, Rng& rng) {
  Eigen::MatrixXd z(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = rng.normal();
  return z;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Asymptotic: return "asymptotic";
    case Method::Bootstrap: return "bootstrap";
    case Method::Jackknife: return "jackknife";
    case Method::ApproxJackknife: return "approx-jackknife";
  }
  throw std::invalid_argument("unknown method enum value");
}

Method method_from_name(const std::string& name) {
  if (name == "asymptotic") return Method::Asymptotic;
  if (name == "bootstrap") return Method::Bootstrap;
  if (name == "jackknife") return Method::Jackknife;
  if (name == "approx-jackknife") return Method::ApproxJackknife;
  throw std::invalid_argument("unknown method '" + name +
                              "' (asymptotic, bootstrap, jackknife, approx-jackknife)");
}

PseudoRealizationSet asymptotic_draws(const PcaFit& fit, const NoiseModel& noise,
                                      const AsymptoticOptions& opt, std::uint64_t seed) {
  if (opt.draws < 2) {
    throw std::invalid_argument("asymptotic_draws needs at least 2 draws");
  }
  if (noise.sigma2 < 0.0) {
    throw std::invalid_argument("negative noise variance");
  }
  const int n = fit.n();
  const int p = fit.p();
  const double sigma = std::sqrt(noise.sigma2);

  PseudoRealizationSet set;
  set.method = Method::Asymptotic;
  set.reference = fit;
  set.seed = seed;
  set.replicates.resize(static_cast<std::size_t>(opt.draws));
  set.flags.assign(static_cast<std::size_t>(opt.draws), std::string());

  Eigen::MatrixXd cell_sd;
  if (opt.diagonal_only) {
    const Eigen::VectorXd diag = projection_diagonal(fit);
    cell_sd = diag.array().sqrt().matrix().reshaped(n, p);
  }

  parallel_for(static_cast<std::size_t>(opt.draws), [&](std::size_t k) {
    Rng rng = Rng::substream(seed, kAsymptoticTag, k);
    Eigen::MatrixXd z = normal_matrix(n, p, rng);
    if (opt.diagonal_only) {
      set.replicates[k] = fit.fitted + sigma * z.cwiseProduct(cell_sd);
    } else {
      set.replicates[k] = fit.fitted + sigma * apply_projection(fit, z);
    }
  });
  return set;
}

PseudoRealizationSet parametric_bootstrap(const Eigen::MatrixXd& data, int rank, int draws,
                                          std::uint64_t seed) {
  if (draws < 2) {
    throw std::invalid_argument("parametric_bootstrap needs at least 2 draws");
  }
  const PcaFit ref = fit_pca(data, rank);
  const NoiseModel noise = estimate_noise_variance(data, ref);
  const double sigma = std::sqrt(noise.sigma2);
  const int n = ref.n();
  const int p = ref.p();

  PseudoRealizationSet set;
  set.method = Method::Bootstrap;
  set.reference = ref;
  set.seed = seed;
  set.replicates.resize(static_cast<std::size_t>(draws));
  set.flags.assign(static_cast<std::size_t>(draws), std::string());

  parallel_for(static_cast<std::size_t>(draws), [&](std::size_t b) {
    Rng rng = Rng::substream(seed, kBootstrapTag, b);
    const Eigen::MatrixXd sample = ref.fitted + sigma * normal_matrix(n, p, rng);
    const PcaFit refit = fit_pca(sample, rank);
    set.replicates[b] = refit.fitted;
    if (refit.degenerate_spectrum) {
      set.flags[b] = "degenerate spectrum in bootstrap refit";
    }
  });
  return set;
}

PseudoRealizationSet cellwise_jackknife(const Eigen::MatrixXd& data, int rank,
                                        const EmConfig& cfg) {
  const PcaFit ref = fit_pca(data, rank);
  const int n = ref.n();
  const int p = ref.p();
  const std::size_t cells = static_cast<std::size_t>(n) * p;
  const double scale = std::sqrt(static_cast<double>(cells));

  PseudoRealizationSet set;
  set.method = Method::Jackknife;
  set.reference = ref;
  set.replicates.resize(cells);
  set.flags.assign(cells, std::string());

  // One replicate per cell, ordered row-major: cell (i, j) at index i*p + j.
  parallel_for(cells, [&](std::size_t t) {
    const int i = static_cast<int>(t) / p;
    const int j = static_cast<int>(t) % p;
    const EmFit em = em_pca(MaskedMatrix::without_cell(data, i, j), rank, cfg);
    set.replicates[t] = ref.fitted + scale * (em.fit.fitted - ref.fitted);
    if (!em.converged) {
      set.flags[t] = "alternating imputation hit the iteration cap for cell (" +
                     std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")";
    }
  });
  return set;
}

PseudoRealizationSet approximate_jackknife(const Eigen::MatrixXd& data, int rank) {
  const PcaFit ref = fit_pca(data, rank);
  const int n = ref.n();
  const int p = ref.p();
  const std::size_t cells = static_cast<std::size_t>(n) * p;
  const double scale = std::sqrt(static_cast<double>(cells));
  const Eigen::VectorXd leverage = projection_diagonal(ref);

  PseudoRealizationSet set;
  set.method = Method::ApproxJackknife;
  set.reference = ref;

  // Same cell order as the exact jackknife. Cells whose leverage reaches 1
  // carry no information about their own refit value, so they are skipped.
  std::vector<Eigen::MatrixXd> reps(cells);
  std::vector<char> keep(cells, 1);
  parallel_for(cells, [&](std::size_t t) {
    const int i = static_cast<int>(t) / p;
    const int j = static_cast<int>(t) % p;
    const double h = leverage(static_cast<long>(j) * n + i);
    if (h >= 1.0 - 1e-10) {
      keep[t] = 0;
      return;
    }
    Eigen::MatrixXd altered = data;
    altered(i, j) = data(i, j) - (data(i, j) - ref.fitted(i, j)) / (1.0 - h);
    const PcaFit refit = fit_pca(altered, rank);
    reps[t] = ref.fitted + scale * (refit.fitted - ref.fitted);
  });

  for (std::size_t t = 0; t < cells; ++t) {
    if (keep[t]) {
      set.replicates.push_back(std::move(reps[t]));
      set.flags.emplace_back();
    } else {
      set.notes.push_back("cell (" + std::to_string(static_cast<int>(t) / p + 1) + ", " +
                          std::to_string(static_cast<int>(t) % p + 1) +
                          ") skipped: leverage is 1, the held-out value is unidentified");
    }
  }
  if (set.replicates.empty()) {
    throw std::runtime_error("approximate jackknife: every cell has leverage 1");
  }
  return set;
}

}  // namespace fepca
