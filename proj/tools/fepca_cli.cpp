#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fepca/geometry.hpp"
#include "fepca/inference.hpp"
#include "fepca/io.hpp"
#include "fepca/parallel.hpp"
#include "fepca/pca.hpp"
#include "fepca/svg.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// "a,b" with two distinct positive integers; range-vs-rank is checked later,
// against the data.
std::string validate_axis_pair(std::string& value) {
  int a = 0, b = 0;
  char extra = 0;
  if (std::sscanf(value.c_str(), "%d,%d%c", &a, &b, &extra) != 2 || a < 1 || b < 1 || a == b) {
    return "expected two distinct 1-based axes like '1,2', got '" + value + "'";
  }
  return "";
}

std::pair<int, int> parse_axis_pair(const std::string& value) {
  int a = 0, b = 0;
  std::sscanf(value.c_str(), "%d,%d", &a, &b);
  return {a - 1, b - 1};
}

std::string validate_level(std::string& value) {
  try {
    const double v = std::stod(value);
    if (v > 0.0 && v < 1.0) return "";
  } catch (const std::exception&) {
  }
  return "confidence level must lie strictly between 0 and 1, got '" + value + "'";
}

struct FitArgs {
  std::string data_file;
  int rank = 2;
  bool scale = false;
};

struct InferArgs {
  std::string data_file;
  int rank = 2;
  bool scale = false;
  std::string method = "bootstrap";
  int draws = 500;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::string dims = "1,2";
  std::string out_dir = ".";
  double em_tol = 1e-8;
  int em_max_iter = 1000;
  bool diagonal_only = false;
  int threads = 0;
};

struct PlotArgs {
  std::string results_file;
  std::string dims = "1,2";
  std::string out_file;
  int width = 840;
  int height = 620;
  bool no_labels = false;
  bool columns = false;
};

struct SimulateArgs {
  std::string config_file;
  std::string out_dir = ".";
  int replicates = 0;  // 0 = keep the config's value
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
};

void print_fit_summary(const fepca::PcaFit& fit, const fepca::NoiseModel& noise,
                       const std::string& source, bool scaled) {
  std::printf("data: %d rows x %d columns (%s), rank %d, %s\n", fit.n(), fit.p(), source.c_str(),
              fit.rank, scaled ? "scaled to unit variance" : "centered only");
  const Eigen::VectorXd eig = fit.eigenvalues();
  double cumulative = 0.0;
  std::printf("%-10s %-14s %-8s %s\n", "component", "eigenvalue", "%var", "cumulative");
  for (int s = 0; s < fit.rank; ++s) {
    const double pct = fit.total_variance > 0 ? 100.0 * eig(s) / fit.total_variance : 0.0;
    cumulative += pct;
    std::printf("%-10d %-14.6g %-8.1f %.1f\n", s + 1, eig(s), pct, cumulative);
  }
  const double sd = std::sqrt(noise.sigma2);
  std::printf("noise sd: %.6g (variance %.6g, %ld residual degrees of freedom)\n", sd,
              noise.sigma2, noise.df);
  const double curvature = fepca::curvature_index(fit);
  std::printf("curvature index: %.6g, sd x curvature: %.6g\n", curvature, sd * curvature);
  if (fit.degenerate_spectrum) {
    std::printf("warning: the last retained eigenvalue ties the first dropped one; "
                "component axes are not well separated\n");
  }
}

int run_fit(const FitArgs& args) {
  const fepca::Dataset data = fepca::read_csv(args.data_file);
  auto [working, pre] = fepca::preprocess(data, args.scale);
  const fepca::PcaFit fit = fepca::fit_pca(working, args.rank);
  const fepca::NoiseModel noise = fepca::estimate_noise_variance(working, fit);
  print_fit_summary(fit, noise, fs::path(args.data_file).filename().string(), args.scale);
  return 0;
}

fepca::PseudoRealizationSet build_replicates(const Eigen::MatrixXd& working,
                                             const InferArgs& args) {
  const fepca::Method method = fepca::method_from_name(args.method);
  fepca::EmConfig em;
  em.tol = args.em_tol;
  em.max_iter = args.em_max_iter;
  switch (method) {
    case fepca::Method::Asymptotic: {
      const fepca::PcaFit fit = fepca::fit_pca(working, args.rank);
      const fepca::NoiseModel noise = fepca::estimate_noise_variance(working, fit);
      fepca::AsymptoticOptions opt;
      opt.draws = args.draws;
      opt.diagonal_only = args.diagonal_only;
      return fepca::asymptotic_draws(fit, noise, opt, args.seed);
    }
    case fepca::Method::Bootstrap:
      return fepca::parametric_bootstrap(working, args.rank, args.draws, args.seed);
    case fepca::Method::Jackknife:
      return fepca::cellwise_jackknife(working, args.rank, em);
    case fepca::Method::ApproxJackknife:
      return fepca::approximate_jackknife(working, args.rank);
  }
  throw std::invalid_argument("unknown method '" + args.method + "'");
}

int run_infer(const InferArgs& args) {
  fepca::set_worker_count(args.threads);
  const auto start = Clock::now();

  const fepca::Dataset data = fepca::read_csv(args.data_file);
  auto [working, pre] = fepca::preprocess(data, args.scale);
  const fepca::PcaFit fit = fepca::fit_pca(working, args.rank);
  const fepca::NoiseModel noise = fepca::estimate_noise_variance(working, fit);

  fepca::PseudoRealizationSet set = build_replicates(working, args);

  // Row-point regions: align every replicate to the centered fit, read row
  // coordinates on all retained axes, and fit one Gaussian region per row.
  std::vector<int> all_axes(args.rank);
  for (int s = 0; s < args.rank; ++s) all_axes[s] = s;
  const std::vector<Eigen::MatrixXd> aligned = fepca::align_set(set);
  const long k_reps = static_cast<long>(aligned.size());

  fepca::ResultBundle bundle;
  std::vector<Eigen::MatrixXd> row_clouds(static_cast<std::size_t>(fit.n()),
                                          Eigen::MatrixXd(k_reps, args.rank));
  for (long k = 0; k < k_reps; ++k) {
    const Eigen::MatrixXd pts = fepca::project_scores(aligned[static_cast<std::size_t>(k)], fit,
                                                      all_axes);
    for (int i = 0; i < fit.n(); ++i) row_clouds[static_cast<std::size_t>(i)].row(k) = pts.row(i);
  }
  for (int i = 0; i < fit.n(); ++i) {
    bundle.row_regions.push_back(
        {data.row_labels[static_cast<std::size_t>(i)],
         fepca::fit_ellipsoid(row_clouds[static_cast<std::size_t>(i)], args.level)});
  }

  // Column-point regions: the same machinery on the transposed problem,
  // whose loading directions are the fit's row space. Replicates enter in
  // the reference's centered frame, exactly as on the row side.
  const Eigen::MatrixXd target_t = fit.centered_fitted().transpose();
  const Eigen::RowVectorXd ref_means = fit.preprocess.col_means.transpose();
  std::vector<Eigen::MatrixXd> reps_t(set.replicates.size());
  for (std::size_t k = 0; k < set.replicates.size(); ++k) {
    reps_t[k] = (set.replicates[k].rowwise() - ref_means).transpose();
  }
  const std::vector<Eigen::MatrixXd> aligned_t = fepca::align_matrices(reps_t, target_t);
  std::vector<Eigen::MatrixXd> col_clouds(static_cast<std::size_t>(fit.p()),
                                          Eigen::MatrixXd(k_reps, args.rank));
  for (long k = 0; k < k_reps; ++k) {
    const Eigen::MatrixXd pts = aligned_t[static_cast<std::size_t>(k)] * fit.U;
    for (int j = 0; j < fit.p(); ++j) col_clouds[static_cast<std::size_t>(j)].row(k) = pts.row(j);
  }
  for (int j = 0; j < fit.p(); ++j) {
    bundle.column_regions.push_back(
        {data.col_labels[static_cast<std::size_t>(j)],
         fepca::fit_ellipsoid(col_clouds[static_cast<std::size_t>(j)], args.level)});
  }

  bundle.row_labels = data.row_labels;
  bundle.col_labels = data.col_labels;
  bundle.pre = pre;
  bundle.rank = args.rank;
  bundle.singular_values = fit.singular_values;
  bundle.total_variance = fit.total_variance;
  bundle.scores = fit.scores();
  bundle.loadings = fit.V;
  bundle.sigma2 = noise.sigma2;
  bundle.noise_df = noise.df;
  bundle.curvature = fepca::curvature_index(fit);
  bundle.degenerate_spectrum = fit.degenerate_spectrum;
  bundle.method = args.method;
  bundle.replicate_count = static_cast<int>(set.replicates.size());
  bundle.seed = args.seed;
  bundle.level = args.level;

  if (fit.degenerate_spectrum) {
    bundle.warnings.push_back("reference fit has a degenerate spectrum");
  }
  long flagged = 0;
  for (const std::string& f : set.flags)
    if (!f.empty()) ++flagged;
  if (flagged > 0) {
    bundle.warnings.push_back(std::to_string(flagged) + " of " +
                              std::to_string(set.replicates.size()) +
                              " replicates were flagged (kept; see the method's notes)");
  }
  for (const std::string& note : set.notes) bundle.warnings.push_back(note);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  fepca::write_results_json(bundle, out_dir / "results.json");
  fepca::write_scores_csv(bundle, out_dir / "scores.csv");
  fepca::write_loadings_csv(bundle, out_dir / "loadings.csv");
  const auto [dim_a, dim_b] = parse_axis_pair(args.dims);
  if (args.rank >= 2) {
    fepca::write_ellipses_csv(bundle, {{dim_a, dim_b}}, out_dir / "ellipses.csv");
  }

  std::printf("%s: %d replicates for %d row and %d column points (level %g)\n",
              args.method.c_str(), bundle.replicate_count, fit.n(), fit.p(), args.level);
  for (const std::string& w : bundle.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("wrote results.json, scores.csv, loadings.csv%s in %s\n",
              args.rank >= 2 ? ", ellipses.csv" : "", out_dir.string().c_str());
  std::printf("elapsed: %.2f s\n", seconds_since(start));
  return 0;
}

int run_plot(const PlotArgs& args) {
  const fepca::ResultBundle bundle = fepca::read_results_json(args.results_file);
  const auto [dim_a, dim_b] = parse_axis_pair(args.dims);
  fepca::SvgOptions opt;
  opt.width = args.width;
  opt.height = args.height;
  opt.point_labels = !args.no_labels;
  opt.columns = args.columns;
  const std::string svg = fepca::render_svg(bundle, dim_a, dim_b, opt);

  fs::path out(args.out_file);
  if (out.empty()) {
    out = fs::path(args.results_file).parent_path() /
          ("factor_map_" + std::to_string(dim_a + 1) + "_" + std::to_string(dim_b + 1) +
           (args.columns ? "_columns.svg" : ".svg"));
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write '" + out.string() + "'");
  file << svg;
  if (!file) throw std::runtime_error("failed while writing '" + out.string() + "'");
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

int run_simulate(const SimulateArgs& args) {
  fepca::set_worker_count(args.threads);
  const auto start = Clock::now();

  fepca::SimulationConfig cfg = fepca::read_simulation_config(args.config_file);
  if (args.replicates > 0) cfg.replicates = args.replicates;
  if (args.seed_given) cfg.seed = args.seed;
  cfg.validate();

  const fepca::CoverageTable table = fepca::run_coverage_experiment(cfg);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  fepca::write_coverage_csv(table, out_dir / "coverage.csv");
  fepca::write_coverage_json(table, out_dir / "coverage.json");

  std::printf("%-16s", "condition");
  for (fepca::Method m : table.methods) std::printf(" %16s", fepca::method_name(m).c_str());
  std::printf("\n");
  for (const std::string& c : table.conditions) {
    std::printf("%-16s", c.c_str());
    for (fepca::Method m : table.methods) {
      const fepca::CoverageRow& row = table.at(c, m);
      std::printf(" %10.4f (%d)", row.coverage(), row.failures);
    }
    std::printf("\n");
  }
  std::printf("(value is the empirical coverage; parenthesized count = failed repetitions "
              "excluded from it)\n");
  std::printf("wrote coverage.csv, coverage.json in %s\n", out_dir.string().c_str());
  std::printf("elapsed: %.2f s\n", seconds_since(start));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal component maps with replicate-based confidence regions"};
  app.require_subcommand(1);

  const std::vector<std::string> method_names{"asymptotic", "bootstrap", "jackknife",
                                              "approx-jackknife"};
  const CLI::Validator axis_pair(validate_axis_pair, "AXIS_PAIR");
  const CLI::Validator level_range(validate_level, "LEVEL");

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a rank-S PCA and print its summary");
  fit_cmd->add_option("data", fit_args.data_file, "CSV with a header row and row labels")
      ->required();
  fit_cmd->add_option("--rank", fit_args.rank, "number of components S")
      ->required()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--scale", fit_args.scale, "scale columns to unit variance");

  InferArgs infer_args;
  CLI::App* infer_cmd =
      app.add_subcommand("infer", "Fit, build replicates, and write confidence regions");
  infer_cmd->add_option("data", infer_args.data_file, "CSV with a header row and row labels")
      ->required();
  infer_cmd->add_option("--rank", infer_args.rank, "number of components S")
      ->required()
      ->check(CLI::PositiveNumber);
  infer_cmd->add_option("--method", infer_args.method, "replicate construction")
      ->required()
      ->check(CLI::IsMember(method_names));
  infer_cmd->add_option("--draws", infer_args.draws,
                        "replicates for asymptotic/bootstrap (default 500)")
      ->check(CLI::Range(2, 1000000));
  infer_cmd->add_option("--level", infer_args.level, "confidence level (default 0.95)")
      ->check(level_range);
  infer_cmd->add_option("--seed", infer_args.seed, "random seed (default 0)");
  infer_cmd->add_flag("--scale", infer_args.scale, "scale columns to unit variance");
  infer_cmd->add_option("--dims", infer_args.dims, "axis pair for ellipses.csv (default 1,2)")
      ->check(axis_pair);
  infer_cmd->add_option("--out", infer_args.out_dir, "output directory (default .)");
  infer_cmd->add_option("--em-tol", infer_args.em_tol,
                        "jackknife imputation tolerance (default 1e-8)");
  infer_cmd->add_option("--em-max-iter", infer_args.em_max_iter,
                        "jackknife imputation iteration cap (default 1000)")
      ->check(CLI::PositiveNumber);
  infer_cmd->add_flag("--diagonal-only", infer_args.diagonal_only,
                      "asymptotic: per-cell variances, no cross-cell covariance");
  infer_cmd->add_option("--threads", infer_args.threads,
                        "worker threads (default: FEPCA_THREADS or hardware)");

  PlotArgs plot_args;
  CLI::App* plot_cmd = app.add_subcommand("plot", "Render a factor map from results.json");
  plot_cmd->add_option("results", plot_args.results_file, "results.json from infer")->required();
  plot_cmd->add_option("--dims", plot_args.dims, "axis pair to draw (default 1,2)")
      ->check(axis_pair);
  plot_cmd->add_option("--out", plot_args.out_file, "output SVG path");
  plot_cmd->add_option("--width", plot_args.width, "canvas width (default 840)")
      ->check(CLI::Range(200, 10000));
  plot_cmd->add_option("--height", plot_args.height, "canvas height (default 620)")
      ->check(CLI::Range(200, 10000));
  plot_cmd->add_flag("--no-labels", plot_args.no_labels, "omit point labels");
  plot_cmd->add_flag("--columns", plot_args.columns, "draw the variable map");

  SimulateArgs sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Run a coverage experiment from a config file");
  sim_cmd->add_option("--config", sim_args.config_file, "key = value experiment description")
      ->required();
  sim_cmd->add_option("--out", sim_args.out_dir, "output directory (default .)");
  sim_cmd->add_option("--replicates", sim_args.replicates,
                      "override the config's repetition count")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_args.seed, "override the config's seed")
      ->trigger_on_parse()
      ->each([&](const std::string&) { sim_args.seed_given = true; });
  sim_cmd->add_option("--threads", sim_args.threads,
                      "worker threads (default: FEPCA_THREADS or hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return run_fit(fit_args);
    if (*infer_cmd) return run_infer(infer_args);
    if (*plot_cmd) return run_plot(plot_args);
    if (*sim_cmd) return run_simulate(sim_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
