#include <doctest.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fepca/io.hpp"
#include "fepca/simulation.hpp"

using fepca::CoverageRow;
using fepca::CoverageTable;
using fepca::Dataset;
using fepca::Method;
using fepca::PointRegion;
using fepca::ResultBundle;
using fepca::SimulationConfig;

namespace {

namespace fs = std::filesystem;

/// Fresh scratch directory per test case, cleaned up on destruction.
struct Scratch {
  fs::path dir;

  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / ("fepca_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path file(const std::string& name) const { return dir / name; }
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

/// A bundle with awkward doubles everywhere, to exercise exact round trips.
ResultBundle sample_bundle() {
  ResultBundle b;
  b.row_labels = {"alpha", "beta", "gamma", "delta"};
  b.col_labels = {"v1", "v2", "v3"};
  b.pre.col_means = Eigen::Vector3d(1.0 / 3.0, -2.5, 1e-7);
  b.pre.col_scales = Eigen::Vector3d(1.0, std::sqrt(2.0), 3.25);
  b.pre.scaled = true;

  b.rank = 2;
  b.singular_values = Eigen::Vector2d(5.0 / 7.0, 0.1);
  b.total_variance = 0.123456789012345;
  b.scores = Eigen::MatrixXd(4, 2);
  b.scores << 0.1, -0.2, 1.0 / 3.0, 4e-17, -5.5, 2.0, 0.0, -0.0625;
  b.loadings = Eigen::MatrixXd(3, 2);
  b.loadings << 0.6, 0.8, -0.8, 0.6, 0.0, 1e-300;
  b.sigma2 = 0.01 / 3.0;
  b.noise_df = 17;
  b.curvature = 1.0 / 0.1;
  b.degenerate_spectrum = true;

  b.method = "bootstrap";
  b.replicate_count = 250;
  b.seed = 0xDEADBEEFCAFEULL;
  b.level = 0.9;
  b.warnings = {"replicate 3 lost rank", "replicate 9 lost rank"};

  for (int i = 0; i < 4; ++i) {
    PointRegion r;
    r.label = b.row_labels[static_cast<std::size_t>(i)];
    r.ellipsoid.center = Eigen::Vector2d(0.1 * i, -0.3 + i / 7.0);
    r.ellipsoid.cov = Eigen::Matrix2d::Zero();
    r.ellipsoid.cov << 0.5 + i, 0.125, 0.125, 0.25;
    r.ellipsoid.level = 0.9;
    r.ellipsoid.radius2 = 4.60517018598809 + i;
    b.row_regions.push_back(std::move(r));
  }
  for (int j = 0; j < 3; ++j) {
    PointRegion r;
    r.label = b.col_labels[static_cast<std::size_t>(j)];
    r.ellipsoid.center = Eigen::Vector2d(j * 0.01, 1.0 - j);
    r.ellipsoid.cov = Eigen::Matrix2d::Identity() * (0.001 * (j + 1));
    r.ellipsoid.level = 0.9;
    r.ellipsoid.radius2 = 4.60517018598809;
    b.column_regions.push_back(std::move(r));
  }
  return b;
}

}  // namespace

TEST_CASE("csv reader auto-detects comma, semicolon and tab delimiters") {
  const Scratch tmp("csv_delims");
  const std::string body_comma = "name,a,b\nr1,1.5,2\nr2,-0.25,4\nr3,3,5.5\n";
  std::string body_semi = body_comma;
  std::string body_tab = body_comma;
  for (char& c : body_semi)
    if (c == ',') c = ';';
  for (char& c : body_tab)
    if (c == ',') c = '\t';

  write_file(tmp.file("c.csv"), body_comma);
  write_file(tmp.file("s.csv"), body_semi);
  write_file(tmp.file("t.csv"), body_tab);

  const Dataset a = fepca::read_csv(tmp.file("c.csv"));
  const Dataset b = fepca::read_csv(tmp.file("s.csv"));
  const Dataset c = fepca::read_csv(tmp.file("t.csv"));

  for (const Dataset* d : {&a, &b, &c}) {
    CHECK(d->n() == 3);
    CHECK(d->p() == 2);
    CHECK(d->row_labels == std::vector<std::string>{"r1", "r2", "r3"});
    CHECK(d->col_labels == std::vector<std::string>{"a", "b"});
    CHECK(d->values(1, 0) == -0.25);
    CHECK(d->values(2, 1) == 5.5);
  }
}

TEST_CASE("explicit delimiter overrides detection") {
  const Scratch tmp("csv_explicit");
  // Commas appear inside labels; the actual delimiter is the semicolon.
  write_file(tmp.file("d.csv"), "name;x,1;y\na,b;1;2\nc;3;4\nd;5;6\n");
  const Dataset d = fepca::read_csv(tmp.file("d.csv"), ';');
  CHECK(d.p() == 2);
  CHECK(d.col_labels[0] == "x,1");
  CHECK(d.row_labels[0] == "a,b");
}

TEST_CASE("csv reader handles CRLF endings and trailing blank lines") {
  const Scratch tmp("csv_crlf");
  write_file(tmp.file("d.csv"), "name,a,b\r\nr1,1,2\r\nr2,3,4\r\nr3,5,6\r\n\r\n\n");
  const Dataset d = fepca::read_csv(tmp.file("d.csv"));
  CHECK(d.n() == 3);
  CHECK(d.values(2, 1) == 6.0);
}

TEST_CASE("csv errors carry the offending location") {
  const Scratch tmp("csv_errors");

  CHECK_THROWS_WITH_AS(fepca::read_csv(tmp.file("absent.csv")),
                       doctest::Contains("cannot open"), std::runtime_error);

  write_file(tmp.file("short.csv"), "name,a\nr1,1\nr2,2\nr3,3\n");
  CHECK_THROWS_WITH_AS(fepca::read_csv(tmp.file("short.csv")),
                       doctest::Contains("at least 2 columns"), std::runtime_error);

  write_file(tmp.file("ragged.csv"), "name,a,b\nr1,1,2\nr2,3\nr3,5,6\n");
  CHECK_THROWS_WITH_AS(fepca::read_csv(tmp.file("ragged.csv")),
                       doctest::Contains("data row 2"), std::runtime_error);

  write_file(tmp.file("alpha.csv"), "name,a,b\nr1,1,2\nr2,3,oops\nr3,5,6\n");
  CHECK_THROWS_WITH_AS(fepca::read_csv(tmp.file("alpha.csv")),
                       doctest::Contains("row 2, column 2"), std::runtime_error);

  write_file(tmp.file("header_only.csv"), "name,a,b\n");
  CHECK_THROWS_AS(fepca::read_csv(tmp.file("header_only.csv")), std::runtime_error);

  write_file(tmp.file("nodelim.csv"), "just one header cell\nrow two\nrow three\n");
  CHECK_THROWS_WITH_AS(fepca::read_csv(tmp.file("nodelim.csv")),
                       doctest::Contains("delimiter"), std::runtime_error);
}

TEST_CASE("results json round-trips every field exactly") {
  const Scratch tmp("results_json");
  const ResultBundle b = sample_bundle();
  const fs::path path = tmp.file("results.json");
  fepca::write_results_json(b, path);

  const ResultBundle r = fepca::read_results_json(path);
  CHECK(r.row_labels == b.row_labels);
  CHECK(r.col_labels == b.col_labels);
  CHECK(r.pre.scaled == b.pre.scaled);
  CHECK(same_vector(r.pre.col_means, b.pre.col_means));
  CHECK(same_vector(r.pre.col_scales, b.pre.col_scales));
  CHECK(r.rank == b.rank);
  CHECK(same_vector(r.singular_values, b.singular_values));
  CHECK(r.total_variance == b.total_variance);
  CHECK(same_matrix(r.scores, b.scores));
  CHECK(same_matrix(r.loadings, b.loadings));
  CHECK(r.sigma2 == b.sigma2);
  CHECK(r.noise_df == b.noise_df);
  CHECK(r.curvature == b.curvature);
  CHECK(r.degenerate_spectrum == b.degenerate_spectrum);
  CHECK(r.method == b.method);
  CHECK(r.replicate_count == b.replicate_count);
  CHECK(r.seed == b.seed);
  CHECK(r.level == b.level);
  CHECK(r.warnings == b.warnings);

  REQUIRE(r.row_regions.size() == b.row_regions.size());
  REQUIRE(r.column_regions.size() == b.column_regions.size());
  for (std::size_t i = 0; i < b.row_regions.size(); ++i) {
    CHECK(r.row_regions[i].label == b.row_regions[i].label);
    CHECK(same_vector(r.row_regions[i].ellipsoid.center, b.row_regions[i].ellipsoid.center));
    CHECK(same_matrix(r.row_regions[i].ellipsoid.cov, b.row_regions[i].ellipsoid.cov));
    CHECK(r.row_regions[i].ellipsoid.level == b.row_regions[i].ellipsoid.level);
    CHECK(r.row_regions[i].ellipsoid.radius2 == b.row_regions[i].ellipsoid.radius2);
  }
  for (std::size_t j = 0; j < b.column_regions.size(); ++j) {
    CHECK(r.column_regions[j].label == b.column_regions[j].label);
    CHECK(same_vector(r.column_regions[j].ellipsoid.center, b.column_regions[j].ellipsoid.center));
  }

  // Rewriting the parsed bundle reproduces the file byte for byte.
  const fs::path again = tmp.file("results2.json");
  fepca::write_results_json(r, again);
  CHECK(read_file(path) == read_file(again));
}

TEST_CASE("results json rejects damaged input") {
  const Scratch tmp("results_json_bad");

  CHECK_THROWS_WITH_AS(fepca::read_results_json(tmp.file("absent.json")),
                       doctest::Contains("cannot open"), std::runtime_error);

  write_file(tmp.file("garbage.json"), "{ not json ]");
  CHECK_THROWS_WITH_AS(fepca::read_results_json(tmp.file("garbage.json")),
                       doctest::Contains("not valid JSON"), std::runtime_error);

  write_file(tmp.file("schema.json"), "{\"schema\": \"something-else/9\"}");
  CHECK_THROWS_WITH_AS(fepca::read_results_json(tmp.file("schema.json")),
                       doctest::Contains("unrecognized schema"), std::runtime_error);

  write_file(tmp.file("partial.json"), "{\"schema\": \"fepca-results/1\", \"data\": {}}");
  CHECK_THROWS_WITH_AS(fepca::read_results_json(tmp.file("partial.json")),
                       doctest::Contains("does not match the results schema"), std::runtime_error);
}

TEST_CASE("score and loading tables use shortest exact number text") {
  const Scratch tmp("coord_csv");
  const ResultBundle b = sample_bundle();
  fepca::write_scores_csv(b, tmp.file("scores.csv"));
  fepca::write_loadings_csv(b, tmp.file("loadings.csv"));

  const std::string scores = read_file(tmp.file("scores.csv"));
  CHECK(scores.substr(0, scores.find('\n')) == "point,dim_1,dim_2");
  CHECK(scores.find("alpha,0.1,-0.2") != std::string::npos);
  CHECK(scores.find("delta,0,-0.0625") != std::string::npos);
  CHECK(std::count(scores.begin(), scores.end(), '\n') == 5);

  const std::string loadings = read_file(tmp.file("loadings.csv"));
  CHECK(loadings.substr(0, loadings.find('\n')) == "variable,dim_1,dim_2");
  CHECK(loadings.find("v1,0.6,0.8") != std::string::npos);
  CHECK(std::count(loadings.begin(), loadings.end(), '\n') == 4);
}

TEST_CASE("ellipse table emits one row per point per axis pair") {
  const Scratch tmp("ellipse_csv");
  ResultBundle b = sample_bundle();
  // Promote to rank 3 so a second axis pair is available.
  b.rank = 3;
  b.singular_values = Eigen::Vector3d(2.0, 1.0, 0.5);
  b.scores = Eigen::MatrixXd::Random(4, 3);
  b.loadings = Eigen::MatrixXd::Random(3, 3);
  for (PointRegion& r : b.row_regions) {
    r.ellipsoid.center = Eigen::Vector3d(0.1, 0.2, 0.3);
    r.ellipsoid.cov = Eigen::Matrix3d::Identity() * 0.25;
  }

  fepca::write_ellipses_csv(b, {{0, 1}, {0, 2}}, tmp.file("e.csv"));
  const std::string text = read_file(tmp.file("e.csv"));
  CHECK(text.substr(0, text.find('\n')) ==
        "point,dim_x,dim_y,x,y,center_x,center_y,cov_xx,cov_xy,cov_yy,level");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 4);
  CHECK(text.find("alpha,1,2,") != std::string::npos);
  CHECK(text.find("alpha,1,3,") != std::string::npos);

  CHECK_THROWS_WITH_AS(fepca::write_ellipses_csv(b, {{0, 3}}, tmp.file("bad.csv")),
                       doctest::Contains("invalid for rank 3"), std::invalid_argument);
  CHECK_THROWS_AS(fepca::write_ellipses_csv(b, {{1, 1}}, tmp.file("bad.csv")),
                  std::invalid_argument);

  b.row_regions.clear();
  CHECK_THROWS_WITH_AS(fepca::write_ellipses_csv(b, {{0, 1}}, tmp.file("bad.csv")),
                       doctest::Contains("no per-point regions"), std::invalid_argument);
}

TEST_CASE("coverage table serializes to a wide csv and a lossless json twin") {
  const Scratch tmp("coverage");
  CoverageTable t;
  t.conditions = {"sigma=0.1", "snr=4"};
  t.methods = {Method::Asymptotic, Method::Jackknife};
  t.rows.push_back(CoverageRow{"sigma=0.1", Method::Asymptotic, 47, 50, 5, 0});
  t.rows.push_back(CoverageRow{"sigma=0.1", Method::Jackknife, 50, 50, 5, 0});
  t.rows.push_back(CoverageRow{"snr=4", Method::Asymptotic, 30, 40, 4, 1});
  t.rows.push_back(CoverageRow{"snr=4", Method::Jackknife, 10, 40, 4, 1});

  fepca::write_coverage_csv(t, tmp.file("coverage.csv"));
  CHECK(read_file(tmp.file("coverage.csv")) ==
        "condition,asymptotic,jackknife\n"
        "sigma=0.1,0.94,1\n"
        "snr=4,0.75,0.25\n");

  fepca::write_coverage_json(t, tmp.file("coverage.json"));
  const CoverageTable r = fepca::read_coverage_json(tmp.file("coverage.json"));
  CHECK(r.conditions == t.conditions);
  REQUIRE(r.methods.size() == 2);
  CHECK(r.methods[0] == Method::Asymptotic);
  CHECK(r.methods[1] == Method::Jackknife);
  REQUIRE(r.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(r.rows[i].condition == t.rows[i].condition);
    CHECK(r.rows[i].method == t.rows[i].method);
    CHECK(r.rows[i].inside == t.rows[i].inside);
    CHECK(r.rows[i].total == t.rows[i].total);
    CHECK(r.rows[i].replicates_used == t.rows[i].replicates_used);
    CHECK(r.rows[i].failures == t.rows[i].failures);
  }

  write_file(tmp.file("bad.json"), "{\"schema\": \"fepca-results/1\"}");
  CHECK_THROWS_WITH_AS(fepca::read_coverage_json(tmp.file("bad.json")),
                       doctest::Contains("unrecognized schema"), std::runtime_error);
}

TEST_CASE("simulation config parses generator settings") {
  const Scratch tmp("config_gen");
  write_file(tmp.file("exp.cfg"),
             "# coverage sweep\n"
             "n = 20\n"
             "p = 100  # wide matrix\n"
             "ratio = 4\n"
             "rank = 2\n"
             "regenerate_structure = false\n"
             "\n"
             "sigma = 0.1, 0.5\n"
             "snr = 4\n"
             "methods = asymptotic, bootstrap\n"
             "replicates = 7\n"
             "draws = 64\n"
             "level = 0.9\n"
             "seed = 12345\n"
             "em_tol = 1e-9\n"
             "em_max_iter = 500\n");

  const SimulationConfig cfg = fepca::read_simulation_config(tmp.file("exp.cfg"));
  CHECK(cfg.use_dataset == false);
  CHECK(cfg.n == 20);
  CHECK(cfg.p == 100);
  CHECK(cfg.ratio == 4.0);
  CHECK(cfg.rank == 2);
  CHECK(cfg.regenerate_structure == false);
  REQUIRE(cfg.conditions.size() == 3);
  CHECK(cfg.conditions[0].sigma == 0.1);
  CHECK(cfg.conditions[1].sigma == 0.5);
  CHECK(cfg.conditions[2].uses_snr());
  CHECK(cfg.conditions[2].snr == 4.0);
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[0] == Method::Asymptotic);
  CHECK(cfg.methods[1] == Method::Bootstrap);
  CHECK(cfg.replicates == 7);
  CHECK(cfg.draws == 64);
  CHECK(cfg.level == 0.9);
  CHECK(cfg.seed == 12345);
  CHECK(cfg.em.tol == 1e-9);
  CHECK(cfg.em.max_iter == 500);
}

TEST_CASE("simulation config resolves data paths relative to itself") {
  const Scratch tmp("config_data");
  fs::create_directories(tmp.file("sub"));
  write_file(tmp.file("sub/table.csv"),
             "name,a,b,c\nr1,1,2,3\nr2,2,4,9\nr3,3,8,27\nr4,4,16,81\n");
  write_file(tmp.file("sub/exp.cfg"),
             "data = table.csv\n"
             "scale = true\n"
             "rank = 2\n"
             "sigma = 0.2\n"
             "methods = asymptotic\n");

  const SimulationConfig cfg = fepca::read_simulation_config(tmp.file("sub/exp.cfg"));
  CHECK(cfg.use_dataset);
  CHECK(cfg.dataset.rows() == 4);
  CHECK(cfg.dataset.cols() == 3);
  CHECK(cfg.dataset_path.find("table.csv") != std::string::npos);
  // scale = true: working columns are centered with unit sample variance.
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(cfg.dataset.col(j).sum()) < 1e-12);
    CHECK(cfg.dataset.col(j).squaredNorm() / 3.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("simulation config rejects malformed input") {
  const Scratch tmp("config_bad");

  write_file(tmp.file("unknown.cfg"), "n = 5\np = 4\nsigma = 0.1\nmethods = asymptotic\nbogus_key = 3\n");
  CHECK_THROWS_WITH_AS(fepca::read_simulation_config(tmp.file("unknown.cfg")),
                       doctest::Contains("unknown config key 'bogus_key'"), std::invalid_argument);

  write_file(tmp.file("noeq.cfg"), "n = 5\njust words\n");
  CHECK_THROWS_WITH_AS(fepca::read_simulation_config(tmp.file("noeq.cfg")),
                       doctest::Contains("line 2"), std::invalid_argument);

  write_file(tmp.file("badnum.cfg"), "n = five\n");
  CHECK_THROWS_WITH_AS(fepca::read_simulation_config(tmp.file("badnum.cfg")),
                       doctest::Contains("expects a number"), std::invalid_argument);

  write_file(tmp.file("badbool.cfg"), "n = 5\nregenerate_structure = maybe\n");
  CHECK_THROWS_WITH_AS(fepca::read_simulation_config(tmp.file("badbool.cfg")),
                       doctest::Contains("expects true/false"), std::invalid_argument);

  write_file(tmp.file("novalue.cfg"), "n =\n");
  CHECK_THROWS_WITH_AS(fepca::read_simulation_config(tmp.file("novalue.cfg")),
                       doctest::Contains("has no value"), std::invalid_argument);

  // Structurally fine but semantically empty: validation still runs.
  write_file(tmp.file("nomethods.cfg"), "n = 5\np = 4\nsigma = 0.1\n");
  CHECK_THROWS_WITH_AS(fepca::read_simulation_config(tmp.file("nomethods.cfg")),
                       doctest::Contains("no methods"), std::invalid_argument);

  CHECK_THROWS_WITH_AS(fepca::read_simulation_config(tmp.file("absent.cfg")),
                       doctest::Contains("cannot open"), std::runtime_error);
}
