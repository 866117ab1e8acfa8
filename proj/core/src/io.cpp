#include "fepca/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace fepca {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(cell);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

/// Shortest decimal text that parses back to exactly the same double.
std::string number_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& raw, int row, int col) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw std::runtime_error("non-numeric cell '" + s + "' at data row " + std::to_string(row) +
                             ", column " + std::to_string(col));
  }
  return v;
}

char detect_delimiter(const std::string& header) {
  const char candidates[] = {',', ';', '\t'};
  char best = '\0';
  long best_count = 0;
  for (char c : candidates) {
    const long count = std::count(header.begin(), header.end(), c);
    if (count > best_count) {
      best = c;
      best_count = count;
    }
  }
  if (best == '\0') {
    throw std::runtime_error("could not detect a delimiter (comma, semicolon or tab) "
                             "in the header row");
  }
  return best;
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.size() < 2) {
    throw std::runtime_error("'" + path.string() + "' needs a header row and data rows");
  }

  const char delim = delimiter == '\0' ? detect_delimiter(lines[0]) : delimiter;
  const std::vector<std::string> header = split(lines[0], delim);
  if (header.size() < 3) {
    throw std::runtime_error("header row has only " + std::to_string(header.size()) +
                             " cells; need a label cell plus at least 2 columns");
  }

  Dataset data;
  for (std::size_t j = 1; j < header.size(); ++j) data.col_labels.push_back(trim(header[j]));

  const int p = static_cast<int>(data.col_labels.size());
  const int n = static_cast<int>(lines.size()) - 1;
  data.values.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const std::vector<std::string> cells = split(lines[static_cast<std::size_t>(i) + 1], delim);
    if (static_cast<int>(cells.size()) != p + 1) {
      throw std::runtime_error("data row " + std::to_string(i + 1) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(p + 1));
    }
    data.row_labels.push_back(trim(cells[0]));
    for (int j = 0; j < p; ++j) {
      data.values(i, j) = parse_number(cells[static_cast<std::size_t>(j) + 1], i + 1, j + 1);
    }
  }
  data.validate();
  return data;
}

namespace {

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (long i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
  const long rows = static_cast<long>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const long cols = static_cast<long>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  return m;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const ordered_json& j) {
  Eigen::VectorXd v(static_cast<long>(j.size()));
  for (long i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

ordered_json region_to_json(const PointRegion& r) {
  ordered_json out;
  out["label"] = r.label;
  out["center"] = vector_to_json(r.ellipsoid.center);
  out["cov"] = matrix_to_json(r.ellipsoid.cov);
  out["level"] = r.ellipsoid.level;
  out["radius2"] = r.ellipsoid.radius2;
  return out;
}

PointRegion region_from_json(const ordered_json& j) {
  PointRegion r;
  r.label = j.at("label").get<std::string>();
  r.ellipsoid.center = vector_from_json(j.at("center"));
  r.ellipsoid.cov = matrix_from_json(j.at("cov"));
  r.ellipsoid.level = j.at("level").get<double>();
  r.ellipsoid.radius2 = j.at("radius2").get<double>();
  return r;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  out << text;
  if (!out) {
    throw std::runtime_error("failed while writing '" + path.string() + "'");
  }
}

}  // namespace

void write_results_json(const ResultBundle& b, const std::filesystem::path& path) {
  ordered_json j;
  j["schema"] = "fepca-results/1";

  ordered_json data;
  data["rows"] = b.row_labels;
  data["columns"] = b.col_labels;
  data["scaled"] = b.pre.scaled;
  data["column_means"] = vector_to_json(b.pre.col_means);
  data["column_scales"] = vector_to_json(b.pre.col_scales);
  j["data"] = std::move(data);

  ordered_json fit;
  fit["rank"] = b.rank;
  fit["singular_values"] = vector_to_json(b.singular_values);
  fit["total_variance"] = b.total_variance;
  fit["scores"] = matrix_to_json(b.scores);
  fit["loadings"] = matrix_to_json(b.loadings);
  fit["sigma2"] = b.sigma2;
  fit["noise_df"] = b.noise_df;
  fit["curvature"] = b.curvature;
  fit["degenerate_spectrum"] = b.degenerate_spectrum;
  j["fit"] = std::move(fit);

  ordered_json inference;
  inference["method"] = b.method;
  inference["replicates"] = b.replicate_count;
  inference["seed"] = b.seed;
  inference["level"] = b.level;
  inference["warnings"] = b.warnings;
  j["inference"] = std::move(inference);

  ordered_json rows = ordered_json::array();
  for (const PointRegion& r : b.row_regions) rows.push_back(region_to_json(r));
  j["row_regions"] = std::move(rows);

  ordered_json cols = ordered_json::array();
  for (const PointRegion& r : b.column_regions) cols.push_back(region_to_json(r));
  j["column_regions"] = std::move(cols);

  write_text_file(path, j.dump(2) + "\n");
}

ResultBundle read_results_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "fepca-results/1") {
      throw std::runtime_error("unrecognized schema in '" + path.string() + "'");
    }
    ResultBundle b;
    const ordered_json& data = j.at("data");
    b.row_labels = data.at("rows").get<std::vector<std::string>>();
    b.col_labels = data.at("columns").get<std::vector<std::string>>();
    b.pre.scaled = data.at("scaled").get<bool>();
    b.pre.col_means = vector_from_json(data.at("column_means"));
    b.pre.col_scales = vector_from_json(data.at("column_scales"));

    const ordered_json& fit = j.at("fit");
    b.rank = fit.at("rank").get<int>();
    b.singular_values = vector_from_json(fit.at("singular_values"));
    b.total_variance = fit.at("total_variance").get<double>();
    b.scores = matrix_from_json(fit.at("scores"));
    b.loadings = matrix_from_json(fit.at("loadings"));
    b.sigma2 = fit.at("sigma2").get<double>();
    b.noise_df = fit.at("noise_df").get<long>();
    b.curvature = fit.at("curvature").get<double>();
    b.degenerate_spectrum = fit.at("degenerate_spectrum").get<bool>();

    const ordered_json& inference = j.at("inference");
    b.method = inference.at("method").get<std::string>();
    b.replicate_count = inference.at("replicates").get<int>();
    b.seed = inference.at("seed").get<std::uint64_t>();
    b.level = inference.at("level").get<double>();
    b.warnings = inference.at("warnings").get<std::vector<std::string>>();

    for (const ordered_json& r : j.at("row_regions")) b.row_regions.push_back(region_from_json(r));
    for (const ordered_json& r : j.at("column_regions"))
      b.column_regions.push_back(region_from_json(r));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path.string() + "' does not match the results schema: " +
                             e.what());
  }
}

namespace {

void write_coordinate_csv(const std::vector<std::string>& labels, const Eigen::MatrixXd& coords,
                          const std::string& label_header, const std::filesystem::path& path) {
  std::ostringstream out;
  out << label_header;
  for (long s = 0; s < coords.cols(); ++s) out << ",dim_" << (s + 1);
  out << "\n";
  for (long i = 0; i < coords.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (long s = 0; s < coords.cols(); ++s) out << "," << number_text(coords(i, s));
    out << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace

void write_scores_csv(const ResultBundle& b, const std::filesystem::path& path) {
  write_coordinate_csv(b.row_labels, b.scores, "point", path);
}

void write_loadings_csv(const ResultBundle& b, const std::filesystem::path& path) {
  write_coordinate_csv(b.col_labels, b.loadings, "variable", path);
}

void write_ellipses_csv(const ResultBundle& b,
                        const std::vector<std::pair<int, int>>& dim_pairs,
                        const std::filesystem::path& path) {
  if (b.row_regions.size() != b.row_labels.size()) {
    throw std::invalid_argument("bundle has no per-point regions to export");
  }
  std::ostringstream out;
  out << "point,dim_x,dim_y,x,y,center_x,center_y,cov_xx,cov_xy,cov_yy,level\n";
  for (const auto& [a, bdim] : dim_pairs) {
    if (a < 0 || bdim < 0 || a >= b.rank || bdim >= b.rank || a == bdim) {
      throw std::invalid_argument("axis pair (" + std::to_string(a + 1) + ", " +
                                  std::to_string(bdim + 1) + ") invalid for rank " +
                                  std::to_string(b.rank));
    }
    for (std::size_t i = 0; i < b.row_regions.size(); ++i) {
      const PointRegion& r = b.row_regions[i];
      out << r.label << "," << (a + 1) << "," << (bdim + 1) << ","
          << number_text(b.scores(static_cast<long>(i), a)) << ","
          << number_text(b.scores(static_cast<long>(i), bdim)) << ","
          << number_text(r.ellipsoid.center(a)) << "," << number_text(r.ellipsoid.center(bdim))
          << "," << number_text(r.ellipsoid.cov(a, a)) << ","
          << number_text(r.ellipsoid.cov(a, bdim)) << ","
          << number_text(r.ellipsoid.cov(bdim, bdim)) << "," << number_text(r.ellipsoid.level)
          << "\n";
    }
  }
  write_text_file(path, out.str());
}

void write_coverage_csv(const CoverageTable& t, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "condition";
  for (Method m : t.methods) out << "," << method_name(m);
  out << "\n";
  for (const std::string& c : t.conditions) {
    out << c;
    for (Method m : t.methods) out << "," << number_text(t.at(c, m).coverage());
    out << "\n";
  }
  write_text_file(path, out.str());
}

void write_coverage_json(const CoverageTable& t, const std::filesystem::path& path) {
  ordered_json j;
  j["schema"] = "fepca-coverage/1";
  j["conditions"] = t.conditions;
  ordered_json methods = ordered_json::array();
  for (Method m : t.methods) methods.push_back(method_name(m));
  j["methods"] = std::move(methods);
  ordered_json rows = ordered_json::array();
  for (const CoverageRow& row : t.rows) {
    ordered_json r;
    r["condition"] = row.condition;
    r["method"] = method_name(row.method);
    r["inside"] = row.inside;
    r["total"] = row.total;
    r["replicates"] = row.replicates_used;
    r["failures"] = row.failures;
    r["coverage"] = row.coverage();
    r["std_error"] = row.std_error();
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  write_text_file(path, j.dump(2) + "\n");
}

CoverageTable read_coverage_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "fepca-coverage/1") {
      throw std::runtime_error("unrecognized schema in '" + path.string() + "'");
    }
    CoverageTable t;
    t.conditions = j.at("conditions").get<std::vector<std::string>>();
    for (const ordered_json& m : j.at("methods"))
      t.methods.push_back(method_from_name(m.get<std::string>()));
    for (const ordered_json& r : j.at("rows")) {
      CoverageRow row;
      row.condition = r.at("condition").get<std::string>();
      row.method = method_from_name(r.at("method").get<std::string>());
      row.inside = r.at("inside").get<long>();
      row.total = r.at("total").get<long>();
      row.replicates_used = r.at("replicates").get<int>();
      row.failures = r.at("failures").get<int>();
      t.rows.push_back(std::move(row));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("'" + path.string() + "' does not match the coverage schema: " +
                             e.what());
  }
}

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config key '" + key + "' expects true/false, got '" + value + "'");
}

double parse_config_number(const std::string& value, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  for (const std::string& raw : split(value, ',')) {
    const std::string item = trim(raw);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

SimulationConfig read_simulation_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }

  SimulationConfig cfg;
  std::string dataset_file;
  bool scale = false;
  std::vector<double> sigmas;
  std::vector<double> snrs;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not 'key = value': '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (value.empty()) {
      throw std::invalid_argument("config key '" + key + "' has no value (line " +
                                  std::to_string(line_no) + ")");
    }

    if (key == "n") cfg.n = static_cast<int>(parse_config_number(value, key));
    else if (key == "p") cfg.p = static_cast<int>(parse_config_number(value, key));
    else if (key == "ratio") cfg.ratio = parse_config_number(value, key);
    else if (key == "rank") cfg.rank = static_cast<int>(parse_config_number(value, key));
    else if (key == "regenerate_structure") cfg.regenerate_structure = parse_bool(value, key);
    else if (key == "data") dataset_file = value;
    else if (key == "scale") scale = parse_bool(value, key);
    else if (key == "sigma") {
      for (const std::string& item : split_list(value))
        sigmas.push_back(parse_config_number(item, key));
    } else if (key == "snr") {
      for (const std::string& item : split_list(value))
        snrs.push_back(parse_config_number(item, key));
    } else if (key == "methods") {
      for (const std::string& item : split_list(value))
        cfg.methods.push_back(method_from_name(item));
    } else if (key == "replicates") {
      cfg.replicates = static_cast<int>(parse_config_number(value, key));
    } else if (key == "draws") {
      cfg.draws = static_cast<int>(parse_config_number(value, key));
    } else if (key == "level") {
      cfg.level = parse_config_number(value, key);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_config_number(value, key));
    } else if (key == "em_tol") {
      cfg.em.tol = parse_config_number(value, key);
    } else if (key == "em_max_iter") {
      cfg.em.max_iter = static_cast<int>(parse_config_number(value, key));
    } else {
      throw std::invalid_argument("unknown config key '" + key + "' (line " +
                                  std::to_string(line_no) + ")");
    }
  }

  for (double s : sigmas) cfg.conditions.push_back(NoiseSpec{s, -1.0});
  for (double s : snrs) cfg.conditions.push_back(NoiseSpec{-1.0, s});

  if (!dataset_file.empty()) {
    cfg.use_dataset = true;
    std::filesystem::path data_path(dataset_file);
    if (data_path.is_relative()) data_path = path.parent_path() / data_path;
    const Dataset data = read_csv(data_path);
    auto [working, pre] = preprocess(data, scale);
    cfg.dataset = std::move(working);
    cfg.dataset_path = data_path.string();
  }

  cfg.validate();
  return cfg;
}

}  // namespace fepca
