#include "fepca/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fepca {

namespace {

std::string fixed3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Box {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  void include(double x, double y) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
};

}  // namespace

std::string render_svg(const ResultBundle& b, int dim_x, int dim_y, const SvgOptions& opt) {
  if (dim_x < 0 || dim_y < 0 || dim_x >= b.rank || dim_y >= b.rank || dim_x == dim_y) {
    throw std::invalid_argument("axis pair (" + std::to_string(dim_x + 1) + ", " +
                                std::to_string(dim_y + 1) + ") invalid for rank " +
                                std::to_string(b.rank));
  }
  if (opt.width < 200 || opt.height < 200) {
    throw std::invalid_argument("svg canvas must be at least 200 x 200");
  }
  if (opt.outline_points < 8) {
    throw std::invalid_argument("ellipse outline needs at least 8 points");
  }

  const std::vector<PointRegion>& regions = opt.columns ? b.column_regions : b.row_regions;
  const std::vector<std::string>& labels = opt.columns ? b.col_labels : b.row_labels;

  // Point coordinates on the requested axes. Variables live on the loading
  // axes stretched by the singular values (their natural score scale).
  Eigen::MatrixXd coords(static_cast<long>(labels.size()), 2);
  if (opt.columns) {
    coords.col(0) = b.loadings.col(dim_x) * b.singular_values(dim_x);
    coords.col(1) = b.loadings.col(dim_y) * b.singular_values(dim_y);
  } else {
    coords.col(0) = b.scores.col(dim_x);
    coords.col(1) = b.scores.col(dim_y);
  }

  // 2-D marginals of the stored regions, outlined for drawing.
  std::vector<Eigen::MatrixXd> outlines;
  for (const PointRegion& r : regions) {
    ConfidenceEllipsoid marginal;
    marginal.center = Eigen::Vector2d(r.ellipsoid.center(dim_x), r.ellipsoid.center(dim_y));
    marginal.cov.resize(2, 2);
    marginal.cov << r.ellipsoid.cov(dim_x, dim_x), r.ellipsoid.cov(dim_x, dim_y),
        r.ellipsoid.cov(dim_y, dim_x), r.ellipsoid.cov(dim_y, dim_y);
    marginal.level = r.ellipsoid.level;
    marginal.radius2 = chi_square_quantile(2, r.ellipsoid.level);
    outlines.push_back(ellipse_outline(marginal, opt.outline_points));
  }

  Box box;  // origin always shown: a factor map without its center misleads
  for (long i = 0; i < coords.rows(); ++i) box.include(coords(i, 0), coords(i, 1));
  for (const Eigen::MatrixXd& o : outlines)
    for (long k = 0; k < o.rows(); ++k) box.include(o(k, 0), o(k, 1));

  const double pad_x = 0.08 * std::max(box.xmax - box.xmin, 1e-9);
  const double pad_y = 0.08 * std::max(box.ymax - box.ymin, 1e-9);
  box.xmin -= pad_x;
  box.xmax += pad_x;
  box.ymin -= pad_y;
  box.ymax += pad_y;

  const double margin_left = 64, margin_right = 24, margin_top = 24, margin_bottom = 56;
  const double plot_w = opt.width - margin_left - margin_right;
  const double plot_h = opt.height - margin_top - margin_bottom;

  // One scale for both axes so distances are honest.
  const double scale = std::min(plot_w / (box.xmax - box.xmin), plot_h / (box.ymax - box.ymin));
  const double cx = (box.xmin + box.xmax) / 2.0;
  const double cy = (box.ymin + box.ymax) / 2.0;
  const double px0 = margin_left + plot_w / 2.0;
  const double py0 = margin_top + plot_h / 2.0;
  auto X = [&](double x) { return px0 + (x - cx) * scale; };
  auto Y = [&](double y) { return py0 - (y - cy) * scale; };

  const double total = b.total_variance;
  const double pct_x = total > 0 ? 100.0 * b.singular_values(dim_x) * b.singular_values(dim_x) / total : 0.0;
  const double pct_y = total > 0 ? 100.0 * b.singular_values(dim_y) * b.singular_values(dim_y) / total : 0.0;
  char axis_x[64], axis_y[64];
  std::snprintf(axis_x, sizeof(axis_x), "Dim %d (%.1f%%)", dim_x + 1, pct_x);
  std::snprintf(axis_y, sizeof(axis_y), "Dim %d (%.1f%%)", dim_y + 1, pct_y);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height
      << "\" fill=\"#ffffff\"/>\n";

  // Axes through the origin.
  svg << "  <line x1=\"" << fixed3(margin_left) << "\" y1=\"" << fixed3(Y(0.0)) << "\" x2=\""
      << fixed3(margin_left + plot_w) << "\" y2=\"" << fixed3(Y(0.0))
      << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
  svg << "  <line x1=\"" << fixed3(X(0.0)) << "\" y1=\"" << fixed3(margin_top) << "\" x2=\""
      << fixed3(X(0.0)) << "\" y2=\"" << fixed3(margin_top + plot_h)
      << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";

  for (std::size_t i = 0; i < outlines.size(); ++i) {
    const Eigen::MatrixXd& o = outlines[i];
    svg << "  <path d=\"M " << fixed3(X(o(0, 0))) << " " << fixed3(Y(o(0, 1)));
    for (long k = 1; k < o.rows(); ++k) {
      svg << " L " << fixed3(X(o(k, 0))) << " " << fixed3(Y(o(k, 1)));
    }
    svg << " Z\" fill=\"#4878a8\" fill-opacity=\"0.10\" stroke=\"#4878a8\" "
           "stroke-width=\"1\"/>\n";
  }

  for (long i = 0; i < coords.rows(); ++i) {
    svg << "  <circle cx=\"" << fixed3(X(coords(i, 0))) << "\" cy=\"" << fixed3(Y(coords(i, 1)))
        << "\" r=\"3\" fill=\"#1b3a5c\"/>\n";
    if (opt.point_labels) {
      svg << "  <text x=\"" << fixed3(X(coords(i, 0)) + 5.0) << "\" y=\""
          << fixed3(Y(coords(i, 1)) - 5.0)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#1b3a5c\">"
          << escape_xml(labels[static_cast<std::size_t>(i)]) << "</text>\n";
    }
  }

  svg << "  <text x=\"" << fixed3(margin_left + plot_w / 2.0) << "\" y=\""
      << fixed3(static_cast<double>(opt.height) - 16.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "fill=\"#222222\">"
      << escape_xml(axis_x) << "</text>\n";
  svg << "  <text x=\"20\" y=\"" << fixed3(margin_top + plot_h / 2.0)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
         "fill=\"#222222\" transform=\"rotate(-90 20 "
      << fixed3(margin_top + plot_h / 2.0) << ")\">" << escape_xml(axis_y) << "</text>\n";

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace fepca
