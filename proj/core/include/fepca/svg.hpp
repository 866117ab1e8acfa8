#pragma once

#include <string>

#include "fepca/io.hpp"

namespace fepca {

struct SvgOptions {
  int width = 840;
  int height = 620;
  bool point_labels = true;
  int outline_points = 128;  // vertices per ellipse boundary
  bool columns = false;      // draw the variable map instead of the individuals
};

/// Factor map for one axis pair (0-based): points, their confidence
/// ellipses, axes through the origin, and "Dim k (xx.x%)" labels. Equal
/// scale on both axes. The output is a self-contained, well-formed SVG
/// document whose bytes depend only on the bundle and options.
std::string render_svg(const ResultBundle& b, int dim_x, int dim_y,
                       const SvgOptions& opt = {});

}  // namespace fepca
