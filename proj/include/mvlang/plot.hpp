#pragma once

#include <string>
#include <vector>

#include "mvlang/phylo.hpp"

namespace mvlang {

/// Minimal static SVG emitters for the CLI's curve and dendrogram output.
struct CurveSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
};

std::string curve_svg(const std::vector<CurveSeries>& series, const std::string& x_label,
                      const std::string& y_label);

std::string dendrogram_svg(const std::vector<MergeStep>& steps,
                           const std::vector<std::string>& labels);

}  // namespace mvlang
