#include "mvlang/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mvlang {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 56.0;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string curve_svg(const std::vector<CurveSeries>& series, const std::string& x_label,
                      const std::string& y_label) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double x : s.xs) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
    for (double y : s.ys) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;

  auto px = [&](double x) { return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin); };
  auto py = [&](double y) {
    return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kHeight - kMargin) + "\" x2=\"" +
         num(kWidth - kMargin) + "\" y2=\"" + num(kHeight - kMargin) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(kMargin) + "\" x2=\"" + num(kMargin) +
         "\" y2=\"" + num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kHeight / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
         num(kHeight / 2) + ")\">" + y_label + "</text>\n";
  // Axis extremes.
  svg += "<text x=\"" + num(kMargin) + "\" y=\"" + num(kHeight - kMargin + 16) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + num(xmin) + "</text>\n";
  svg += "<text x=\"" + num(kWidth - kMargin) + "\" y=\"" + num(kHeight - kMargin + 16) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + num(xmax) + "</text>\n";
  svg += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(py(ymin)) +
         "\" font-size=\"11\" text-anchor=\"end\">" + num(ymin) + "</text>\n";
  svg += "<text x=\"" + num(kMargin - 6) + "\" y=\"" + num(py(ymax)) +
         "\" font-size=\"11\" text-anchor=\"end\">" + num(ymax) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    std::string points;
    for (std::size_t i = 0; i < series[s].xs.size(); ++i) {
      points += num(px(series[s].xs[i])) + "," + num(py(series[s].ys[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
           points + "\"/>\n";
    svg += "<text x=\"" + num(kWidth - kMargin + 4) + "\" y=\"" +
           num(kMargin + 16.0 * static_cast<double>(s)) + "\" font-size=\"11\" fill=\"" + color +
           "\">" + series[s].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string dendrogram_svg(const std::vector<MergeStep>& steps,
                           const std::vector<std::string>& labels) {
  const int n = static_cast<int>(steps.size()) + 1;
  if (static_cast<int>(labels.size()) != n) {
    fail(ErrorKind::DimensionMismatch, "label count does not match merge list");
  }
  const double row_height = 18.0;
  const double height = 2 * kMargin + row_height * static_cast<double>(n);
  const double label_width = 70.0;

  // Leaf order: left-to-right walk of the dendrogram keeps branches untangled.
  std::vector<std::vector<int>> members(static_cast<std::size_t>(2 * n - 1));
  for (int i = 0; i < n; ++i) members[static_cast<std::size_t>(i)] = {i};
  for (int s = 0; s < n - 1; ++s) {
    auto& dst = members[static_cast<std::size_t>(n + s)];
    dst = members[static_cast<std::size_t>(steps[static_cast<std::size_t>(s)].left)];
    const auto& right = members[static_cast<std::size_t>(steps[static_cast<std::size_t>(s)].right)];
    dst.insert(dst.end(), right.begin(), right.end());
  }
  const auto& order = members.back();
  std::vector<double> leaf_y(static_cast<std::size_t>(n), 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    leaf_y[static_cast<std::size_t>(order[i])] = kMargin + row_height * (static_cast<double>(i) + 0.5);
  }

  double max_h = 0.0;
  for (const auto& s : steps) max_h = std::max(max_h, s.height);
  if (max_h <= 0.0) max_h = 1.0;
  auto px = [&](double h) {
    return kWidth - kMargin - (h / max_h) * (kWidth - 2 * kMargin - label_width);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  std::vector<double> node_y(static_cast<std::size_t>(2 * n - 1), 0.0);
  std::vector<double> node_h(static_cast<std::size_t>(2 * n - 1), 0.0);
  for (int i = 0; i < n; ++i) {
    node_y[static_cast<std::size_t>(i)] = leaf_y[static_cast<std::size_t>(i)];
    svg += "<text x=\"" + num(kWidth - kMargin + 4) + "\" y=\"" +
           num(leaf_y[static_cast<std::size_t>(i)] + 4) + "\" font-size=\"11\">" +
           labels[static_cast<std::size_t>(i)] + "</text>\n";
  }
  for (int s = 0; s < n - 1; ++s) {
    const auto& step = steps[static_cast<std::size_t>(s)];
    const double yl = node_y[static_cast<std::size_t>(step.left)];
    const double yr = node_y[static_cast<std::size_t>(step.right)];
    const double xl = px(node_h[static_cast<std::size_t>(step.left)]);
    const double xr = px(node_h[static_cast<std::size_t>(step.right)]);
    const double x = px(step.height);
    svg += "<path fill=\"none\" stroke=\"#1f77b4\" d=\"M " + num(xl) + " " + num(yl) + " L " +
           num(x) + " " + num(yl) + " L " + num(x) + " " + num(yr) + " L " + num(xr) + " " +
           num(yr) + "\"/>\n";
    node_y[static_cast<std::size_t>(n + s)] = 0.5 * (yl + yr);
    node_h[static_cast<std::size_t>(n + s)] = step.height;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace mvlang
