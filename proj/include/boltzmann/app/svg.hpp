#pragma once

// Minimal SVG figures with explicit viewBox. Data are passed in world
// coordinates; the plot maps its bounding box onto the canvas.

#include <string>
#include <utility>
#include <vector>

namespace boltzmann::app {

using Point2 = std::pair<double, double>;
using Polyline = std::vector<Point2>;

struct TrajectoryFigure {
  double h = 1.0;
  std::vector<Polyline> used;    // covered part of each ellipse (solid)
  std::vector<Polyline> unused;  // rest of each ellipse (dashed)
  std::vector<Polyline> paths;   // free-form trajectories (perturbed runs)
};

std::string trajectory_svg(const TrajectoryFigure& fig);

/// Delta_2 gamma against n; even n as blue '+', odd n as red 'x'.
std::string delta2_gamma_svg(const std::vector<Point2>& even, const std::vector<Point2>& odd);

struct SectionFigure {
  double x_max = 1.0;
  std::vector<Polyline> level_curves;
  std::vector<std::vector<Point2>> clouds;  // one per seed
};

std::string section_svg(const SectionFigure& fig);

/// Boundary curves of the accessible set (one polyline per connected piece).
std::string region_svg(const std::vector<Polyline>& curves);

}  // namespace boltzmann::app
