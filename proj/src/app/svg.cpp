#include "boltzmann/app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace boltzmann::app {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

class Plot {
 public:
  Plot(double x0, double x1, double y0, double y1, double width = 640, double height = 480,
       bool equal_aspect = false)
      : W_(width), H_(height) {
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    x0_ = x0;
    y0_ = y0;
    sx_ = (W_ - 2 * kMargin) / (x1 - x0);
    sy_ = (H_ - 2 * kMargin) / (y1 - y0);
    if (equal_aspect) {
      const double s = std::min(sx_, sy_);
      x0_ -= 0.5 * ((W_ - 2 * kMargin) / s - (x1 - x0));
      y0_ -= 0.5 * ((H_ - 2 * kMargin) / s - (y1 - y0));
      sx_ = sy_ = s;
    }
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + num(W_) + "\" height=\"" + num(H_) +
             "\" fill=\"white\"/>\n";
  }

  double X(double x) const { return kMargin + (x - x0_) * sx_; }
  double Y(double y) const { return H_ - kMargin - (y - y0_) * sy_; }

  void polyline(const Polyline& pts, const std::string& style) {
    if (pts.size() < 2) return;
    body_ += "<polyline fill=\"none\" " + style + " points=\"";
    for (const auto& [x, y] : pts) body_ += num(X(x)) + "," + num(Y(y)) + " ";
    body_ += "\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    body_ += "<line x1=\"" + num(X(x1)) + "\" y1=\"" + num(Y(y1)) + "\" x2=\"" + num(X(x2)) +
             "\" y2=\"" + num(Y(y2)) + "\" " + style + "/>\n";
  }

  void dot(double x, double y, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + num(X(x)) + "\" cy=\"" + num(Y(y)) + "\" r=\"" + num(r) +
             "\" fill=\"" + fill + "\"/>\n";
  }

  void plus(double x, double y, const std::string& color) {
    const double cx = X(x);
    const double cy = Y(y);
    body_ += "<path d=\"M" + num(cx - 3) + " " + num(cy) + "h6M" + num(cx) + " " + num(cy - 3) +
             "v6\" stroke=\"" + color + "\"/>\n";
  }

  void cross(double x, double y, const std::string& color) {
    const double cx = X(x);
    const double cy = Y(y);
    body_ += "<path d=\"M" + num(cx - 3) + " " + num(cy - 3) + "l6 6M" + num(cx - 3) + " " +
             num(cy + 3) + "l6 -6\" stroke=\"" + color + "\"/>\n";
  }

  void text_px(double px, double py, const std::string& s, const std::string& extra = "") {
    body_ += "<text x=\"" + num(px) + "\" y=\"" + num(py) +
             "\" font-family=\"sans-serif\" font-size=\"12\" " + extra + ">" + s + "</text>\n";
  }

  void text(double x, double y, const std::string& s) { text_px(X(x) + 4, Y(y) - 4, s); }

  // Frame with a few ticks; labels in world units.
  void axes(double x0, double x1, double y0, double y1, const std::string& xlabel,
            const std::string& ylabel) {
    const std::string style = "stroke=\"black\" stroke-width=\"1\"";
    line(x0, y0, x1, y0, style);
    line(x0, y0, x0, y1, style);
    for (int i = 0; i <= 4; ++i) {
      const double xv = x0 + (x1 - x0) * i / 4.0;
      const double yv = y0 + (y1 - y0) * i / 4.0;
      text_px(X(xv) - 10, Y(y0) + 16, num(xv));
      text_px(4, Y(yv) + 4, num(yv));
    }
    text_px(W_ / 2, H_ - 6, xlabel, "text-anchor=\"middle\"");
    text_px(12, kMargin - 12, ylabel);
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(W_) + " " + num(H_) +
           "\" width=\"" + num(W_) + "\" height=\"" + num(H_) + "\">\n" + body_ + "</svg>\n";
  }

 private:
  static constexpr double kMargin = 48.0;
  double W_;
  double H_;
  double x0_ = 0.0;
  double y0_ = 0.0;
  double sx_ = 1.0;
  double sy_ = 1.0;
  std::string body_;
};

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void add(const Polyline& p) {
    for (const auto& [x, y] : p) add(x, y);
  }
  bool empty() const { return !(x1 >= x0); }
  void pad(double f) {
    const double dx = (x1 - x0) * f + 1e-12;
    const double dy = (y1 - y0) * f + 1e-12;
    x0 -= dx;
    x1 += dx;
    y0 -= dy;
    y1 += dy;
  }
};

}  // namespace

std::string trajectory_svg(const TrajectoryFigure& fig) {
  Box box;
  box.add(0.0, 0.0);
  box.add(0.0, fig.h);
  for (const auto& p : fig.used) box.add(p);
  for (const auto& p : fig.unused) box.add(p);
  for (const auto& p : fig.paths) box.add(p);
  box.pad(0.05);
  Plot plot(box.x0, box.x1, box.y0, box.y1, 640, 640, true);
  plot.line(box.x0, fig.h, box.x1, fig.h, "stroke=\"black\" stroke-width=\"2\"");
  plot.text(box.x0, fig.h, "wall y = " + num(fig.h));
  for (std::size_t i = 0; i < fig.unused.size(); ++i) {
    plot.polyline(fig.unused[i], std::string("stroke=\"") + kPalette[i % 8] +
                                     "\" stroke-width=\"0.8\" stroke-dasharray=\"4 3\"");
  }
  for (std::size_t i = 0; i < fig.used.size(); ++i) {
    plot.polyline(fig.used[i], std::string("stroke=\"") + kPalette[i % 8] + "\" stroke-width=\"1.6\"");
  }
  for (const auto& p : fig.paths) plot.polyline(p, "stroke=\"#1f77b4\" stroke-width=\"1\"");
  plot.dot(0.0, 0.0, 3.5, "black");
  plot.text(0.0, 0.0, "O");
  return plot.str();
}

std::string delta2_gamma_svg(const std::vector<Point2>& even, const std::vector<Point2>& odd) {
  Box box;
  for (const auto& [x, y] : even) box.add(x, y);
  for (const auto& [x, y] : odd) box.add(x, y);
  if (box.empty()) box = Box{0, 1, 0, 1};
  box.pad(0.05);
  Plot plot(box.x0, box.x1, box.y0, box.y1, 720, 480);
  plot.axes(box.x0, box.x1, box.y0, box.y1, "n", "delta2 gamma");
  for (const auto& [x, y] : even) plot.plus(x, y, "#1f77b4");
  for (const auto& [x, y] : odd) plot.cross(x, y, "#d62728");
  plot.text_px(560, 20, "+ even n", "fill=\"#1f77b4\"");
  plot.text_px(560, 36, "x odd n", "fill=\"#d62728\"");
  return plot.str();
}

std::string section_svg(const SectionFigure& fig) {
  const double pi = std::acos(-1.0);
  Plot plot(-fig.x_max, fig.x_max, 0.0, pi, 720, 480);
  plot.axes(-fig.x_max, fig.x_max, 0.0, pi, "x", "lambda");
  plot.line(fig.x_max, 0.0, fig.x_max, pi, "stroke=\"black\"");
  plot.line(-fig.x_max, pi, fig.x_max, pi, "stroke=\"black\"");
  for (const auto& c : fig.level_curves) plot.polyline(c, "stroke=\"#999999\" stroke-width=\"0.8\"");
  for (std::size_t i = 0; i < fig.clouds.size(); ++i) {
    for (const auto& [x, y] : fig.clouds[i]) plot.dot(x, y, 1.3, kPalette[i % 8]);
  }
  return plot.str();
}

std::string region_svg(const std::vector<Polyline>& curves) {
  Box box;
  for (const auto& c : curves) box.add(c);
  if (box.empty()) box = Box{-1, 1, -1, 1};
  box.pad(0.05);
  Plot plot(box.x0, box.x1, box.y0, box.y1, 640, 480);
  plot.axes(box.x0, box.x1, box.y0, box.y1, "x", "boundary");
  for (const auto& c : curves) plot.polyline(c, "stroke=\"#1f77b4\" stroke-width=\"1.5\"");
  return plot.str();
}

}  // namespace boltzmann::app
