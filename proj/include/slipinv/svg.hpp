#ifndef SLIPINV_SVG_HPP
#define SLIPINV_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slipinv/mesh.hpp"

namespace slipinv {

namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// Five-stop blue -> yellow -> red ramp, linear between stops.
inline std::string ramp_color(double t) {
  static const double stops[5][3] = {{13, 8, 135},   {126, 3, 168},  {204, 71, 120},
                                     {248, 149, 64}, {240, 249, 33}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int k = std::min(3, static_cast<int>(pos));
  const double f = pos - k;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rgb(%d,%d,%d)",
                static_cast<int>(std::lround(stops[k][0] + f * (stops[k + 1][0] - stops[k][0]))),
                static_cast<int>(std::lround(stops[k][1] + f * (stops[k + 1][1] - stops[k][1]))),
                static_cast<int>(std::lround(stops[k][2] + f * (stops[k + 1][2] - stops[k][2]))));
  return buf;
}

}  // namespace detail

/// Deterministic SVG heat map: one square per subfault on the (x,y) plane,
/// linear color scale with a min/max legend, stations drawn as triangles.
inline void emit_heatmap(const Eigen::VectorXd& values, const FaultMesh& mesh,
                         const StationSet* stations, const std::string& title,
                         const std::string& path) {
  if (values.size() != mesh.subfault_count())
    throw std::invalid_argument("emit_heatmap: one value per subfault required");

  double vmin = values.minCoeff(), vmax = values.maxCoeff();
  double xmin = mesh.centroids.col(0).minCoeff(), xmax = mesh.centroids.col(0).maxCoeff();
  double ymin = mesh.centroids.col(1).minCoeff(), ymax = mesh.centroids.col(1).maxCoeff();
  if (stations) {
    xmin = std::min(xmin, stations->coordinates.col(0).minCoeff());
    xmax = std::max(xmax, stations->coordinates.col(0).maxCoeff());
    ymin = std::min(ymin, stations->coordinates.col(1).minCoeff());
    ymax = std::max(ymax, stations->coordinates.col(1).maxCoeff());
  }
  const double max_side = std::sqrt(mesh.areas.maxCoeff());
  xmin -= max_side;
  xmax += max_side;
  ymin -= max_side;
  ymax += max_side;

  const double width = 720.0, height = 560.0, margin = 50.0;
  const double sx = (width - 2 * margin) / std::max(xmax - xmin, 1.0);
  const double sy = (height - 2 * margin) / std::max(ymax - ymin, 1.0);
  const double scale = std::min(sx, sy);
  auto px = [&](double x) { return margin + (x - xmin) * scale; };
  auto py = [&](double y) { return height - margin - (y - ymin) * scale; };  // y up

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_heatmap: cannot write " + path);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << detail::svg_num(margin) << "\" y=\"24\" font-family=\"monospace\" "
         "font-size=\"16\">"
      << title << "</text>\n";

  const double span = vmax - vmin;
  for (Eigen::Index i = 0; i < mesh.subfault_count(); ++i) {
    const double side = std::sqrt(mesh.areas[i]) * scale;
    const double cx = px(mesh.centroids(i, 0));
    const double cy = py(mesh.centroids(i, 1));
    const double t = span > 0.0 ? (values[i] - vmin) / span : 0.5;
    out << "<rect x=\"" << detail::svg_num(cx - side / 2) << "\" y=\""
        << detail::svg_num(cy - side / 2) << "\" width=\"" << detail::svg_num(side)
        << "\" height=\"" << detail::svg_num(side) << "\" fill=\"" << detail::ramp_color(t)
        << "\" stroke=\"#333\" stroke-width=\"0.4\"/>\n";
  }

  if (stations) {
    for (Eigen::Index k = 0; k < stations->station_count(); ++k) {
      const double cx = px(stations->coordinates(k, 0));
      const double cy = py(stations->coordinates(k, 1));
      out << "<polygon points=\"" << detail::svg_num(cx) << "," << detail::svg_num(cy - 7) << " "
          << detail::svg_num(cx - 6) << "," << detail::svg_num(cy + 5) << " "
          << detail::svg_num(cx + 6) << "," << detail::svg_num(cy + 5)
          << "\" fill=\"#0a7d28\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
    }
  }

  // legend: horizontal ramp with min/max labels
  const double lx = width - margin - 220.0, ly = height - 26.0;
  for (int i = 0; i < 40; ++i) {
    out << "<rect x=\"" << detail::svg_num(lx + 4.0 * i) << "\" y=\"" << detail::svg_num(ly)
        << "\" width=\"4\" height=\"12\" fill=\"" << detail::ramp_color(i / 39.0) << "\"/>\n";
  }
  char lo[48], hi[48];
  std::snprintf(lo, sizeof(lo), "%.6g", vmin);
  std::snprintf(hi, sizeof(hi), "%.6g", vmax);
  out << "<text x=\"" << detail::svg_num(lx) << "\" y=\"" << detail::svg_num(ly - 4.0)
      << "\" font-family=\"monospace\" font-size=\"11\">min " << lo << "</text>\n";
  out << "<text x=\"" << detail::svg_num(lx + 160.0) << "\" y=\"" << detail::svg_num(ly - 4.0)
      << "\" font-family=\"monospace\" font-size=\"11\">max " << hi << "</text>\n";
  out << "</svg>\n";
}

}  // namespace slipinv

#endif
