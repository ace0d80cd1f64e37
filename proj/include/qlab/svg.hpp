#pragma once

// Minimal vector-graphic emitter. Every figure is backed by a plot-data JSON
// (written next to the .svg) so numeric results stay testable without image
// parsing.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlab/errors.hpp"

namespace qlab::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6fb4";
  bool points_only = false;
};

struct Band {
  double x0 = 0.0;
  double x1 = 0.0;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  std::vector<Band> bands;       // shaded vertical spans (dropout windows)
  std::optional<double> h_line;  // dashed horizontal marker (threshold)
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double to_unit(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return (x - a) / (b - a);
  }
};

inline Axis fit_axis(const Figure& fig, bool vertical) {
  Axis ax;
  ax.log = vertical ? fig.log_y : fig.log_x;
  double lo = 1e300, hi = -1e300;
  for (const auto& s : fig.series) {
    const auto& vs = vertical ? s.y : s.x;
    for (const double v : vs) {
      if (ax.log && !(v > 0)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (vertical && fig.h_line && !ax.log) {
    lo = std::min(lo, *fig.h_line);
    hi = std::max(hi, *fig.h_line);
  }
  if (lo > hi) {
    lo = ax.log ? 0.1 : 0.0;
    hi = 1.0;
  }
  if (lo == hi) {
    lo -= ax.log ? 0.5 * lo : (std::fabs(lo) * 0.1 + 1.0);
    hi += ax.log ? 0.5 * hi : (std::fabs(hi) * 0.1 + 1.0);
  }
  const double pad = ax.log ? 0.0 : 0.05 * (hi - lo);
  ax.lo = lo - pad;
  ax.hi = hi + pad;
  if (ax.log) {
    ax.lo = lo / 1.3;
    ax.hi = hi * 1.3;
  }
  return ax;
}

}  // namespace detail

inline nlohmann::json figure_to_json(const Figure& fig) {
  nlohmann::json j;
  j["title"] = fig.title;
  j["x_label"] = fig.x_label;
  j["y_label"] = fig.y_label;
  j["log_x"] = fig.log_x;
  j["log_y"] = fig.log_y;
  j["series"] = nlohmann::json::array();
  for (const auto& s : fig.series) {
    nlohmann::json sj;
    sj["label"] = s.label;
    sj["x"] = s.x;
    sj["y"] = s.y;
    sj["points_only"] = s.points_only;
    j["series"].push_back(sj);
  }
  j["bands"] = nlohmann::json::array();
  for (const auto& b : fig.bands) j["bands"].push_back({{"x0", b.x0}, {"x1", b.x1}});
  if (fig.h_line) j["h_line"] = *fig.h_line;
  return j;
}

// Render one or more vertically stacked panels into an SVG file and write the
// plot-data JSON next to it (<name>.json).
inline void write_svg(const std::filesystem::path& path,
                      const std::vector<Figure>& panels) {
  if (panels.empty()) throw ValidationError("write_svg: no panels");
  const double width = 640.0, panel_height = 300.0;
  const double ml = 70.0, mr = 20.0, mt = 36.0, mb = 44.0;
  std::string svg;
  const double total_height = panel_height * static_cast<double>(panels.size());
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         detail::fmt(width) + "\" height=\"" + detail::fmt(total_height) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Figure& fig = panels[p];
    const double top = panel_height * static_cast<double>(p);
    const auto ax = detail::fit_axis(fig, false);
    const auto ay = detail::fit_axis(fig, true);
    const double x0 = ml, x1 = width - mr;
    const double y0 = top + panel_height - mb, y1 = top + mt;
    auto px = [&](double v) { return x0 + ax.to_unit(v) * (x1 - x0); };
    auto py = [&](double v) { return y0 + ay.to_unit(v) * (y1 - y0); };

    for (const auto& band : fig.bands) {
      const double bx0 = std::clamp(px(band.x0), x0, x1);
      const double bx1 = std::clamp(px(band.x1), x0, x1);
      svg += "<rect x=\"" + detail::fmt(bx0) + "\" y=\"" + detail::fmt(y1) +
             "\" width=\"" + detail::fmt(std::max(bx1 - bx0, 1.0)) +
             "\" height=\"" + detail::fmt(y0 - y1) +
             "\" fill=\"#d62728\" fill-opacity=\"0.18\"/>\n";
    }

    svg += "<rect x=\"" + detail::fmt(x0) + "\" y=\"" + detail::fmt(y1) +
           "\" width=\"" + detail::fmt(x1 - x0) + "\" height=\"" +
           detail::fmt(y0 - y1) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg += "<text x=\"" + detail::fmt(0.5 * (x0 + x1)) + "\" y=\"" +
           detail::fmt(top + 16.0) + "\" text-anchor=\"middle\">" + fig.title +
           "</text>\n";
    svg += "<text x=\"" + detail::fmt(0.5 * (x0 + x1)) + "\" y=\"" +
           detail::fmt(top + panel_height - 8.0) +
           "\" text-anchor=\"middle\">" + fig.x_label + "</text>\n";
    svg += "<text x=\"14\" y=\"" + detail::fmt(0.5 * (y0 + y1)) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           detail::fmt(0.5 * (y0 + y1)) + ")\">" + fig.y_label + "</text>\n";

    // axis ticks: 5 linear divisions (or decades when logarithmic)
    for (int t = 0; t <= 4; ++t) {
      const double u = static_cast<double>(t) / 4.0;
      double vx = ax.log ? std::pow(10.0, std::log10(ax.lo) +
                                              u * (std::log10(ax.hi) -
                                                   std::log10(ax.lo)))
                         : ax.lo + u * (ax.hi - ax.lo);
      double vy = ay.log ? std::pow(10.0, std::log10(ay.lo) +
                                              u * (std::log10(ay.hi) -
                                                   std::log10(ay.lo)))
                         : ay.lo + u * (ay.hi - ay.lo);
      char lbl[32];
      std::snprintf(lbl, sizeof(lbl), "%.3g", vx);
      svg += "<text x=\"" + detail::fmt(x0 + u * (x1 - x0)) + "\" y=\"" +
             detail::fmt(y0 + 14.0) + "\" text-anchor=\"middle\">" + lbl +
             "</text>\n";
      std::snprintf(lbl, sizeof(lbl), "%.3g", vy);
      svg += "<text x=\"" + detail::fmt(x0 - 6.0) + "\" y=\"" +
             detail::fmt(y0 + u * (y1 - y0) + 4.0) +
             "\" text-anchor=\"end\">" + lbl + "</text>\n";
    }

    if (fig.h_line) {
      svg += "<line x1=\"" + detail::fmt(x0) + "\" y1=\"" +
             detail::fmt(py(*fig.h_line)) + "\" x2=\"" + detail::fmt(x1) +
             "\" y2=\"" + detail::fmt(py(*fig.h_line)) +
             "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
    }

    for (const auto& s : fig.series) {
      if (!s.points_only && s.x.size() > 1) {
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (ax.log && !(s.x[i] > 0)) continue;
          if (ay.log && !(s.y[i] > 0)) continue;
          pts += detail::fmt(px(s.x[i])) + "," + detail::fmt(py(s.y[i])) + " ";
        }
        svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
               s.color + "\" stroke-width=\"1.2\"/>\n";
      } else {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (ax.log && !(s.x[i] > 0)) continue;
          if (ay.log && !(s.y[i] > 0)) continue;
          svg += "<circle cx=\"" + detail::fmt(px(s.x[i])) + "\" cy=\"" +
                 detail::fmt(py(s.y[i])) + "\" r=\"2.4\" fill=\"" + s.color +
                 "\"/>\n";
        }
      }
    }
  }
  svg += "</svg>\n";

  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;

  nlohmann::json all = nlohmann::json::array();
  for (const auto& fig : panels) all.push_back(figure_to_json(fig));
  auto data_path = path;
  data_path += ".json";
  std::ofstream jout(data_path, std::ios::binary);
  if (!jout) throw IoError("cannot write " + data_path.string());
  jout << all.dump(2) << "\n";
}

}  // namespace qlab::plot
