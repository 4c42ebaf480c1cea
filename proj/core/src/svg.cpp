#include "praim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "praim/common.hpp"

namespace praim::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 600.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 360.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void widen(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

Range padded(double lo, double hi) {
  if (lo > hi) return {0.0, 1.0};
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

// Largest "nice" step (1/2/5 times a power of ten) giving at most six ticks.
double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  double step = 10.0;
  if (frac <= 1.0) step = 1.0;
  else if (frac <= 2.0) step = 2.0;
  else if (frac <= 5.0) step = 5.0;
  return step * mag;
}

std::vector<double> ticks(const Range& r) {
  std::vector<double> out;
  const double step = nice_step(r.hi - r.lo);
  double t = std::ceil(r.lo / step) * step;
  for (; t <= r.hi + step * 1e-9; t += step) {
    out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return out;
}

double map_x(double v, const Range& r) {
  return kLeft + (v - r.lo) / (r.hi - r.lo) * (kRight - kLeft);
}

double map_y(double v, const Range& r) {
  return kBottom - (v - r.lo) / (r.hi - r.lo) * (kBottom - kTop);
}

void open_document(std::string& svg) {
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) +
         " " + num(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void draw_frame(std::string& svg, const std::string& title,
                const std::string& x_label, const std::string& y_label) {
  svg += "<text x=\"" + num((kLeft + kRight) / 2) +
         "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\">" +
         escape(title) + "</text>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kBottom) + "\" x2=\"" +
         num(kRight) + "\" y2=\"" + num(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"" +
         num(kHeight - 12.0) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num((kTop + kBottom) / 2) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num((kTop + kBottom) / 2) + ")\">" +
         escape(y_label) + "</text>\n";
}

void draw_y_ticks(std::string& svg, const Range& ry) {
  for (const double t : ticks(ry)) {
    const double y = map_y(t, ry);
    svg += "<line x1=\"" + num(kLeft - 4.0) + "\" y1=\"" + num(y) +
           "\" x2=\"" + num(kRight) + "\" y2=\"" + num(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(kLeft - 8.0) + "\" y=\"" + num(y + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\">" +
           num(t) + "</text>\n";
  }
}

void draw_legend(std::string& svg,
                 const std::vector<std::string>& labels) {
  double y = kTop + 6.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    svg += "<rect x=\"" + num(kRight - 150.0) + "\" y=\"" + num(y - 9.0) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + num(kRight - 133.0) + "\" y=\"" + num(y + 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape(labels[i]) + "</text>\n";
    y += 16.0;
  }
}

}  // namespace

std::string line_chart(const std::vector<Series>& series,
                       const LineChartOptions& options) {
  Range rx{std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  Range ry = rx;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size()) {
      throw ValidationError("series '" + s.label + "' x/y length mismatch");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      rx.widen(s.x[i]);
      ry.widen(s.y[i]);
    }
  }
  if (rx.lo > rx.hi) rx = {0.0, 1.0};
  if (ry.lo > ry.hi) ry = {0.0, 1.0};
  if (options.diagonal) {
    const double lo = std::min(rx.lo, ry.lo);
    const double hi = std::max(rx.hi, ry.hi);
    rx = {lo, hi};
    ry = {lo, hi};
  }
  rx = padded(rx.lo, rx.hi);
  ry = padded(ry.lo, ry.hi);

  std::string svg;
  open_document(svg);
  draw_y_ticks(svg, ry);
  for (const double t : ticks(rx)) {
    const double x = map_x(t, rx);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(kBottom) + "\" x2=\"" +
           num(x) + "\" y2=\"" + num(kBottom + 4.0) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kBottom + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">" +
           num(t) + "</text>\n";
  }
  if (options.diagonal) {
    svg += "<line x1=\"" + num(map_x(rx.lo, rx)) + "\" y1=\"" +
           num(map_y(rx.lo, ry)) + "\" x2=\"" + num(map_x(rx.hi, rx)) +
           "\" y2=\"" + num(map_y(rx.hi, ry)) +
           "\" stroke=\"#999999\" stroke-width=\"1\" "
           "stroke-dasharray=\"4 3\"/>\n";
  }
  std::vector<std::string> labels;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    labels.push_back(s.label);
    const char* color = kPalette[si % kPaletteSize];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += num(map_x(s.x[i], rx)) + "," + num(map_y(s.y[i], ry));
      if (options.markers) {
        svg += "<circle cx=\"" + num(map_x(s.x[i], rx)) + "\" cy=\"" +
               num(map_y(s.y[i], ry)) + "\" r=\"2.5\" fill=\"" + color +
               "\"/>\n";
      }
    }
    if (!points.empty()) {
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
  }
  draw_frame(svg, options.title, options.x_label, options.y_label);
  if (series.size() > 1) draw_legend(svg, labels);
  svg += "</svg>\n";
  return svg;
}

std::string bar_chart(const GroupedBars& bars, const std::string& title,
                      const std::string& x_label, const std::string& y_label) {
  for (const auto& [label, values] : bars.groups) {
    if (values.size() != bars.categories.size()) {
      throw ValidationError("bar group '" + label +
                            "' does not cover every category");
    }
  }
  Range ry{0.0, 0.0};
  for (const auto& [label, values] : bars.groups) {
    for (const double v : values) ry.widen(v);
  }
  ry = padded(std::min(0.0, ry.lo), std::max(ry.hi, 1e-12));

  std::string svg;
  open_document(svg);
  draw_y_ticks(svg, ry);

  const std::size_t n_cat = bars.categories.size();
  const std::size_t n_grp = std::max<std::size_t>(bars.groups.size(), 1);
  const double slot = (kRight - kLeft) / std::max<std::size_t>(n_cat, 1);
  const double bar_w = slot * 0.8 / static_cast<double>(n_grp);
  const double base_y = map_y(std::max(0.0, ry.lo), ry);

  std::vector<std::string> labels;
  for (std::size_t gi = 0; gi < bars.groups.size(); ++gi) {
    labels.push_back(bars.groups[gi].first);
    const char* color = kPalette[gi % kPaletteSize];
    for (std::size_t ci = 0; ci < n_cat; ++ci) {
      const double v = bars.groups[gi].second[ci];
      if (!std::isfinite(v)) continue;
      const double x = kLeft + slot * (static_cast<double>(ci) + 0.1) +
                       bar_w * static_cast<double>(gi);
      const double y = map_y(v, ry);
      const double top = std::min(y, base_y);
      const double h = std::abs(base_y - y);
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(top) + "\" width=\"" +
             num(bar_w) + "\" height=\"" + num(h) + "\" fill=\"" + color +
             "\"/>\n";
    }
  }
  for (std::size_t ci = 0; ci < n_cat; ++ci) {
    const double x = kLeft + slot * (static_cast<double>(ci) + 0.5);
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kBottom + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">" +
           escape(bars.categories[ci]) + "</text>\n";
  }
  draw_frame(svg, title, x_label, y_label);
  if (bars.groups.size() > 1) draw_legend(svg, labels);
  svg += "</svg>\n";
  return svg;
}

}  // namespace praim::plot
