#include "ispsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ispsim {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 930.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 540.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string gnum(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// largest of {1,2,5}*10^k not above `raw`
double nice_step(double raw) {
  if (raw <= 0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {5.0, 2.0, 1.0}) {
    if (mag * m <= raw) return mag * m;
  }
  return mag;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_accuracy_chart(const std::vector<PlotSeries>& series,
                                  const std::string& title) {
  double max_ms = 0.0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) max_ms = std::max(max_ms, x / 1e6);
  }
  if (max_ms <= 0.0) max_ms = 1.0;

  const auto sx = [&](double ms) { return kLeft + (kRight - kLeft) * (ms / max_ms); };
  const auto sy = [&](double acc) { return kBottom - (kBottom - kTop) * acc; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << gnum(kWidth) << "\" height=\""
      << gnum(kHeight) << "\" viewBox=\"0 0 " << gnum(kWidth) << ' ' << gnum(kHeight) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << escape(title) << "</text>\n";
  }

  // gridlines + ticks
  const double xstep = nice_step(max_ms / 5.0);
  for (double t = 0.0; t <= max_ms * 1.0001; t += xstep) {
    const double x = sx(t);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(kBottom) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(kBottom + 22)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << gnum(t)
        << "</text>\n";
  }
  for (int i = 0; i <= 10; ++i) {
    const double acc = i / 10.0;
    const double y = sy(acc);
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kRight)
        << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << gnum(acc)
        << "</text>\n";
  }

  // axes
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kBottom) << "\" x2=\"" << num(kRight)
      << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  out << "<text x=\"" << num((kLeft + kRight) / 2) << "\" y=\"" << num(kHeight - 20)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">simulated time "
         "(ms)</text>\n";
  out << "<text x=\"24\" y=\"" << num((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 24 "
      << num((kTop + kBottom) / 2) << ")\">test accuracy</text>\n";

  // series
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [x_ns, acc] : series[i].points) {
      if (!first) out << ' ';
      first = false;
      out << num(sx(x_ns / 1e6)) << ',' << num(sy(acc));
    }
    out << "\"/>\n";
  }

  // legend, input order
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    const double y = kTop + 18.0 * static_cast<double>(i) + 12.0;
    out << "<line x1=\"" << num(kLeft + 12) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(kLeft + 40) << "\" y2=\"" << num(y) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(kLeft + 46) << "\" y=\"" << num(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(series[i].label)
        << "</text>\n";
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace ispsim
