#pragma once

#include <string>
#include <vector>

namespace ispsim {

// Accuracy-vs-simulated-time line chart, emitted as self-contained SVG.
// Output is a pure function of the inputs (fixed-precision formatting, no
// timestamps), so identical inputs give byte-identical files.
struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (sim time in ns, accuracy)
};

std::string render_accuracy_chart(const std::vector<PlotSeries>& series,
                                  const std::string& title);

}  // namespace ispsim
