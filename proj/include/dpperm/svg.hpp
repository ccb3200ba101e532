// Copyright 2026 The dpperm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPPERM_SVG_HPP_
#define DPPERM_SVG_HPP_

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpperm {

// Minimal static SVG 1.1 multi-line chart: one polyline per named series over
// categorical x positions, with axis labels and a legend.
struct SvgSeries {
  std::string name;
  std::vector<double> values;  // one per x tick; NaN breaks the line
};

inline void write_svg_chart(const std::string& path,
                            const std::vector<std::string>& x_labels,
                            const std::vector<SvgSeries>& series,
                            const std::string& x_title,
                            const std::string& y_title) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double width = 640, height = 420;
  const double left = 70, right = 160, top = 30, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const std::size_t ticks = x_labels.size();

  const auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  const auto x_pos = [&](std::size_t i) {
    return ticks <= 1 ? left + plot_w / 2
                      : left + plot_w * static_cast<double>(i) /
                                   static_cast<double>(ticks - 1);
  };
  const auto y_pos = [&](double v) { return top + plot_h * (1.0 - v); };

  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  file << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
       << height << "\">\n";
  file << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes and gridlines at 0, 0.25, ..., 1
  for (int g = 0; g <= 4; ++g) {
    const double v = 0.25 * g;
    const double y = y_pos(v);
    file << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\""
         << left + plot_w << "\" y2=\"" << y
         << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    file << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
         << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(v)
         << "</text>\n";
  }
  file << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
       << "\" y2=\"" << top + plot_h
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  file << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
       << left + plot_w << "\" y2=\"" << top + plot_h
       << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (std::size_t i = 0; i < ticks; ++i) {
    file << "<text x=\"" << x_pos(i) << "\" y=\"" << top + plot_h + 18
         << "\" text-anchor=\"middle\" font-size=\"12\">" << x_labels[i]
         << "</text>\n";
  }
  file << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
       << "\" text-anchor=\"middle\" font-size=\"13\">" << x_title
       << "</text>\n";
  file << "<text x=\"18\" y=\"" << top + plot_h / 2
       << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 "
          "18 "
       << top + plot_h / 2 << ")\">" << y_title << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
    std::string points;
    for (std::size_t i = 0; i < series[s].values.size() && i < ticks; ++i) {
      const double v = series[s].values[i];
      if (v != v) continue;  // skip NaN cells
      points += fmt(x_pos(i)) + "," + fmt(y_pos(v)) + " ";
    }
    file << "<polyline fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(s);
    file << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly
         << "\" x2=\"" << left + plot_w + 34 << "\" y2=\"" << ly
         << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    file << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly + 4
         << "\" font-size=\"12\">" << series[s].name << "</text>\n";
  }
  file << "</svg>\n";
}

}  // namespace dpperm

#endif  // DPPERM_SVG_HPP_
