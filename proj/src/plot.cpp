#include "ticketgan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tg {

bool CsvTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::invalid_argument("no such column: " + name);
  const std::size_t j = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open csv: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty csv: " + path);
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::vector<double> row;
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.columns.size())
      throw std::runtime_error("ragged csv row in " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b"};

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
  const double w = 640, h = 420, ml = 70, mr = 130, mt = 45, mb = 55;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad; ymax += pad;

  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  const auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
     << h << "' font-family='sans-serif' font-size='12'>\n"
     << "<rect width='100%' height='100%' fill='white'/>\n"
     << "<text x='" << w / 2 << "' y='22' text-anchor='middle' font-size='15'>"
     << title << "</text>\n";
  // axes
  os << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr
     << "' y2='" << h - mb << "' stroke='black'/>\n"
     << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
     << h - mb << "' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x='" << px(xv) << "' y='" << h - mb + 18
       << "' text-anchor='middle'>" << std::round(xv * 100) / 100 << "</text>\n"
       << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
       << "' text-anchor='end'>" << std::round(yv * 1000) / 1000 << "</text>\n"
       << "<line x1='" << ml << "' y1='" << py(yv) << "' x2='" << w - mr
       << "' y2='" << py(yv) << "' stroke='#eeeeee'/>\n";
  }
  os << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
     << "' text-anchor='middle'>" << x_label << "</text>\n"
     << "<text x='18' y='" << (mt + h - mb) / 2
     << "' text-anchor='middle' transform='rotate(-90 18 "
     << (mt + h - mb) / 2 << ")'>" << y_label << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < series[s].x.size(); ++i)
      os << px(series[s].x[i]) << "," << py(series[s].y[i]) << " ";
    os << "'/>\n";
    const double ly = mt + 16.0 * static_cast<double>(s);
    os << "<line x1='" << w - mr + 10 << "' y1='" << ly << "' x2='"
       << w - mr + 34 << "' y2='" << ly << "' stroke='" << color
       << "' stroke-width='2'/>\n"
       << "<text x='" << w - mr + 38 << "' y='" << ly + 4 << "'>"
       << series[s].label << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) throw std::runtime_error("failed writing chart: " + path);
}

}  // namespace tg
