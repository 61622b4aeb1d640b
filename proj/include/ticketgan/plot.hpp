#pragma once

#include <map>
#include <string>
#include <vector>

namespace tg {

// Minimal CSV table: first line is the header, numeric cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Static SVG line chart; one polyline per series with a small legend.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

}  // namespace tg
