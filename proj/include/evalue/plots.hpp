#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "evalue/common.hpp"
#include "evalue/io.hpp"

namespace evalue {
namespace plots {

// Silverman's rule-of-thumb bandwidth.
inline double silverman_bandwidth(std::vector<double> v) {
  const auto n = v.size();
  if (n < 2) return 0.1;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ssq = 0.0;
  for (double x : v) ssq += (x - mean) * (x - mean);
  const double sd = std::sqrt(ssq / static_cast<double>(n - 1));
  std::sort(v.begin(), v.end());
  const double iqr = v[static_cast<std::size_t>(0.75 * (n - 1))] -
                     v[static_cast<std::size_t>(0.25 * (n - 1))];
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, 1e-6);
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

inline std::vector<double> gaussian_kde(const std::vector<double>& values,
                                        const std::vector<double>& grid) {
  const double bw = silverman_bandwidth(values);
  const double norm =
      1.0 / (static_cast<double>(values.size()) * bw * std::sqrt(2.0 * M_PI));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double x : values) {
      const double z = (grid[g] - x) / bw;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = acc * norm;
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool highlight = false;
};

// Minimal line-plot SVG writer.
inline void write_line_svg(const std::string& path,
                           const std::vector<Series>& series,
                           const std::string& x_label,
                           const std::string& y_label) {
  const int width = 760, height = 460, margin = 55;
  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n"
      << "<text x=\"16\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << height / 2 << ")\">" << y_label << "</text>\n";
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\""
        << (s.highlight ? "crimson" : "#9090a0") << "\" stroke-width=\""
        << (s.highlight ? 2.0 : 0.8) << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

// Per-SNP 1-e-value scatter by position with the selection cutoff line.
inline void write_evalue_svg(const std::string& path,
                             const std::vector<std::string>& snp_ids,
                             const std::vector<double>& one_minus_evalues,
                             const std::vector<bool>& selected, double cutoff) {
  const int width = 760, height = 460, margin = 55;
  const auto p = snp_ids.size();
  auto px = [&](double i) {
    return margin +
           i / std::max<double>(1.0, static_cast<double>(p - 1)) *
               (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - y * (height - 2 * margin);
  };
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
      << width - margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">SNP position</text>\n"
      << "<text x=\"16\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << height / 2 << ")\">1 - e-value</text>\n"
      << "<line x1=\"" << margin << "\" y1=\"" << py(cutoff) << "\" x2=\""
      << width - margin << "\" y2=\"" << py(cutoff)
      << "\" stroke=\"crimson\" stroke-dasharray=\"6,4\"/>\n";
  for (std::size_t j = 0; j < p; ++j) {
    const double y = std::clamp(one_minus_evalues[j], 0.0, 1.0);
    out << "<circle cx=\"" << px(static_cast<double>(j)) << "\" cy=\"" << py(y)
        << "\" r=\"4\" fill=\"" << (selected[j] ? "crimson" : "#5577aa")
        << "\"/>\n";
  }
  out << "</svg>\n";
}

// Reads run_select output and emits density CSV + SVG overlays plus the
// per-SNP 1-e-value scatter.
inline void emit_plots(const std::string& in_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const fs::path dist_path = fs::path(in_dir) / "distributions.csv";
  if (!fs::exists(dist_path))
    throw ValidationError(
        dist_path.string() +
        " not found; rerun `select` with --dump-distributions to produce it");
  const io::CsvTable dist = io::read_csv(dist_path.string());
  std::map<std::string, std::vector<double>> groups;
  std::vector<std::string> group_order;
  for (std::size_t r = 0; r < dist.rows.size(); ++r) {
    const std::string& label = dist.rows[r][0];
    if (!groups.count(label)) group_order.push_back(label);
    groups[label].push_back(io::parse_double(dist, r, 2));
  }
  if (groups.empty()) throw ValidationError(dist_path.string() + ": no rows");

  const int grid_n = 200;
  std::vector<double> grid(grid_n);
  for (int g = 0; g < grid_n; ++g)
    grid[static_cast<std::size_t>(g)] = static_cast<double>(g) / (grid_n - 1);

  std::ofstream denf(fs::path(out_dir) / "densities.csv");
  denf << "score";
  for (const auto& label : group_order) denf << "," << label;
  denf << "\n";
  std::vector<Series> series;
  std::map<std::string, std::vector<double>> dens;
  for (const auto& label : group_order)
    dens[label] = gaussian_kde(groups[label], grid);
  for (int g = 0; g < grid_n; ++g) {
    denf << io::format_double(grid[static_cast<std::size_t>(g)]);
    for (const auto& label : group_order)
      denf << "," << io::format_double(dens[label][static_cast<std::size_t>(g)]);
    denf << "\n";
  }
  for (const auto& label : group_order) {
    Series s;
    s.label = label;
    s.x = grid;
    s.y = dens[label];
    s.highlight = (label == "full");
    series.push_back(std::move(s));
  }
  write_line_svg((fs::path(out_dir) / "densities.svg").string(), series,
                 "evaluation score", "density");

  // scatter from the per-SNP report at the largest q
  const io::CsvTable rep =
      io::read_csv((fs::path(in_dir) / "snp_report.csv").string());
  std::size_t qcol = rep.header.size();
  for (std::size_t c = 0; c < rep.header.size(); ++c)
    if (rep.header[c].rfind("evalue_q", 0) == 0) qcol = c;  // last one wins
  std::size_t selcol = rep.header.size();
  for (std::size_t c = 0; c < rep.header.size(); ++c)
    if (rep.header[c] == "selected") selcol = c;
  if (qcol >= rep.header.size() || selcol >= rep.header.size())
    throw ValidationError("snp_report.csv: missing e-value or selected column");

  std::vector<std::string> ids;
  std::vector<double> one_minus;
  std::vector<bool> selected;
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    ids.push_back(rep.rows[r][0]);
    one_minus.push_back(1.0 - io::parse_double(rep, r, qcol));
    selected.push_back(rep.rows[r][selcol] == "1");
  }

  const io::CsvTable summary =
      io::read_csv((fs::path(in_dir) / "selection_summary.csv").string());
  double cutoff = 0.0;
  const std::string want =
      "cutoff_" + rep.header[qcol].substr(std::string("evalue_").size());
  for (std::size_t r = 0; r < summary.rows.size(); ++r)
    if (summary.rows[r][0] == want)
      cutoff = 1.0 - io::parse_double(summary, r, 1);
  write_evalue_svg((fs::path(out_dir) / "evalues.svg").string(), ids, one_minus,
                   selected, cutoff);
}

}  // namespace plots
}  // namespace evalue
