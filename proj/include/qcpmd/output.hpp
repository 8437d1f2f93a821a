#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qcpmd/dynamics.hpp"
#include "qcpmd/error.hpp"

namespace qcpmd {

/// Fixed-format number for text outputs; locale independent.
inline std::string format_number(double x, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline constexpr const char* trajectory_csv_header =
    "step,time_fs,R_angstrom,v_angstrom_per_fs,force_ha_per_angstrom,energy_ha,preparations";

inline void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  out << trajectory_csv_header << '\n';
  for (const auto& r : records)
    out << r.step << ',' << format_number(r.time) << ',' << format_number(r.r) << ',' << format_number(r.v) << ','
        << format_number(r.force) << ',' << format_number(r.energy) << ',' << r.preparations << '\n';
}

/// Mean R over trials, step by step; trials that ended early drop out.
inline void write_mean_trajectory_csv(std::ostream& out, const std::vector<const Trajectory*>& trials) {
  out << "step,time_fs,R_mean_angstrom,trials\n";
  std::size_t longest = 0;
  for (const auto* t : trials) longest = std::max(longest, t->records.size());
  for (std::size_t i = 0; i < longest; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    const TrajectoryRecord* any = nullptr;
    for (const auto* t : trials) {
      if (i >= t->records.size()) continue;
      sum += t->records[i].r;
      any = &t->records[i];
      ++n;
    }
    out << any->step << ',' << format_number(any->time) << ',' << format_number(sum / static_cast<double>(n)) << ','
        << n << '\n';
  }
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct SvgSeries {
  std::string label;
  std::vector<double> values;  // histogram samples, or y values
  std::vector<double> x;       // line plots only
};

namespace detail {

inline const char* series_color(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  return colors[i % 7];
}

struct Frame {
  double left = 70, right = 20, top = 30, bottom = 50, width = 720, height = 420;
  double x0, x1, y0, y1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline void svg_axes(std::ostringstream& s, const Frame& f, double xtick, double ytick, const std::string& xlabel,
                     const std::string& ylabel) {
  s << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width - f.left - f.right
    << "\" height=\"" << f.height - f.top - f.bottom << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (double x = std::ceil(f.x0 / xtick - 1e-9) * xtick; x <= f.x1 + 1e-9; x += xtick)
    s << "<line x1=\"" << format_number(f.px(x), 6) << "\" y1=\"" << f.height - f.bottom << "\" x2=\""
      << format_number(f.px(x), 6) << "\" y2=\"" << f.height - f.bottom + 5 << "\" stroke=\"#000\"/>"
      << "<text x=\"" << format_number(f.px(x), 6) << "\" y=\"" << f.height - f.bottom + 18
      << "\" font-size=\"11\" text-anchor=\"middle\">" << format_number(x, 4) << "</text>\n";
  for (double y = std::ceil(f.y0 / ytick - 1e-9) * ytick; y <= f.y1 + 1e-9; y += ytick)
    s << "<line x1=\"" << f.left - 5 << "\" y1=\"" << format_number(f.py(y), 6) << "\" x2=\"" << f.left
      << "\" y2=\"" << format_number(f.py(y), 6) << "\" stroke=\"#000\"/>"
      << "<text x=\"" << f.left - 8 << "\" y=\"" << format_number(f.py(y) + 4, 6)
      << "\" font-size=\"11\" text-anchor=\"end\">" << format_number(y, 4) << "</text>\n";
  s << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 10
    << "\" font-size=\"13\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  s << "<text x=\"16\" y=\"" << (f.top + f.height - f.bottom) / 2 << "\" font-size=\"13\" text-anchor=\"middle\""
    << " transform=\"rotate(-90 16 " << (f.top + f.height - f.bottom) / 2 << ")\">" << ylabel << "</text>\n";
}

inline double nice_tick(double span) {
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace detail

inline constexpr double histogram_lo = 0.6;
inline constexpr double histogram_hi = 1.2;
inline constexpr double histogram_bin = 0.002;

/// Bin counts over [0.6, 1.2) Angstrom with 0.002 Angstrom bins. Samples
/// outside the range are counted in `outside`.
struct Histogram {
  std::vector<std::size_t> counts;
  std::size_t outside = 0;
  std::size_t total = 0;
};

inline Histogram make_histogram(const std::vector<double>& samples) {
  const auto bins = static_cast<std::size_t>(std::llround((histogram_hi - histogram_lo) / histogram_bin));
  Histogram h{std::vector<std::size_t>(bins, 0), 0, samples.size()};
  for (double x : samples) {
    const double pos = std::floor((x - histogram_lo) / histogram_bin);
    if (pos < 0.0 || pos >= static_cast<double>(bins)) {
      ++h.outside;
      continue;
    }
    ++h.counts[static_cast<std::size_t>(pos)];
  }
  return h;
}

/// Overlaid normalized histograms of bond-length samples.
inline std::string histogram_svg(const std::vector<SvgSeries>& series, const std::string& title) {
  std::vector<Histogram> hists;
  double peak = 0.0;
  for (const auto& s : series) {
    hists.push_back(make_histogram(s.values));
    for (auto c : hists.back().counts)
      peak = std::max(peak, hists.back().total ? static_cast<double>(c) / static_cast<double>(hists.back().total) : 0.0);
  }
  if (peak <= 0.0) peak = 1.0;
  detail::Frame f;
  f.x0 = histogram_lo;
  f.x1 = histogram_hi;
  f.y0 = 0.0;
  f.y1 = peak * 1.1;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  s << "<text x=\"" << f.width / 2 << "\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">" << title << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& h = hists[k];
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      if (h.counts[b] == 0) continue;
      const double frac = static_cast<double>(h.counts[b]) / static_cast<double>(h.total);
      const double xa = f.px(histogram_lo + static_cast<double>(b) * histogram_bin);
      const double xb = f.px(histogram_lo + static_cast<double>(b + 1) * histogram_bin);
      s << "<rect x=\"" << format_number(xa, 6) << "\" y=\"" << format_number(f.py(frac), 6) << "\" width=\""
        << format_number(xb - xa, 6) << "\" height=\"" << format_number(f.py(0.0) - f.py(frac), 6) << "\" fill=\""
        << detail::series_color(k) << "\" fill-opacity=\"0.5\"/>\n";
    }
    s << "<text x=\"" << f.width - f.right - 10 << "\" y=\"" << f.top + 18 + 16 * static_cast<double>(k)
      << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << detail::series_color(k) << "\">" << series[k].label
      << " (n=" << h.total << ", outside=" << h.outside << ")</text>\n";
  }
  detail::svg_axes(s, f, 0.1, detail::nice_tick(f.y1), "R (Angstrom)", "fraction per 0.002 Angstrom bin");
  s << "</svg>\n";
  return s.str();
}

/// Line plot of R(t); long series are thinned to at most 2000 points.
inline std::string trajectory_svg(const std::vector<SvgSeries>& series, const std::string& title) {
  detail::Frame f;
  f.x0 = 0.0;
  f.x1 = 1.0;
  f.y0 = histogram_lo;
  f.y1 = histogram_hi;
  for (const auto& s : series) {
    for (double x : s.x) f.x1 = std::max(f.x1, x);
    for (double y : s.values) {
      if (!std::isfinite(y)) continue;
      f.y0 = std::min(f.y0, y);
      f.y1 = std::max(f.y1, y);
    }
  }
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  s << "<text x=\"" << f.width / 2 << "\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">" << title << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    const std::size_t n = std::min(ser.x.size(), ser.values.size());
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    s << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << detail::series_color(k) << "\" points=\"";
    for (std::size_t i = 0; i < n; i += stride)
      s << format_number(f.px(ser.x[i]), 6) << ',' << format_number(f.py(ser.values[i]), 6) << ' ';
    s << "\"/>\n";
    s << "<text x=\"" << f.width - f.right - 10 << "\" y=\"" << f.top + 18 + 16 * static_cast<double>(k)
      << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << detail::series_color(k) << "\">" << ser.label
      << "</text>\n";
  }
  detail::svg_axes(s, f, detail::nice_tick(f.x1 - f.x0), detail::nice_tick(f.y1 - f.y0), "time (fs)",
                   "R (Angstrom)");
  s << "</svg>\n";
  return s.str();
}

}  // namespace qcpmd
