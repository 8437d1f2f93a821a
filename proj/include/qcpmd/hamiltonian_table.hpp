#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "qcpmd/error.hpp"
#include "qcpmd/pauli.hpp"

namespace qcpmd {

/// Natural cubic spline through (x_i, y_i); second derivative zero at both ends.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("spline needs matching x/y with >= 2 points");
    m_.assign(n, 0.0);
    if (n == 2) return;
    // Tridiagonal system for interior second derivatives (Thomas algorithm).
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
      const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
      const double denom = b - a * c[i - 1];
      c[i] = cc / denom;
      d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
  }

  double operator()(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double b = (x - x_[i]) / h, a = 1.0 - b;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

  double derivative(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double b = (x - x_[i]) / h, a = 1.0 - b;
    return (y_[i + 1] - y_[i]) / h + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
  }

 private:
  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
  }

  std::vector<double> x_, y_, m_;
};

/// Pauli coefficients of H(R) tabulated over bond length, one spline per word.
class HamiltonianTable {
 public:
  HamiltonianTable(std::vector<PauliWord> words, std::vector<double> grid, std::vector<std::vector<double>> rows)
      : words_(std::move(words)), grid_(std::move(grid)), rows_(std::move(rows)) {
    if (words_.empty()) throw parse_error("table has no Pauli columns", 0);
    if (grid_.size() < 4) throw parse_error("table needs at least 4 grid points for cubic interpolation", 0);
    if (rows_.size() != grid_.size()) throw parse_error("row count differs from grid size", 0);
    for (std::size_t i = 1; i < grid_.size(); ++i)
      if (!(grid_[i] > grid_[i - 1]))
        throw parse_error("grid is not strictly increasing at R=" + std::to_string(grid_[i]), 0);
    for (const auto& w : words_)
      if (w.num_qubits() != words_.front().num_qubits()) throw parse_error("Pauli labels differ in length", 0);
    for (const auto& r : rows_)
      if (r.size() != words_.size()) throw parse_error("row has the wrong number of coefficients", 0);
    splines_.reserve(words_.size());
    for (std::size_t j = 0; j < words_.size(); ++j) {
      std::vector<double> col(grid_.size());
      for (std::size_t i = 0; i < grid_.size(); ++i) col[i] = rows_[i][j];
      splines_.emplace_back(grid_, std::move(col));
    }
  }

  const std::vector<PauliWord>& words() const { return words_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::size_t num_qubits() const { return words_.front().num_qubits(); }
  double min_r() const { return grid_.front(); }
  double max_r() const { return grid_.back(); }

  /// Words other than the identity; the number of circuits direct measurement needs.
  std::size_t non_identity_words() const {
    return static_cast<std::size_t>(std::count_if(words_.begin(), words_.end(), [](const PauliWord& w) {
      return !w.is_identity();
    }));
  }

  void check_range(double r) const {
    if (!(r >= min_r() && r <= max_r())) throw range_error(r, min_r(), max_r());
  }

  std::vector<double> coefficients_at(double r) const {
    check_range(r);
    std::vector<double> c(words_.size());
    for (std::size_t j = 0; j < words_.size(); ++j) c[j] = splines_[j](r);
    return c;
  }

  /// Analytic derivative of the interpolant, Ha/Angstrom.
  std::vector<double> coefficient_derivatives_at(double r) const {
    check_range(r);
    std::vector<double> c(words_.size());
    for (std::size_t j = 0; j < words_.size(); ++j) c[j] = splines_[j].derivative(r);
    return c;
  }

 private:
  std::vector<PauliWord> words_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> rows_;
  std::vector<NaturalCubicSpline> splines_;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) throw parse_error("not a number: '" + s + "'", line);
  return v;
}

}  // namespace detail

/// Parses the CSV table format: optional leading '#' comment lines, a header
/// `R_angstrom,<label>,...`, then one row of coefficients per grid point.
inline HamiltonianTable parse_table(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<PauliWord> words;
  bool have_header = false;
  std::vector<double> grid;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line.front() == '#') continue;
      const auto fields = detail::split_csv(line);
      if (fields.empty() || fields.front() != "R_angstrom")
        throw parse_error("header must start with R_angstrom", lineno);
      if (fields.size() < 2) throw parse_error("header names no Pauli words", lineno);
      for (std::size_t j = 1; j < fields.size(); ++j) {
        try {
          words.push_back(PauliWord::from_label(fields[j]));
        } catch (const std::invalid_argument& e) {
          throw parse_error("bad Pauli label '" + fields[j] + "'", lineno);
        }
        if (words.back().num_qubits() != words.front().num_qubits())
          throw parse_error("Pauli labels differ in length", lineno);
        for (std::size_t k = 0; k + 1 < words.size(); ++k)
          if (words[k] == words.back()) throw parse_error("duplicate Pauli label " + fields[j], lineno);
      }
      have_header = true;
      continue;
    }
    const auto fields = detail::split_csv(line);
    if (fields.size() != words.size() + 1)
      throw parse_error("expected " + std::to_string(words.size() + 1) + " fields, found " +
                            std::to_string(fields.size()),
                        lineno);
    const double r = detail::parse_number(fields[0], lineno);
    if (!grid.empty() && r == grid.back()) throw parse_error("duplicate grid point", lineno);
    if (!grid.empty() && r < grid.back()) throw parse_error("grid is not strictly increasing", lineno);
    grid.push_back(r);
    std::vector<double> row(words.size());
    for (std::size_t j = 0; j < words.size(); ++j) row[j] = detail::parse_number(fields[j + 1], lineno);
    rows.push_back(std::move(row));
  }
  if (!have_header) throw parse_error("empty table", lineno);
  return HamiltonianTable(std::move(words), std::move(grid), std::move(rows));
}

inline HamiltonianTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path, 0);
  return parse_table(in);
}

/// H(R) with every coefficient interpolated at R; word order follows the table.
inline Observable hamiltonian_at(const HamiltonianTable& table, double r) {
  const auto c = table.coefficients_at(r);
  Observable h(table.num_qubits());
  for (std::size_t j = 0; j < c.size(); ++j) h.add(c[j], table.words()[j]);
  return h;
}

/// Central difference dH/dR = (H(R+d) - H(R-d)) / 2d, Ha/Angstrom. The force
/// on the bond coordinate is minus its expectation.
inline Observable force_observable(const HamiltonianTable& table, double r, double d) {
  if (!(d > 0.0)) throw config_error("finite-difference step must be positive");
  table.check_range(r);
  table.check_range(r - d);
  table.check_range(r + d);
  const auto plus = table.coefficients_at(r + d);
  const auto minus = table.coefficients_at(r - d);
  Observable f(table.num_qubits());
  for (std::size_t j = 0; j < plus.size(); ++j) f.add((plus[j] - minus[j]) / (2.0 * d), table.words()[j]);
  return f;
}

}  // namespace qcpmd
