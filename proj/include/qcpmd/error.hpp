#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qcpmd {

/// Qubit-count or vector-length mismatch between arguments.
class dimension_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested dense object is too large for the oracle paths.
class capacity_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Invalid run or estimator configuration.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed Hamiltonian table. `line()` is 1-based, 0 when not tied to a line.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Bond length outside the tabulated interval.
class range_error : public std::out_of_range {
 public:
  range_error(double value, double lo, double hi)
      : std::out_of_range("bond length " + std::to_string(value) + " outside [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "]"),
        value_(value), lo_(lo), hi_(hi) {}
  double value() const noexcept { return value_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }

 private:
  double value_, lo_, hi_;
};

/// VQE did not reach the requested gradient tolerance or ground-energy gap.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, std::vector<double> best_theta, double energy_gap)
      : std::runtime_error(what), best_theta_(std::move(best_theta)), energy_gap_(energy_gap) {}
  const std::vector<double>& best_theta() const noexcept { return best_theta_; }
  double energy_gap() const noexcept { return energy_gap_; }

 private:
  std::vector<double> best_theta_;
  double energy_gap_;
};

}  // namespace qcpmd
