#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "qcpmd/qcpmd.hpp"

namespace qcpmd::testing {

inline const HamiltonianTable& fixture() {
  static const HamiltonianTable table = load_table(QCPMD_DEFAULT_TABLE);
  return table;
}

inline StateVector random_state(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g;
  std::vector<Complex> a(std::size_t{1} << n);
  for (auto& x : a) x = {g(rng), g(rng)};
  StateVector s(n, std::move(a));
  s.normalize();
  return s;
}

inline PauliWord random_word(std::size_t n, Rng& rng) {
  std::vector<PauliLetter> ops(n);
  for (auto& p : ops) p = static_cast<PauliLetter>(rng() % 4);
  return PauliWord(ops);
}

inline Observable random_observable(std::size_t n, std::size_t terms, Rng& rng) {
  Observable o(n);
  for (std::size_t i = 0; i < terms; ++i) o.add(2.0 * uniform01(rng) - 1.0, random_word(n, rng));
  return o;
}

/// Table whose coefficients do not depend on R, so nuclear forces vanish.
inline HamiltonianTable flat_table() {
  std::vector<PauliWord> words{PauliWord::from_label("IIII"), PauliWord::from_label("IIIZ"),
                               PauliWord::from_label("ZZII")};
  std::vector<double> grid;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= 20; ++i) {
    grid.push_back(0.3 + 0.1 * i);
    rows.push_back({-0.5, 0.3, 0.2});
  }
  return HamiltonianTable(words, grid, rows);
}

inline double kinetic_energy(double v_angstrom_per_fs, double mass) {
  const double v_au = v_angstrom_per_fs * units::bohr_per_angstrom / units::au_time_per_fs;
  return 0.5 * mass * v_au * v_au;
}

}  // namespace qcpmd::testing
