#pragma once

#include <bit>
#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "qcpmd/error.hpp"
#include "qcpmd/pauli.hpp"
#include "qcpmd/statevector.hpp"

namespace qcpmd {

/// <psi|P|psi> by applying the word to the amplitudes directly, O(2^n).
///
/// P|k> = i^{#Y} (-1)^{popcount(k & phase_mask)} |k ^ flip_mask>.
inline Complex pauli_expectation_complex(const StateVector& state, const PauliWord& word) {
  if (word.num_qubits() != state.num_qubits()) throw dimension_error("word and state qubit counts differ");
  const std::uint64_t flip = word.flip_mask(), phase = word.phase_mask();
  Complex acc{0.0, 0.0};
  const auto amps = state.amplitudes();
  for (std::uint64_t k = 0; k < amps.size(); ++k) {
    const Complex term = std::conj(amps[k ^ flip]) * amps[k];
    if (std::popcount(k & phase) & 1U)
      acc -= term;
    else
      acc += term;
  }
  static constexpr Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return acc * i_pow[word.y_count() % 4];
}

inline double pauli_expectation(const StateVector& state, const PauliWord& word) {
  return pauli_expectation_complex(state, word).real();
}

/// Sum_P c_P <psi|P|psi>. Imaginary residue from rounding is dropped.
inline double expectation_exact(const StateVector& state, const Observable& obs) {
  if (obs.num_qubits() != state.num_qubits()) throw dimension_error("observable and state qubit counts differ");
  double e = 0.0;
  for (const auto& t : obs.terms()) e += t.coefficient * pauli_expectation(state, t.word);
  return e;
}

inline Eigen::Matrix2cd pauli_matrix(PauliLetter p) {
  Eigen::Matrix2cd m;
  const Complex i{0.0, 1.0};
  switch (p) {
    case PauliLetter::I: m << 1, 0, 0, 1; break;
    case PauliLetter::X: m << 0, 1, 1, 0; break;
    case PauliLetter::Y: m << 0, -i, i, 0; break;
    case PauliLetter::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// Kronecker product of per-qubit factors, highest qubit leftmost so that
/// row/column index bit i is qubit i.
template <class FactorFn>
Eigen::MatrixXcd kron_over_qubits(std::size_t n, FactorFn&& factor) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (std::size_t q = n; q-- > 0;) {
    const Eigen::Matrix2cd f = factor(q);
    Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) next.block<2, 2>(2 * r, 2 * c) = m(r, c) * f;
    m = std::move(next);
  }
  return m;
}

inline Eigen::MatrixXcd to_dense(const PauliWord& word) {
  return kron_over_qubits(word.num_qubits(), [&](std::size_t q) { return pauli_matrix(word[q]); });
}

inline Eigen::MatrixXcd to_dense(const Observable& obs) {
  if (obs.num_qubits() > max_qubits) throw capacity_error("dense observables are limited to 12 qubits");
  const auto dim = Eigen::Index{1} << obs.num_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  // Fill directly from the Pauli action instead of forming each Kronecker product.
  for (const auto& t : obs.terms()) {
    const std::uint64_t flip = t.word.flip_mask(), phase = t.word.phase_mask();
    static constexpr Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex base = t.coefficient * i_pow[t.word.y_count() % 4];
    for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(dim); ++k) {
      const double sign = (std::popcount(k & phase) & 1U) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(k ^ flip), static_cast<Eigen::Index>(k)) += sign * base;
    }
  }
  return m;
}

inline Eigen::VectorXcd to_eigen(const StateVector& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dimension()));
  for (std::size_t k = 0; k < s.dimension(); ++k) v(static_cast<Eigen::Index>(k)) = s[k];
  return v;
}

struct GroundState {
  double energy;
  StateVector vector;
};

inline GroundState ground_state_exact(const Observable& obs) {
  const Eigen::MatrixXcd h = to_dense(obs);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  const Eigen::VectorXcd v = solver.eigenvectors().col(0);
  std::vector<Complex> amps(v.data(), v.data() + v.size());
  StateVector s(obs.num_qubits(), std::move(amps));
  s.normalize();
  return {solver.eigenvalues()(0), std::move(s)};
}

}  // namespace qcpmd
