#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcpmd/error.hpp"
#include "qcpmd/pauli.hpp"
#include "qcpmd/random.hpp"

namespace qcpmd {

using Complex = std::complex<double>;

inline constexpr std::size_t max_qubits = 12;

/// Computational-basis measurement result; bit i of `bits` is qubit i.
struct Bitstring {
  std::uint64_t bits = 0;
  std::size_t n = 0;

  bool operator[](std::size_t qubit) const { return (bits >> qubit) & 1U; }

  /// Most-significant qubit first, matching Pauli labels.
  std::string str() const {
    std::string s(n, '0');
    for (std::size_t i = 0; i < n; ++i)
      if ((*this)[i]) s[n - 1 - i] = '1';
    return s;
  }

  static Bitstring parse(std::string_view s) {
    if (s.empty() || s.size() > 64) throw std::invalid_argument("bitstring length must be 1..64");
    Bitstring b{0, s.size()};
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[s.size() - 1 - i];
      if (c != '0' && c != '1') throw std::invalid_argument("bitstring may only contain 0 and 1");
      if (c == '1') b.bits |= std::uint64_t{1} << i;
    }
    return b;
  }

  friend bool operator==(const Bitstring&, const Bitstring&) = default;
};

/// Dense amplitude vector; amplitude index bit i is qubit i.
class StateVector {
 public:
  explicit StateVector(std::size_t n) : n_(n), amps_(dimension_for(n), Complex{0.0, 0.0}) { amps_[0] = 1.0; }

  StateVector(std::size_t n, std::vector<Complex> amplitudes) : n_(n), amps_(std::move(amplitudes)) {
    if (amps_.size() != dimension_for(n)) throw dimension_error("amplitude count is not 2^n");
  }

  static StateVector basis_state(const Bitstring& b) {
    StateVector s(b.n);
    s.amps_[0] = 0.0;
    s.amps_[b.bits] = 1.0;
    return s;
  }

  std::size_t num_qubits() const { return n_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> amplitudes() { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[i]; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  void normalize() {
    const double nrm = norm();
    for (auto& a : amps_) a /= nrm;
  }

  // Gates. Each mutates this state in place.

  void apply_single(std::size_t q, const Complex (&u)[2][2]) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
      for (std::size_t k = base; k < base + stride; ++k) {
        const Complex a0 = amps_[k], a1 = amps_[k + stride];
        amps_[k] = u[0][0] * a0 + u[0][1] * a1;
        amps_[k + stride] = u[1][0] * a0 + u[1][1] * a1;
      }
    }
  }

  /// exp(-i theta P / 2) for a Pauli word P, using P^2 = I.
  void apply_pauli_rotation(const PauliWord& word, double theta) {
    if (word.num_qubits() != n_) throw dimension_error("rotation word and state qubit counts differ");
    const std::uint64_t flip = word.flip_mask(), phase = word.phase_mask();
    static constexpr Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex yphase = i_pow[word.y_count() % 4];
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const Complex minus_i_s{0.0, -s};
    std::vector<Complex> out(amps_.size());
    for (std::uint64_t k = 0; k < amps_.size(); ++k) {
      // P|k> = yphase * sign(k) |k ^ flip>
      const Complex pk = (std::popcount(k & phase) & 1U) ? -yphase : yphase;
      out[k ^ flip] += minus_i_s * pk * amps_[k];
      out[k] += c * amps_[k];
    }
    amps_ = std::move(out);
  }

  /// exp(-i theta Y / 2); real-valued.
  void apply_ry(std::size_t q, double theta) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
      for (std::size_t k = base; k < base + stride; ++k) {
        const Complex a0 = amps_[k], a1 = amps_[k + stride];
        amps_[k] = c * a0 - s * a1;
        amps_[k + stride] = s * a0 + c * a1;
      }
    }
  }

  void apply_h(std::size_t q) {
    static const double r = 1.0 / std::sqrt(2.0);
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
      for (std::size_t k = base; k < base + stride; ++k) {
        const Complex a0 = amps_[k], a1 = amps_[k + stride];
        amps_[k] = r * (a0 + a1);
        amps_[k + stride] = r * (a0 - a1);
      }
    }
  }

  /// S^dagger = diag(1, -i).
  void apply_sdg(std::size_t q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    for (std::size_t k = 0; k < amps_.size(); ++k)
      if (k & bit) amps_[k] = Complex{amps_[k].imag(), -amps_[k].real()};
  }

  void apply_x(std::size_t q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    for (std::size_t k = 0; k < amps_.size(); ++k)
      if (!(k & bit)) std::swap(amps_[k], amps_[k | bit]);
  }

  void apply_cnot(std::size_t control, std::size_t target) {
    const std::uint64_t cbit = std::uint64_t{1} << control, tbit = std::uint64_t{1} << target;
    for (std::size_t k = 0; k < amps_.size(); ++k)
      if ((k & cbit) && !(k & tbit)) std::swap(amps_[k], amps_[k | tbit]);
  }

 private:
  static std::size_t dimension_for(std::size_t n) {
    if (n == 0) throw dimension_error("state needs at least one qubit");
    if (n > max_qubits) throw capacity_error("state vectors are limited to " + std::to_string(max_qubits) + " qubits");
    return std::size_t{1} << n;
  }

  std::size_t n_;
  std::vector<Complex> amps_;
};

enum class AnsatzLayout {
  /// D+1 layers of per-qubit Ry rotations separated by CNOT chains 0->1->...->n-1.
  real_amplitudes,
  /// D+1 layers of paired double excitations exp(-i theta/2 X X X Y), one per
  /// (occupied, virtual) spatial-orbital pair of the reference occupation.
  /// Conserves particle number and S_z; amplitudes stay real.
  pair_excitations,
};

inline std::string to_string(AnsatzLayout l) {
  return l == AnsatzLayout::real_amplitudes ? "real_amplitudes" : "pair_excitations";
}

struct AnsatzConfig {
  std::size_t num_qubits = 4;
  std::size_t depth = 4;
  AnsatzLayout layout = AnsatzLayout::real_amplitudes;
  /// Reference state |Psi_0>, most-significant qubit first.
  std::string initial_occupation = "0011";

  std::size_t parameter_count() const {
    switch (layout) {
      case AnsatzLayout::real_amplitudes: return num_qubits * (depth + 1);
      case AnsatzLayout::pair_excitations: return pair_generators().size() * (depth + 1);
    }
    return 0;
  }

  /// Generators of one pair_excitations layer. Qubits 2p and 2p+1 hold the
  /// two spin orbitals of spatial orbital p; a spatial orbital is occupied
  /// when both of its bits are set in initial_occupation.
  std::vector<PauliWord> pair_generators() const {
    if (num_qubits % 2 != 0) throw dimension_error("pair excitations need an even qubit count");
    const Bitstring occ = Bitstring::parse(initial_occupation);
    if (occ.n != num_qubits) throw dimension_error("initial occupation length differs from qubit count");
    std::vector<std::size_t> occupied, virt;
    for (std::size_t p = 0; p < num_qubits / 2; ++p) {
      const bool a = occ[2 * p], b = occ[2 * p + 1];
      if (a != b) throw config_error("pair excitations need doubly occupied or empty spatial orbitals");
      (a ? occupied : virt).push_back(p);
    }
    std::vector<PauliWord> gens;
    for (std::size_t i : occupied) {
      for (std::size_t a : virt) {
        std::vector<PauliLetter> ops(num_qubits, PauliLetter::I);
        ops[2 * i] = ops[2 * i + 1] = ops[2 * a] = PauliLetter::X;
        ops[std::max(2 * i + 1, 2 * a + 1)] = PauliLetter::Y;
        gens.emplace_back(std::move(ops));
      }
    }
    return gens;
  }
};

/// Prepares U(theta)|Psi_0>. Parameters are ordered layer-major: for
/// real_amplitudes index layer * n + qubit.
inline StateVector prepare_ansatz_state(const AnsatzConfig& config, std::span<const double> params) {
  if (params.size() != config.parameter_count())
    throw dimension_error("ansatz expects " + std::to_string(config.parameter_count()) + " parameters, got " +
                          std::to_string(params.size()));
  const Bitstring occ = Bitstring::parse(config.initial_occupation);
  if (occ.n != config.num_qubits) throw dimension_error("initial occupation length differs from qubit count");
  StateVector psi = StateVector::basis_state(occ);
  const std::size_t n = config.num_qubits;
  switch (config.layout) {
    case AnsatzLayout::real_amplitudes:
      for (std::size_t layer = 0; layer <= config.depth; ++layer) {
        if (layer > 0)
          for (std::size_t q = 0; q + 1 < n; ++q) psi.apply_cnot(q, q + 1);
        for (std::size_t q = 0; q < n; ++q) psi.apply_ry(q, params[layer * n + q]);
      }
      break;
    case AnsatzLayout::pair_excitations: {
      const auto gens = config.pair_generators();
      std::size_t k = 0;
      for (std::size_t layer = 0; layer <= config.depth; ++layer)
        for (const auto& g : gens) psi.apply_pauli_rotation(g, params[k++]);
      break;
    }
  }
  return psi;
}

/// Per-qubit measurement basis, each letter X, Y or Z.
class BasisChoice {
 public:
  explicit BasisChoice(std::vector<PauliLetter> letters) : letters_(std::move(letters)) {
    for (auto p : letters_)
      if (p == PauliLetter::I) throw std::invalid_argument("measurement basis letters must be X, Y or Z");
  }

  std::size_t size() const { return letters_.size(); }
  PauliLetter operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<PauliLetter>& letters() const { return letters_; }

  friend bool operator==(const BasisChoice&, const BasisChoice&) = default;

 private:
  std::vector<PauliLetter> letters_;
};

/// Rotates qubit `q` so a Z measurement afterwards measures `basis` before.
inline void rotate_qubit_into(StateVector& s, std::size_t q, PauliLetter basis) {
  switch (basis) {
    case PauliLetter::X: s.apply_h(q); break;
    case PauliLetter::Y:
      s.apply_sdg(q);
      s.apply_h(q);
      break;
    default: break;
  }
}

inline StateVector apply_basis_rotation(StateVector state, const BasisChoice& basis) {
  if (basis.size() != state.num_qubits()) throw dimension_error("basis length differs from qubit count");
  for (std::size_t q = 0; q < basis.size(); ++q) rotate_qubit_into(state, q, basis[q]);
  return state;
}

/// Inverse-CDF sampler over the Born distribution of one state.
class BornSampler {
 public:
  explicit BornSampler(const StateVector& s) : n_(s.num_qubits()), cdf_(s.dimension()) { reset(s); }

  void reset(const StateVector& s) {
    n_ = s.num_qubits();
    cdf_.resize(s.dimension());
    double acc = 0.0;
    for (std::size_t k = 0; k < cdf_.size(); ++k) {
      acc += std::norm(s[k]);
      cdf_[k] = acc;
    }
  }

  Bitstring draw(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return Bitstring{static_cast<std::uint64_t>(it - cdf_.begin()), n_};
  }

 private:
  std::size_t n_;
  std::vector<double> cdf_;
};

inline std::vector<Bitstring> sample_bitstrings(const StateVector& state, std::size_t count, Rng& rng) {
  std::vector<Bitstring> out;
  if (count == 0) return out;
  BornSampler sampler(state);
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.draw(rng));
  return out;
}

}  // namespace qcpmd
