#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qcpmd/error.hpp"
#include "qcpmd/exact.hpp"
#include "qcpmd/pauli.hpp"
#include "qcpmd/random.hpp"
#include "qcpmd/statevector.hpp"

namespace qcpmd {

/// One randomized Pauli measurement: basis per qubit and the observed bits.
struct Snapshot {
  BasisChoice bases;
  Bitstring outcomes;

  std::size_t num_qubits() const { return bases.size(); }
};

/// Per-letter qubit masks of a basis choice or Pauli word (bit i = qubit i).
struct LetterMasks {
  std::uint64_t x = 0, y = 0, z = 0;

  std::uint64_t support() const { return x | y | z; }

  static LetterMasks of(const std::vector<PauliLetter>& letters) {
    LetterMasks m;
    for (std::size_t i = 0; i < letters.size(); ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (letters[i] == PauliLetter::X) m.x |= bit;
      if (letters[i] == PauliLetter::Y) m.y |= bit;
      if (letters[i] == PauliLetter::Z) m.z |= bit;
    }
    return m;
  }
};

/// N_S snapshots of one state plus the median-of-means group count K.
///
/// Only the first K * floor(N_S / K) snapshots enter median-of-means.
class ShadowBatch {
 public:
  ShadowBatch(std::vector<Snapshot> snapshots, std::size_t groups)
      : snapshots_(std::move(snapshots)), groups_(groups) {
    if (groups_ == 0 || groups_ > snapshots_.size())
      throw config_error("median-of-means needs 1 <= K <= N_S (K=" + std::to_string(groups_) +
                         ", N_S=" + std::to_string(snapshots_.size()) + ")");
    masks_.reserve(snapshots_.size());
    for (const auto& s : snapshots_) {
      if (s.bases.size() != snapshots_.front().bases.size() || s.outcomes.n != s.bases.size())
        throw dimension_error("snapshots in a batch must share one qubit count");
      masks_.push_back(LetterMasks::of(s.bases.letters()));
    }
  }

  /// Basis masks of snapshot j, cached at construction.
  const LetterMasks& masks(std::size_t j) const { return masks_[j]; }

  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  std::size_t size() const { return snapshots_.size(); }
  std::size_t groups() const { return groups_; }
  std::size_t group_size() const { return snapshots_.size() / groups_; }
  std::size_t num_qubits() const { return snapshots_.front().num_qubits(); }

 private:
  std::vector<Snapshot> snapshots_;
  std::vector<LetterMasks> masks_;
  std::size_t groups_;
};

/// Draws N_S snapshots: each qubit's basis uniform over {X, Y, Z}, then one
/// computational-basis sample of the rotated state.
inline ShadowBatch collect_snapshots(const StateVector& state, std::size_t num_snapshots, std::size_t groups,
                                     Rng& rng) {
  if (groups == 0 || num_snapshots < groups)
    throw config_error("collect_snapshots needs N_S >= K >= 1");
  static constexpr PauliLetter letters[3] = {PauliLetter::X, PauliLetter::Y, PauliLetter::Z};
  const std::size_t n = state.num_qubits();
  std::vector<Snapshot> snaps;
  snaps.reserve(num_snapshots);
  StateVector work = state;
  BornSampler sampler(state);
  std::vector<PauliLetter> bases(n);
  for (std::size_t j = 0; j < num_snapshots; ++j) {
    for (std::size_t q = 0; q < n; ++q) bases[q] = letters[rng() % 3];
    std::copy(state.amplitudes().begin(), state.amplitudes().end(), work.amplitudes().begin());
    for (std::size_t q = 0; q < n; ++q) rotate_qubit_into(work, q, bases[q]);
    sampler.reset(work);
    snaps.push_back({BasisChoice(bases), sampler.draw(rng)});
  }
  return ShadowBatch(std::move(snaps), groups);
}

/// Tr[w rho_hat] for one snapshot in closed form: product over the support
/// of 3(1 - 2 b_i) when every basis matches, otherwise 0.
inline double snapshot_pauli_estimate(const Snapshot& s, const PauliWord& w) {
  if (w.num_qubits() != s.num_qubits()) throw dimension_error("word and snapshot qubit counts differ");
  double m = 1.0;
  for (std::size_t i = 0; i < w.num_qubits(); ++i) {
    const PauliLetter p = w[i];
    if (p == PauliLetter::I) continue;
    if (s.bases[i] != p) return 0.0;
    m *= s.outcomes[i] ? -3.0 : 3.0;
  }
  return m;
}

/// Dense rho_hat = tensor_i (3 U_i^dag |b_i><b_i| U_i - I). Test oracle only.
inline Eigen::MatrixXcd snapshot_density(const Snapshot& s) {
  if (s.num_qubits() > 8) throw capacity_error("snapshot_density is limited to 8 qubits");
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd h;
  h << r, r, r, -r;
  Eigen::Matrix2cd sdg;
  sdg << 1, 0, 0, Complex(0, -1);
  return kron_over_qubits(s.num_qubits(), [&](std::size_t q) -> Eigen::Matrix2cd {
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
    if (s.bases[q] == PauliLetter::X) u = h;
    if (s.bases[q] == PauliLetter::Y) u = h * sdg;
    Eigen::Vector2cd b = Eigen::Vector2cd::Zero();
    b(s.outcomes[q] ? 1 : 0) = 1.0;
    const Eigen::Vector2cd ket = u.adjoint() * b;
    return 3.0 * ket * ket.adjoint() - Eigen::Matrix2cd::Identity();
  });
}

/// Median of K consecutive group means. For even K the ceil(K/2)-th smallest
/// mean is returned.
inline double estimate_pauli_mom(const ShadowBatch& batch, const PauliWord& w) {
  if (w.num_qubits() != batch.num_qubits()) throw dimension_error("word and batch qubit counts differ");
  const std::size_t k = batch.groups(), g = batch.group_size();
  // Same closed form as snapshot_pauli_estimate, evaluated on bit masks.
  const LetterMasks wm = LetterMasks::of(w.ops());
  const std::uint64_t support = wm.support();
  const double magnitude = std::pow(3.0, std::popcount(support));
  std::vector<double> means(k);
  for (std::size_t grp = 0; grp < k; ++grp) {
    long long sum = 0;
    for (std::size_t j = grp * g; j < (grp + 1) * g; ++j) {
      const LetterMasks& sm = batch.masks(j);
      if ((wm.x & ~sm.x) | (wm.y & ~sm.y) | (wm.z & ~sm.z)) continue;
      sum += (std::popcount(batch.snapshots()[j].outcomes.bits & support) & 1U) ? -1 : 1;
    }
    means[grp] = magnitude * static_cast<double>(sum) / static_cast<double>(g);
  }
  const std::size_t pick = (k + 1) / 2 - 1;
  std::nth_element(means.begin(), means.begin() + static_cast<std::ptrdiff_t>(pick), means.end());
  return means[pick];
}

inline double estimate_observable(const ShadowBatch& batch, const Observable& obs) {
  if (obs.num_qubits() != batch.num_qubits()) throw dimension_error("observable and batch qubit counts differ");
  double e = 0.0;
  for (const auto& t : obs.terms())
    e += t.word.is_identity() ? t.coefficient : t.coefficient * estimate_pauli_mom(batch, t.word);
  return e;
}

/// Measures one Pauli word by rotating its support into the Z basis and
/// averaging the +-1 parity over `shots` samples.
inline double direct_pauli_estimate(const StateVector& state, const PauliWord& w, std::size_t shots, Rng& rng) {
  if (w.num_qubits() != state.num_qubits()) throw dimension_error("word and state qubit counts differ");
  if (shots == 0) throw config_error("direct measurement needs at least one shot");
  if (w.is_identity()) return 1.0;
  StateVector rotated = state;
  for (std::size_t q = 0; q < w.num_qubits(); ++q)
    if (w[q] != PauliLetter::I) rotate_qubit_into(rotated, q, w[q]);
  const std::uint64_t mask = w.flip_mask() | w.phase_mask();
  BornSampler sampler(rotated);
  long long sum = 0;
  for (std::size_t s = 0; s < shots; ++s) sum += (std::popcount(sampler.draw(rng).bits & mask) & 1U) ? -1 : 1;
  return static_cast<double>(sum) / static_cast<double>(shots);
}

/// Sum of per-term direct estimates; the identity term is added exactly.
/// State preparations consumed: shots per non-identity term.
inline double direct_observable_estimate(const StateVector& state, const Observable& obs, std::size_t shots,
                                         Rng& rng) {
  double e = 0.0;
  for (const auto& t : obs.terms())
    e += t.word.is_identity() ? t.coefficient : t.coefficient * direct_pauli_estimate(state, t.word, shots, rng);
  return e;
}

}  // namespace qcpmd
