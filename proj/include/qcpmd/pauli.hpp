#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qcpmd/error.hpp"

namespace qcpmd {

enum class PauliLetter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char to_char(PauliLetter p) { return "IXYZ"[static_cast<int>(p)]; }

inline PauliLetter letter_from_char(char c) {
  switch (c) {
    case 'I': return PauliLetter::I;
    case 'X': return PauliLetter::X;
    case 'Y': return PauliLetter::Y;
    case 'Z': return PauliLetter::Z;
    default: throw std::invalid_argument(std::string("not a Pauli letter: '") + c + "'");
  }
}

/// Tensor product of single-qubit Paulis. `ops()[i]` acts on qubit i.
///
/// Text labels are written most-significant qubit first: character n-1-i of
/// a label is qubit i, so "IIIZ" is Z on qubit 0.
class PauliWord {
 public:
  explicit PauliWord(std::vector<PauliLetter> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw dimension_error("Pauli word needs at least one qubit");
  }

  static PauliWord identity(std::size_t n) { return PauliWord(std::vector<PauliLetter>(n, PauliLetter::I)); }

  /// Single non-identity letter `p` on `qubit`.
  static PauliWord single(std::size_t n, std::size_t qubit, PauliLetter p) {
    std::vector<PauliLetter> ops(n, PauliLetter::I);
    ops.at(qubit) = p;
    return PauliWord(std::move(ops));
  }

  static PauliWord from_label(std::string_view label) {
    std::vector<PauliLetter> ops(label.size());
    for (std::size_t i = 0; i < label.size(); ++i) ops[i] = letter_from_char(label[label.size() - 1 - i]);
    return PauliWord(std::move(ops));
  }

  std::string label() const {
    std::string s(ops_.size(), 'I');
    for (std::size_t i = 0; i < ops_.size(); ++i) s[ops_.size() - 1 - i] = to_char(ops_[i]);
    return s;
  }

  std::size_t num_qubits() const { return ops_.size(); }
  const std::vector<PauliLetter>& ops() const { return ops_; }
  PauliLetter operator[](std::size_t i) const { return ops_[i]; }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (ops_[i] != PauliLetter::I) s.push_back(i);
    return s;
  }

  bool is_identity() const {
    for (auto p : ops_)
      if (p != PauliLetter::I) return false;
    return true;
  }

  /// Qubits where the word flips the computational basis (X or Y).
  std::uint64_t flip_mask() const {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (ops_[i] == PauliLetter::X || ops_[i] == PauliLetter::Y) m |= std::uint64_t{1} << i;
    return m;
  }

  /// Qubits contributing a (-1)^bit sign (Z or Y).
  std::uint64_t phase_mask() const {
    std::uint64_t m = 0;
    for (std::size_t i = 0; i < ops_.size(); ++i)
      if (ops_[i] == PauliLetter::Z || ops_[i] == PauliLetter::Y) m |= std::uint64_t{1} << i;
    return m;
  }

  std::size_t y_count() const {
    std::size_t c = 0;
    for (auto p : ops_) c += (p == PauliLetter::Y);
    return c;
  }

  friend bool operator==(const PauliWord&, const PauliWord&) = default;

 private:
  std::vector<PauliLetter> ops_;
};

struct PauliTerm {
  double coefficient;
  PauliWord word;
};

/// Real-weighted sum of Pauli words on a fixed number of qubits.
///
/// Construction merges repeated words (coefficients summed, first
/// occurrence keeps its position) and rejects non-finite coefficients.
class Observable {
 public:
  Observable(std::size_t n, std::vector<PauliTerm> terms) : n_(n) {
    if (n == 0) throw dimension_error("observable needs at least one qubit");
    for (auto& t : terms) add(t.coefficient, std::move(t.word));
  }

  explicit Observable(std::size_t n) : Observable(n, {}) {}

  std::size_t num_qubits() const { return n_; }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  /// Number of terms whose word is not the identity.
  std::size_t non_identity_count() const {
    std::size_t c = 0;
    for (const auto& t : terms_) c += !t.word.is_identity();
    return c;
  }

  void add(double coefficient, PauliWord word) {
    if (!std::isfinite(coefficient)) throw std::invalid_argument("non-finite Pauli coefficient");
    if (word.num_qubits() != n_)
      throw dimension_error("word " + word.label() + " does not act on " + std::to_string(n_) + " qubits");
    for (auto& t : terms_) {
      if (t.word == word) {
        t.coefficient += coefficient;
        return;
      }
    }
    terms_.push_back({coefficient, std::move(word)});
  }

  Observable operator*(double s) const {
    Observable out = *this;
    for (auto& t : out.terms_) t.coefficient *= s;
    return out;
  }

  Observable operator+(const Observable& other) const {
    if (other.n_ != n_) throw dimension_error("observable qubit counts differ");
    Observable out = *this;
    for (const auto& t : other.terms_) out.add(t.coefficient, t.word);
    return out;
  }

 private:
  std::size_t n_;
  std::vector<PauliTerm> terms_;
};

inline Observable operator*(double s, const Observable& o) { return o * s; }

}  // namespace qcpmd
