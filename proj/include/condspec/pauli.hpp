#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace condspec {

using Complex = std::complex<double>;

/// Single-qubit Pauli letter.
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Largest register that fits the bit-mask representation.
inline constexpr int kMaxQubits = 62;
/// Largest register for which dense matrices may be materialized.
inline constexpr int kMaxDenseQubits = 12;

/**
 * Tensor product of single-qubit Pauli letters.
 *
 * Qubits are indexed from 0, and qubit q is bit q of a basis-state index, so
 * the first qubit is the least-significant bit. Internally the string is kept
 * as an (x, z) mask pair with Y = X and Z on the same qubit.
 */
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(int n_qubits);
  PauliString(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask);

  /// Parses letters over {I, X, Y, Z}; the leftmost letter acts on qubit 0.
  static PauliString from_letters(std::string_view letters);
  static PauliString single(int n_qubits, int qubit, Pauli letter);
  static PauliString pair(int n_qubits, int q1, Pauli p1, int q2, Pauli p2);

  int n_qubits() const noexcept { return n_qubits_; }
  std::uint64_t x_mask() const noexcept { return x_; }
  std::uint64_t z_mask() const noexcept { return z_; }
  Pauli letter(int qubit) const;
  int weight() const noexcept;
  int y_count() const noexcept;
  bool is_identity() const noexcept { return x_ == 0 && z_ == 0; }

  /// Phase picked up by basis state |b>: P|b> = phase(b) |b ^ x_mask>.
  Complex phase_on(std::uint64_t basis) const noexcept;

  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend auto operator<=>(const PauliString& a, const PauliString& b) {
    if (auto c = a.n_qubits_ <=> b.n_qubits_; c != 0) return c;
    if (auto c = a.x_ <=> b.x_; c != 0) return c;
    return a.z_ <=> b.z_;
  }

 private:
  int n_qubits_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

/// Product a*b = phase * product, phase in {1, i, -1, -i}.
std::pair<Complex, PauliString> mul_strings(const PauliString& a,
                                            const PauliString& b);

struct PauliTerm {
  Complex coeff;
  PauliString string;
};

/**
 * Weighted sum of Pauli strings on a fixed register.
 *
 * Terms are stored as given; canonicalized() merges duplicates, drops
 * coefficients below kDropTolerance and orders the terms by string.
 */
class PauliOperator {
 public:
  static constexpr double kDropTolerance = 1e-14;

  PauliOperator() = default;
  explicit PauliOperator(int n_qubits) : n_qubits_(n_qubits) {}
  PauliOperator(int n_qubits, std::vector<PauliTerm> terms);

  static PauliOperator identity(int n_qubits, Complex coeff = 1.0);
  static PauliOperator from_string(const PauliString& s, Complex coeff = 1.0);

  int n_qubits() const noexcept { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  void add_term(Complex coeff, const PauliString& s);

  PauliOperator canonicalized() const;
  PauliOperator adjoint() const;

  /// True when every canonical coefficient is real to tol; each Pauli string
  /// is Hermitian, so this is equivalent to Hermiticity of the sum.
  bool is_hermitian(double tol = 1e-12) const;

  /// Sum of |coeff|, an upper bound on the spectral norm.
  double one_norm() const;

  PauliOperator& operator+=(const PauliOperator& other);
  PauliOperator& operator-=(const PauliOperator& other);
  PauliOperator& operator*=(Complex scalar);

  friend PauliOperator operator+(PauliOperator a, const PauliOperator& b) {
    return a += b;
  }
  friend PauliOperator operator-(PauliOperator a, const PauliOperator& b) {
    return a -= b;
  }
  friend PauliOperator operator*(PauliOperator a, Complex s) { return a *= s; }
  friend PauliOperator operator*(Complex s, PauliOperator a) { return a *= s; }
  /// Operator product, canonicalized.
  friend PauliOperator operator*(const PauliOperator& a,
                                 const PauliOperator& b);

 private:
  int n_qubits_ = 0;
  std::vector<PauliTerm> terms_;
};

/// Normalized-or-not statevector of 2^n amplitudes.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(int n_qubits);
  StateVector(int n_qubits, Eigen::VectorXcd amplitudes);

  static StateVector basis(int n_qubits, std::uint64_t index);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
  Complex& operator[](std::size_t i) { return amps_[static_cast<Eigen::Index>(i)]; }

  double norm() const { return amps_.norm(); }
  StateVector normalized() const;

 private:
  int n_qubits_ = 0;
  Eigen::VectorXcd amps_;
};

/// op * s, applied term by term without a dense matrix.
StateVector apply_operator(const PauliOperator& op, const StateVector& s);

/// op applied to every column of a block of states (rows = basis index).
Eigen::MatrixXcd apply_operator(const PauliOperator& op,
                                const Eigen::MatrixXcd& block);

/// Accumulates op * in into out without clearing out first.
void apply_operator_accumulate(const PauliOperator& op,
                               const Eigen::VectorXcd& in,
                               Eigen::VectorXcd& out);

Eigen::MatrixXcd to_dense(const PauliOperator& op);
Eigen::MatrixXcd to_dense(const PauliString& s);

/// <bra|ket>, conjugate-linear in bra.
Complex inner(const StateVector& bra, const StateVector& ket);

/// Text dump, one "coeff_re coeff_im letters" line per term.
void write_text(std::ostream& os, const PauliOperator& op);
std::string to_text(const PauliOperator& op);

}  // namespace condspec
