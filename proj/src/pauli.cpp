#include "condspec/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace condspec {

namespace {

Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_qubits(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw std::invalid_argument("qubit count " + std::to_string(n) +
                                " outside [1, " + std::to_string(kMaxQubits) +
                                "]");
  }
}

void check_same(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": qubit-count mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) +
                                ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PauliString

PauliString::PauliString(int n_qubits) : n_qubits_(n_qubits) {
  check_qubits(n_qubits);
}

PauliString::PauliString(int n_qubits, std::uint64_t x_mask,
                         std::uint64_t z_mask)
    : n_qubits_(n_qubits), x_(x_mask), z_(z_mask) {
  check_qubits(n_qubits);
  const std::uint64_t valid = (std::uint64_t{1} << n_qubits) - 1;
  if ((x_mask | z_mask) & ~valid) {
    throw std::invalid_argument("Pauli mask has bits beyond the register");
  }
}

PauliString PauliString::from_letters(std::string_view letters) {
  PauliString s(static_cast<int>(letters.size()));
  for (std::size_t q = 0; q < letters.size(); ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    switch (letters[q]) {
      case 'I': break;
      case 'X': s.x_ |= bit; break;
      case 'Y': s.x_ |= bit; s.z_ |= bit; break;
      case 'Z': s.z_ |= bit; break;
      default:
        throw std::invalid_argument("invalid Pauli letter '" +
                                    std::string(1, letters[q]) + "'");
    }
  }
  return s;
}

PauliString PauliString::single(int n_qubits, int qubit, Pauli letter) {
  PauliString s(n_qubits);
  if (qubit < 0 || qubit >= n_qubits) {
    throw std::out_of_range("qubit index out of range");
  }
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  if (letter == Pauli::X || letter == Pauli::Y) s.x_ |= bit;
  if (letter == Pauli::Z || letter == Pauli::Y) s.z_ |= bit;
  return s;
}

PauliString PauliString::pair(int n_qubits, int q1, Pauli p1, int q2,
                              Pauli p2) {
  if (q1 == q2) throw std::invalid_argument("pair on a single qubit");
  const auto a = single(n_qubits, q1, p1);
  const auto b = single(n_qubits, q2, p2);
  return PauliString(n_qubits, a.x_ | b.x_, a.z_ | b.z_);
}

Pauli PauliString::letter(int qubit) const {
  if (qubit < 0 || qubit >= n_qubits_) {
    throw std::out_of_range("qubit index out of range");
  }
  const bool x = (x_ >> qubit) & 1U;
  const bool z = (z_ >> qubit) & 1U;
  if (x && z) return Pauli::Y;
  if (x) return Pauli::X;
  if (z) return Pauli::Z;
  return Pauli::I;
}

int PauliString::weight() const noexcept { return std::popcount(x_ | z_); }

int PauliString::y_count() const noexcept { return std::popcount(x_ & z_); }

Complex PauliString::phase_on(std::uint64_t basis) const noexcept {
  const int sign_flips = std::popcount(basis & z_);
  return i_power(y_count() + 2 * sign_flips);
}

std::string PauliString::to_string() const {
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  std::string out(static_cast<std::size_t>(n_qubits_), 'I');
  for (int q = 0; q < n_qubits_; ++q) {
    out[static_cast<std::size_t>(q)] = kLetters[static_cast<int>(letter(q))];
  }
  return out;
}

std::pair<Complex, PauliString> mul_strings(const PauliString& a,
                                            const PauliString& b) {
  check_same(a.n_qubits(), b.n_qubits(), "mul_strings");
  // P = i^{|x&z|} X^x Z^z; moving Z^{za} past X^{xb} costs (-1)^{|za&xb|}.
  PauliString product(a.n_qubits(), a.x_mask() ^ b.x_mask(),
                      a.z_mask() ^ b.z_mask());
  const int k = a.y_count() + b.y_count() - product.y_count() +
                2 * std::popcount(a.z_mask() & b.x_mask());
  return {i_power(k), product};
}

// ---------------------------------------------------------------------------
// PauliOperator

PauliOperator::PauliOperator(int n_qubits, std::vector<PauliTerm> terms)
    : n_qubits_(n_qubits), terms_(std::move(terms)) {
  check_qubits(n_qubits);
  for (const auto& t : terms_) {
    check_same(n_qubits_, t.string.n_qubits(), "PauliOperator");
  }
}

PauliOperator PauliOperator::identity(int n_qubits, Complex coeff) {
  return PauliOperator(n_qubits, {{coeff, PauliString(n_qubits)}});
}

PauliOperator PauliOperator::from_string(const PauliString& s, Complex coeff) {
  return PauliOperator(s.n_qubits(), {{coeff, s}});
}

void PauliOperator::add_term(Complex coeff, const PauliString& s) {
  if (n_qubits_ == 0) n_qubits_ = s.n_qubits();
  check_same(n_qubits_, s.n_qubits(), "add_term");
  terms_.push_back({coeff, s});
}

PauliOperator PauliOperator::canonicalized() const {
  std::vector<PauliTerm> sorted = terms_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PauliTerm& a, const PauliTerm& b) {
                     return a.string < b.string;
                   });
  std::vector<PauliTerm> merged;
  merged.reserve(sorted.size());
  for (const auto& t : sorted) {
    if (!merged.empty() && merged.back().string == t.string) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const PauliTerm& t) {
    return std::abs(t.coeff) < kDropTolerance;
  });
  PauliOperator out(n_qubits_);
  out.terms_ = std::move(merged);
  return out;
}

PauliOperator PauliOperator::adjoint() const {
  PauliOperator out = *this;
  for (auto& t : out.terms_) t.coeff = std::conj(t.coeff);
  return out;
}

bool PauliOperator::is_hermitian(double tol) const {
  const auto c = canonicalized();
  return std::all_of(c.terms_.begin(), c.terms_.end(), [tol](const PauliTerm& t) {
    return std::abs(t.coeff.imag()) <= tol;
  });
}

double PauliOperator::one_norm() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.coeff);
  return s;
}

PauliOperator& PauliOperator::operator+=(const PauliOperator& other) {
  if (n_qubits_ == 0) n_qubits_ = other.n_qubits_;
  check_same(n_qubits_, other.n_qubits_, "operator+");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

PauliOperator& PauliOperator::operator-=(const PauliOperator& other) {
  if (n_qubits_ == 0) n_qubits_ = other.n_qubits_;
  check_same(n_qubits_, other.n_qubits_, "operator-");
  for (const auto& t : other.terms_) terms_.push_back({-t.coeff, t.string});
  return *this;
}

PauliOperator& PauliOperator::operator*=(Complex scalar) {
  for (auto& t : terms_) t.coeff *= scalar;
  return *this;
}

PauliOperator operator*(const PauliOperator& a, const PauliOperator& b) {
  check_same(a.n_qubits(), b.n_qubits(), "operator*");
  PauliOperator out(a.n_qubits());
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      auto [phase, s] = mul_strings(ta.string, tb.string);
      out.add_term(phase * ta.coeff * tb.coeff, s);
    }
  }
  return out.canonicalized();
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(int n_qubits)
    : n_qubits_(n_qubits),
      amps_(Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits)) {
  check_qubits(n_qubits);
  if (n_qubits > 30) throw std::invalid_argument("statevector too large");
}

StateVector::StateVector(int n_qubits, Eigen::VectorXcd amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  check_qubits(n_qubits);
  if (amps_.size() != (Eigen::Index{1} << n_qubits)) {
    throw std::invalid_argument("amplitude count is not 2^n_qubits");
  }
}

StateVector StateVector::basis(int n_qubits, std::uint64_t index) {
  StateVector s(n_qubits);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s[index] = 1.0;
  return s;
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw std::invalid_argument("cannot normalize a zero state");
  return StateVector(n_qubits_, amps_ / n);
}

// ---------------------------------------------------------------------------
// Application and dense realization

void apply_operator_accumulate(const PauliOperator& op,
                               const Eigen::VectorXcd& in,
                               Eigen::VectorXcd& out) {
  const auto dim = static_cast<std::uint64_t>(in.size());
  for (const auto& t : op.terms()) {
    const std::uint64_t x = t.string.x_mask();
    const std::uint64_t z = t.string.z_mask();
    const Complex base = t.coeff * i_power(t.string.y_count());
    for (std::uint64_t b = 0; b < dim; ++b) {
      const Complex v = in[static_cast<Eigen::Index>(b)];
      const Complex c = (std::popcount(b & z) & 1) ? -base : base;
      out[static_cast<Eigen::Index>(b ^ x)] += c * v;
    }
  }
}

StateVector apply_operator(const PauliOperator& op, const StateVector& s) {
  check_same(op.n_qubits(), s.n_qubits(), "apply_operator");
  StateVector out(s.n_qubits());
  apply_operator_accumulate(op, s.amplitudes(), out.amplitudes());
  return out;
}

Eigen::MatrixXcd apply_operator(const PauliOperator& op,
                                const Eigen::MatrixXcd& block) {
  if (block.rows() != (Eigen::Index{1} << op.n_qubits())) {
    throw std::invalid_argument("apply_operator: block row count mismatch");
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(block.rows(), block.cols());
  const auto dim = static_cast<std::uint64_t>(block.rows());
  for (const auto& t : op.terms()) {
    const std::uint64_t x = t.string.x_mask();
    const std::uint64_t z = t.string.z_mask();
    const Complex base = t.coeff * i_power(t.string.y_count());
    for (std::uint64_t b = 0; b < dim; ++b) {
      const Complex c = (std::popcount(b & z) & 1) ? -base : base;
      out.row(static_cast<Eigen::Index>(b ^ x)) +=
          c * block.row(static_cast<Eigen::Index>(b));
    }
  }
  return out;
}

Eigen::MatrixXcd to_dense(const PauliOperator& op) {
  if (op.n_qubits() < 1 || op.n_qubits() > kMaxDenseQubits) {
    throw std::invalid_argument("to_dense: n_qubits " +
                                std::to_string(op.n_qubits()) +
                                " exceeds the dense limit of " +
                                std::to_string(kMaxDenseQubits));
  }
  const auto dim = std::uint64_t{1} << op.n_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& t : op.terms()) {
    for (std::uint64_t col = 0; col < dim; ++col) {
      const auto row = col ^ t.string.x_mask();
      m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) +=
          t.coeff * t.string.phase_on(col);
    }
  }
  return m;
}

Eigen::MatrixXcd to_dense(const PauliString& s) {
  return to_dense(PauliOperator::from_string(s));
}

Complex inner(const StateVector& bra, const StateVector& ket) {
  check_same(bra.n_qubits(), ket.n_qubits(), "inner");
  return bra.amplitudes().dot(ket.amplitudes());
}

void write_text(std::ostream& os, const PauliOperator& op) {
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& t : op.terms()) {
    line.str({});
    line << t.coeff.real() << ' ' << t.coeff.imag() << ' '
         << t.string.to_string() << '\n';
    os << line.str();
  }
}

std::string to_text(const PauliOperator& op) {
  std::ostringstream os;
  write_text(os, op);
  return os.str();
}

}  // namespace condspec
