#include "condspec/exciton.hpp"

#include "condspec/units.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace condspec {

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

double component(const Vec3& v, Axis k) { return v[static_cast<int>(k)]; }

Vec3 sum_dipole(const Chromophore& c) { return 0.5 * (c.mu00 + c.mu11); }
Vec3 diff_dipole(const Chromophore& c) { return 0.5 * (c.mu00 - c.mu11); }

}  // namespace

Basis parse_basis(std::string_view name) {
  if (name == "full") return Basis::full;
  if (name == "frenkel") return Basis::frenkel;
  throw std::invalid_argument("unknown basis '" + std::string(name) +
                              "' (expected full or frenkel)");
}

std::string_view to_string(Basis b) {
  return b == Basis::full ? "full" : "frenkel";
}

void ChromophoreFrame::validate() const {
  if (chromophores.empty()) {
    throw std::invalid_argument("frame has no chromophores");
  }
  for (std::size_t m = 0; m < chromophores.size(); ++m) {
    const auto& c = chromophores[m];
    if (!std::isfinite(c.excitation_energy) || !finite(c.mu00) ||
        !finite(c.mu11) || !finite(c.mu01) || !finite(c.com)) {
      throw std::invalid_argument("chromophore " + std::to_string(m) +
                                  " has non-finite data");
    }
    for (std::size_t n = 0; n < m; ++n) {
      if ((c.com - chromophores[n].com).norm() <= kMinSeparation) {
        throw std::invalid_argument(
            "chromophores " + std::to_string(n) + " and " + std::to_string(m) +
            " are closer than " + std::to_string(kMinSeparation) + " A");
      }
    }
  }
}

Eigen::MatrixXd FrenkelMatrix::site_matrix() const {
  Eigen::MatrixXd m = couplings;
  m.diagonal() = energies;
  return m;
}

double dipole_dipole_coupling(const Vec3& mu_a, const Vec3& mu_b,
                              const Vec3& r_a, const Vec3& r_b) {
  const Vec3 d = r_b - r_a;
  const double r = d.norm();
  if (!(r > kMinSeparation)) {
    throw std::invalid_argument("dipole_dipole_coupling: coincident centers");
  }
  const Vec3 u = d / r;
  const double value = mu_a.dot(mu_b) - 3.0 * mu_a.dot(u) * mu_b.dot(u);
  return units::kDipoleCouplingEv * value / (r * r * r);
}

FullSpaceCoefficients full_space_coefficients(const ChromophoreFrame& frame) {
  frame.validate();
  const int n = frame.size();
  FullSpaceCoefficients c;
  c.Z = Eigen::VectorXd::Zero(n);
  c.X = Eigen::VectorXd::Zero(n);
  c.XX = Eigen::MatrixXd::Zero(n, n);
  c.XZ = Eigen::MatrixXd::Zero(n, n);
  c.ZX = Eigen::MatrixXd::Zero(n, n);
  c.ZZ = Eigen::MatrixXd::Zero(n, n);

  const auto& ch = frame.chromophores;
  auto coupling = [&](const Vec3& a, int m, const Vec3& b, int k) {
    return dipole_dipole_coupling(a, b, ch[m].com, ch[k].com);
  };

  for (int m = 0; m < n; ++m) {
    // (0|h|0) = (0|h|1) = 0, (1|h|1) = E_m.
    const double e = ch[m].excitation_energy;
    c.E += 0.5 * e;
    c.Z[m] = -0.5 * e;
    c.X[m] = 0.0;
  }
  for (int m = 0; m < n; ++m) {
    const Vec3 s_m = sum_dipole(ch[m]);
    const Vec3 d_m = diff_dipole(ch[m]);
    const Vec3& t_m = ch[m].mu01;
    for (int k = 0; k < n; ++k) {
      if (k == m) continue;
      const Vec3 s_k = sum_dipole(ch[k]);
      c.Z[m] += coupling(d_m, m, s_k, k);
      c.X[m] += coupling(t_m, m, s_k, k);
      if (k < m) {
        const Vec3 d_k = diff_dipole(ch[k]);
        const Vec3& t_k = ch[k].mu01;
        c.E += coupling(s_m, m, s_k, k);
        c.XX(m, k) = coupling(t_m, m, t_k, k);
        c.XZ(m, k) = coupling(t_m, m, d_k, k);
        c.ZX(m, k) = coupling(d_m, m, t_k, k);
        c.ZZ(m, k) = coupling(d_m, m, d_k, k);
      }
    }
  }
  return c;
}

PauliOperator full_space_hamiltonian(const FullSpaceCoefficients& c) {
  const int n = static_cast<int>(c.Z.size());
  if (n < 1 || n > kMaxDenseQubits) {
    throw std::invalid_argument("full-space Hamiltonian supports 1.." +
                                std::to_string(kMaxDenseQubits) +
                                " chromophores, got " + std::to_string(n));
  }
  PauliOperator h(n);
  h.add_term(c.E, PauliString(n));
  for (int m = 0; m < n; ++m) {
    h.add_term(c.Z[m], PauliString::single(n, m, Pauli::Z));
    h.add_term(c.X[m], PauliString::single(n, m, Pauli::X));
    for (int k = 0; k < m; ++k) {
      h.add_term(c.XX(m, k), PauliString::pair(n, m, Pauli::X, k, Pauli::X));
      h.add_term(c.XZ(m, k), PauliString::pair(n, m, Pauli::X, k, Pauli::Z));
      h.add_term(c.ZX(m, k), PauliString::pair(n, m, Pauli::Z, k, Pauli::X));
      h.add_term(c.ZZ(m, k), PauliString::pair(n, m, Pauli::Z, k, Pauli::Z));
    }
  }
  return h.canonicalized();
}

PauliOperator full_space_hamiltonian(const ChromophoreFrame& frame) {
  if (frame.size() > kMaxDenseQubits) {
    throw std::invalid_argument("full-space Hamiltonian: too many chromophores");
  }
  return full_space_hamiltonian(full_space_coefficients(frame));
}

PauliOperator encode_projector(std::uint64_t m, std::uint64_t n, int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("encode_projector: invalid qubit count");
  }
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  if (m >= dim || n >= dim) {
    throw std::out_of_range("encode_projector: state index out of range");
  }
  // |0><1| = (X + iY)/2, |1><0| = (X - iY)/2, |0><0| = (I + Z)/2,
  // |1><1| = (I - Z)/2, one factor per qubit.
  const Complex i{0.0, 1.0};
  PauliOperator out = PauliOperator::identity(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    const bool row = (m >> q) & 1U;
    const bool col = (n >> q) & 1U;
    PauliOperator factor(n_qubits);
    if (row == col) {
      factor.add_term(0.5, PauliString(n_qubits));
      factor.add_term(row ? -0.5 : 0.5, PauliString::single(n_qubits, q, Pauli::Z));
    } else {
      factor.add_term(0.5, PauliString::single(n_qubits, q, Pauli::X));
      factor.add_term(row ? -0.5 * i : 0.5 * i,
                      PauliString::single(n_qubits, q, Pauli::Y));
    }
    out = out * factor;
  }
  return out;
}

FrenkelMatrix frenkel_hamiltonian(const ChromophoreFrame& frame) {
  frame.validate();
  const int n = frame.size();
  FrenkelMatrix h;
  h.energies.resize(n);
  h.couplings = Eigen::MatrixXd::Zero(n, n);
  const auto& ch = frame.chromophores;
  for (int m = 0; m < n; ++m) {
    h.energies[m] = ch[m].excitation_energy;
    for (int k = 0; k < m; ++k) {
      const double v =
          dipole_dipole_coupling(ch[m].mu01, ch[k].mu01, ch[m].com, ch[k].com);
      h.couplings(m, k) = v;
      h.couplings(k, m) = v;
    }
  }
  return h;
}

int frenkel_qubits(int n_chromophores) {
  if (n_chromophores < 1) {
    throw std::invalid_argument("need at least one chromophore");
  }
  const auto states = static_cast<std::uint64_t>(n_chromophores) + 1;
  return std::max(1, static_cast<int>(std::bit_width(states - 1)));
}

namespace {

int resolve_frenkel_qubits(int n_chromophores, int n_qubits) {
  const int needed = frenkel_qubits(n_chromophores);
  if (n_qubits == 0) return needed;
  if (n_qubits < needed || n_qubits > kMaxQubits) {
    throw std::invalid_argument(std::to_string(n_chromophores) +
                                " chromophores do not fit in " +
                                std::to_string(n_qubits) + " qubits");
  }
  return n_qubits;
}

}  // namespace

PauliOperator encode_frenkel(const FrenkelMatrix& h, int n_qubits) {
  const int n = h.size();
  const int L = resolve_frenkel_qubits(n, n_qubits);
  PauliOperator out(L);
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) {
      const double v = (m == k) ? h.energies[m] : h.couplings(m, k);
      if (v == 0.0) continue;
      out += encode_projector(static_cast<std::uint64_t>(m + 1),
                              static_cast<std::uint64_t>(k + 1), L) *
             Complex(v);
    }
  }
  out = out.canonicalized();
  // Real symmetric input: imaginary parts are round-off.
  std::vector<PauliTerm> terms;
  for (const auto& t : out.terms()) terms.push_back({t.coeff.real(), t.string});
  return PauliOperator(L, std::move(terms)).canonicalized();
}

PauliOperator dipole_full(const ChromophoreFrame& frame, Axis k) {
  frame.validate();
  const int n = frame.size();
  if (n > kMaxDenseQubits) {
    throw std::invalid_argument("dipole_full: too many chromophores");
  }
  PauliOperator mu(n);
  for (int m = 0; m < n; ++m) {
    const auto& c = frame.chromophores[m];
    mu.add_term(component(sum_dipole(c), k), PauliString(n));
    mu.add_term(component(diff_dipole(c), k), PauliString::single(n, m, Pauli::Z));
    mu.add_term(component(c.mu01, k), PauliString::single(n, m, Pauli::X));
  }
  return mu.canonicalized();
}

PauliOperator dipole_frenkel(const ChromophoreFrame& frame, Axis k,
                             int n_qubits) {
  frame.validate();
  const int n = frame.size();
  const int L = resolve_frenkel_qubits(n, n_qubits);
  PauliOperator mu(L);
  for (int m = 0; m < n; ++m) {
    const double v = component(frame.chromophores[m].mu01, k);
    if (v == 0.0) continue;
    const auto site = static_cast<std::uint64_t>(m + 1);
    mu += (encode_projector(0, site, L) + encode_projector(site, 0, L)) *
          Complex(v);
  }
  mu = mu.canonicalized();
  std::vector<PauliTerm> terms;
  for (const auto& t : mu.terms()) terms.push_back({t.coeff.real(), t.string});
  return PauliOperator(L, std::move(terms)).canonicalized();
}

PauliOperator build_hamiltonian(const ChromophoreFrame& frame, Basis basis) {
  return basis == Basis::full ? full_space_hamiltonian(frame)
                              : encode_frenkel(frenkel_hamiltonian(frame));
}

PauliOperator build_dipole(const ChromophoreFrame& frame, Basis basis, Axis k) {
  return basis == Basis::full ? dipole_full(frame, k) : dipole_frenkel(frame, k);
}

int basis_qubits(Basis basis, int n_chromophores) {
  return basis == Basis::full ? n_chromophores : frenkel_qubits(n_chromophores);
}

}  // namespace condspec
