#pragma once

#include "condspec/pauli.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace condspec {

using Vec3 = Eigen::Vector3d;

enum class Axis { x = 0, y = 1, z = 2 };
inline constexpr Axis kAxes[] = {Axis::x, Axis::y, Axis::z};

/// Which qubit encoding of the exciton problem to build.
enum class Basis { full, frenkel };

Basis parse_basis(std::string_view name);
std::string_view to_string(Basis b);

/// Electronic data of one two-level chromophore at one instant.
/// Energies in eV, dipoles in atomic units, positions in angstrom.
struct Chromophore {
  double excitation_energy = 0.0;
  Vec3 mu00 = Vec3::Zero();  ///< ground-state dipole
  Vec3 mu11 = Vec3::Zero();  ///< excited-state dipole
  Vec3 mu01 = Vec3::Zero();  ///< transition dipole
  Vec3 com = Vec3::Zero();   ///< center of mass

  friend bool operator==(const Chromophore&, const Chromophore&) = default;
};

struct ChromophoreFrame {
  std::vector<Chromophore> chromophores;

  int size() const noexcept { return static_cast<int>(chromophores.size()); }
  /// Throws std::invalid_argument on non-finite data, N < 1, or centers
  /// closer than kMinSeparation.
  void validate() const;

  friend bool operator==(const ChromophoreFrame&,
                         const ChromophoreFrame&) = default;
};

inline constexpr double kMinSeparation = 0.1;  // angstrom

/// Coefficients of the one-qubit-per-chromophore Hamiltonian
///   E I + sum_m (Z_m Z_m + X_m X_m)
///       + sum_{n<m} (XX_mn X_m X_n + XZ_mn X_m Z_n + ZX_mn Z_m X_n + ZZ_mn Z_m Z_n).
/// Pair arrays are indexed (m, n) with n < m; only that triangle is filled.
struct FullSpaceCoefficients {
  double E = 0.0;
  Eigen::VectorXd Z;
  Eigen::VectorXd X;
  Eigen::MatrixXd XX;
  Eigen::MatrixXd XZ;
  Eigen::MatrixXd ZX;
  Eigen::MatrixXd ZZ;
};

/// Single-excitation Hamiltonian: site energies and symmetric couplings (eV).
struct FrenkelMatrix {
  Eigen::VectorXd energies;
  Eigen::MatrixXd couplings;

  int size() const noexcept { return static_cast<int>(energies.size()); }
  /// The (N x N) block E + V.
  Eigen::MatrixXd site_matrix() const;
};

/// Point-dipole interaction [mu_a.mu_b - 3 (mu_a.r)(mu_b.r)] / r^3 in eV, with
/// dipoles in atomic units and positions in angstrom.
double dipole_dipole_coupling(const Vec3& mu_a, const Vec3& mu_b,
                              const Vec3& r_a, const Vec3& r_b);

/// Matrix elements of the full-space Hamiltonian. One-body terms use
/// (0|h|0) = (0|h|1) = 0 and (1|h|1) = E_m; the two-body transition densities
/// |S), |D), |T) enter the dipole formula as (mu00 + mu11)/2, (mu00 - mu11)/2
/// and mu01.
FullSpaceCoefficients full_space_coefficients(const ChromophoreFrame& frame);

PauliOperator full_space_hamiltonian(const ChromophoreFrame& frame);
PauliOperator full_space_hamiltonian(const FullSpaceCoefficients& c);

/// Pauli expansion of |m><n| on L qubits (bit q of m is qubit q).
PauliOperator encode_projector(std::uint64_t m, std::uint64_t n, int n_qubits);

FrenkelMatrix frenkel_hamiltonian(const ChromophoreFrame& frame);

/// ceil(log2(N + 1)), at least one qubit.
int frenkel_qubits(int n_chromophores);

/// Encodes the ground state as basis index 0 and site m as index m.
/// n_qubits = 0 selects frenkel_qubits(N).
PauliOperator encode_frenkel(const FrenkelMatrix& h, int n_qubits = 0);

/// sum_m [mu_I I + mu_Z Z_m + mu_X X_m] for Cartesian component k.
PauliOperator dipole_full(const ChromophoreFrame& frame, Axis k);

/// sum_m mu01_m^k (|0><m| + |m><0|) in the binary encoding.
PauliOperator dipole_frenkel(const ChromophoreFrame& frame, Axis k,
                             int n_qubits = 0);

/// Hamiltonian / dipole in the requested basis.
PauliOperator build_hamiltonian(const ChromophoreFrame& frame, Basis basis);
PauliOperator build_dipole(const ChromophoreFrame& frame, Basis basis, Axis k);
int basis_qubits(Basis basis, int n_chromophores);

}  // namespace condspec
