#pragma once

namespace condspec::units {

/// Reduced Planck constant in eV*fs.
inline constexpr double kHbarEvFs = 0.6582119569;
inline constexpr double kHartreeEv = 27.211386245988;
inline constexpr double kBohrAngstrom = 0.529177210903;

/// Dipole-dipole prefactor: (1 e*bohr)^2 / (1 angstrom)^3 expressed in eV,
/// i.e. Hartree * bohr^3 / angstrom^3 ~= 4.0324 eV.
inline constexpr double kDipoleCouplingEv =
    kHartreeEv * kBohrAngstrom * kBohrAngstrom * kBohrAngstrom;

}  // namespace condspec::units
