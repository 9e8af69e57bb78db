#pragma once

#include "condspec/correlation.hpp"
#include "condspec/exciton.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace condspec {

/// Uniform frequency grid in eV, endpoints included.
struct OmegaGrid {
  double min_ev = 2.0;
  double max_ev = 7.0;
  int points = 2000;

  void validate() const;
  double step() const { return (max_ev - min_ev) / (points - 1); }
  double at(int i) const { return min_ev + i * step(); }
  std::vector<double> values() const;
};

enum class Route { dynamic, static_ };
std::string_view to_string(Route r);

struct Spectrum {
  std::vector<double> omega;
  std::vector<double> intensity;
  double tau_fs = 0.0;
  Route route = Route::dynamic;
  std::string engine = "exact";
  int ensemble_size = 1;
  std::vector<std::string> warnings;
};

struct Peak {
  double position = 0.0;  ///< eV
  double height = 0.0;
  double fwhm = 0.0;      ///< eV; 0 if a half-height crossing is off-grid
};

/// Scales the maximum intensity to 1 (no-op for an all-zero spectrum).
void normalize(Spectrum& s);

/**
 * I(w) = 2 Re int_0^T e^{i w t / hbar} C(t) e^{-t/tau} dt by the trapezoidal
 * rule on the TCF grid; tiny negative values from discretization are clipped
 * and the result is normalized to a maximum of 1. Adds a warning when the
 * window T is shorter than 3 tau.
 */
Spectrum damped_fourier(const TcfSeries& c, double tau_fs, const OmegaGrid& grid);

/**
 * Ensemble spectrum: each frame's shifted Hamiltonian is diagonalized and
 * sum_a |<a|mu_k|G>|^2 * g / ((w - E_a)^2 + g^2), g = hbar / tau, is averaged
 * over frames and the three Cartesian components, then normalized.
 */
Spectrum static_spectrum(const std::vector<ChromophoreFrame>& frames, Basis basis,
                         double tau_fs, const OmegaGrid& grid);

/// Local maxima above 5% of the global maximum, ascending in energy. The
/// position is refined by a parabola through the three highest samples; the
/// FWHM uses linearly interpolated half-height crossings.
std::vector<Peak> peak_analysis(const Spectrum& s);

/// "omega_ev,intensity" CSV preceded by "# key: value" metadata lines.
void write_spectrum(std::ostream& os, const Spectrum& s);
void save_spectrum(const Spectrum& s, const std::filesystem::path& path);
Spectrum read_spectrum(std::istream& is);
Spectrum load_spectrum(const std::filesystem::path& path);

/// Peak tables of both spectra and their largest pointwise difference.
/// Throws std::invalid_argument when the grids differ.
std::string compare_report(const Spectrum& a, const Spectrum& b);

}  // namespace condspec
