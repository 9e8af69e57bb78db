#pragma once

#include "condspec/exciton.hpp"
#include "condspec/pauli.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace condspec {

/// Classical bath sampled on a uniform frame grid (times in fs).
struct Trajectory {
  double t0 = 0.0;
  double dt_frame = 2.0;
  std::vector<ChromophoreFrame> frames;

  int n_chromophores() const {
    return frames.empty() ? 0 : frames.front().size();
  }
  double time(std::size_t j) const {
    return t0 + static_cast<double>(j) * dt_frame;
  }
  double t_end() const { return time(frames.empty() ? 0 : frames.size() - 1); }
  /// Throws std::invalid_argument naming the offending frame.
  void validate() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Ornstein-Uhlenbeck site-energy bath with fixed dipoles and geometry.
struct OUConfig {
  int n_chromophores = 1;
  double mean_energy = 4.5;        // eV
  double energy_sigma = 0.05;      // eV, stationary standard deviation
  double correlation_time = 50.0;  // fs
  double dt_frame = 2.0;           // fs
  int n_frames = 51;
  std::uint64_t seed = 0;
  /// Per-chromophore dipoles and centers; excitation_energy is ignored.
  /// Empty selects default_cluster(n_chromophores).
  std::vector<Chromophore> sites;

  void validate() const;

  friend bool operator==(const OUConfig&, const OUConfig&) = default;
};

/// Deterministic bithiophene-like cluster: herringbone pairs on a
/// 5.0 x 6.0 x 7.5 angstrom lattice, |mu01| = 1.9 au along the tilted long
/// axis, small permanent dipoles along the short axis.
std::vector<Chromophore> default_cluster(int n_chromophores);

/// Exact OU discretization
///   E(t + dt) = mean + (E - mean) e^{-dt/tc} + sigma sqrt(1 - e^{-2 dt/tc}) xi,
/// started from the stationary distribution. The RNG stream is seeded with
/// seed + trajectory_index.
Trajectory synthesize_ou(const OUConfig& config,
                         std::uint64_t trajectory_index = 0);

/// JSON Lines: header {"format":"exciton-traj-v1","dt_fs":..,"n_chromophores":..}
/// followed by one {"t_fs":..,"chromophores":[...]} object per frame.
void save_trajectory(const Trajectory& traj, const std::filesystem::path& path);
void write_trajectory(std::ostream& os, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& path);
Trajectory read_trajectory(std::istream& is);

/**
 * Pauli operator whose coefficients are tabulated on the frame grid and
 * linearly interpolated in between. All frames share one list of strings.
 */
class TimeDependentOperator {
 public:
  TimeDependentOperator() = default;
  /// coefficients: one row per frame, one column per string.
  TimeDependentOperator(int n_qubits, std::vector<PauliString> strings,
                        std::vector<double> times, Eigen::MatrixXcd coefficients);

  /// Time-independent operator valid on [t_begin, t_end].
  static TimeDependentOperator constant(const PauliOperator& op,
                                        double t_begin, double t_end);

  int n_qubits() const noexcept { return n_qubits_; }
  const std::vector<PauliString>& strings() const noexcept { return strings_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const Eigen::MatrixXcd& coefficients() const noexcept { return coeffs_; }
  std::size_t frame_count() const noexcept { return times_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  bool is_constant() const noexcept { return constant_; }

  /// Interpolated coefficient row at time t (throws std::out_of_range
  /// outside the tabulated window).
  Eigen::VectorXcd coefficients_at(double t) const;
  PauliOperator at(double t) const;
  PauliOperator frame(std::size_t j) const;

  /// Same operator with `shift` subtracted at every time.
  TimeDependentOperator minus(const PauliOperator& shift) const;

 private:
  int n_qubits_ = 0;
  std::vector<PauliString> strings_;
  std::vector<double> times_;
  Eigen::MatrixXcd coeffs_;
  bool constant_ = false;
};

/// <0...0|H|0...0>.
double ground_energy(const PauliOperator& h);

/// Per-frame Hamiltonian with <G|H|G> subtracted so the reference state
/// |0...0> has zero energy.
TimeDependentOperator hamiltonian_series(const Trajectory& traj, Basis basis);

enum class DipoleMode { averaged, instant };

DipoleMode parse_dipole_mode(std::string_view name);

/// Dipole component k; averaged mode holds the trajectory-mean coefficients
/// fixed, instant mode interpolates the per-frame operator.
TimeDependentOperator dipole_series(const Trajectory& traj, Basis basis, Axis k,
                                    DipoleMode mode = DipoleMode::averaged);

/// Builds a series from per-frame operators on their union of strings.
TimeDependentOperator make_series(const std::vector<PauliOperator>& per_frame,
                                  std::vector<double> times);

}  // namespace condspec
