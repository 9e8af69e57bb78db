#pragma once

#include "condspec/exact_engine.hpp"
#include "condspec/exciton.hpp"
#include "condspec/pauli.hpp"
#include "condspec/trajectory.hpp"
#include "condspec/vqa.hpp"

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace condspec {

enum class Engine { exact, vqa };
Engine parse_engine(std::string_view name);
std::string_view to_string(Engine e);

enum class TcfMethod { direct, small_lambda };
TcfMethod parse_tcf_method(std::string_view name);
std::string_view to_string(TcfMethod m);

struct EngineOptions {
  Engine engine = Engine::exact;
  PropagateOptions exact;
  VqaOptions vqa;
  /// Evolve under H - E_rot P with P = I - |0><0| and restore the phase
  /// afterwards. Only valid when H leaves |0...0> invariant (Frenkel basis).
  std::optional<double> rotating_frame;
  /// Worker threads for independent VQA evolutions.
  int jobs = 1;
};

/// Recorded states; states[i] has one column per initial state.
struct EvolvedStates {
  std::vector<double> times;
  std::vector<Eigen::MatrixXcd> states;
  double max_norm_drift = 0.0;

  /// Index of the record at time t; throws std::out_of_range off-grid.
  std::size_t record_index(double t) const;
};

/// Evolves every column of `initial` (normalized states) under h.
EvolvedStates evolve_states(const TimeDependentOperator& h,
                            const Eigen::MatrixXcd& initial,
                            const PropagationGrid& grid,
                            const EngineOptions& options);

/// I - |0...0><0...0|.
PauliOperator excitation_projector(int n_qubits);

enum class Component { x, y, z, iso };
std::string_view to_string(Component c);

struct TcfSeries {
  std::vector<double> times;
  Eigen::VectorXcd values;
  Component component = Component::iso;
  int ensemble_size = 1;

  std::size_t size() const noexcept { return times.size(); }
  /// Throws std::invalid_argument unless times are uniform and values finite.
  void validate() const;
};

/// <G| B |evolved> * prep_norm, the bra being B^dagger |G>.
Complex transition_amplitude_direct(const PauliString& b,
                                    const StateVector& evolved,
                                    const StateVector& g,
                                    double prep_norm = 1.0);

/// Same amplitude read from recorded evolution column `column` at time t.
Complex transition_amplitude_direct(const PauliString& b,
                                    const EvolvedStates& evolution,
                                    std::size_t column, double t,
                                    const StateVector& g,
                                    double prep_norm = 1.0);

/**
 * One quadrature of <G|B|evolved> from a simulated ancilla circuit: the
 * ancilla starts in (|0> + e^{i phi}|1>)/sqrt(2), its |0> branch carries the
 * evolved state and its |1> branch the reference g, B acts controlled on the
 * |0> branch, and <X_ancilla> is returned. phi = 0 gives Re, phi = pi/2 Im.
 */
double transition_amplitude_hadamard(const PauliString& b,
                                     const StateVector& evolved,
                                     const StateVector& g, double phi);

/// Semiclassical dipole correlation C(t) = <G| mu(t) U(t) mu(0) |G> for
/// each Cartesian component, by decomposing mu(0) into Pauli terms.
std::array<TcfSeries, 3> tcf_direct(
    const TimeDependentOperator& h,
    const std::array<TimeDependentOperator, 3>& mu,
    const PropagationGrid& grid, const EngineOptions& options);

TcfSeries tcf_direct(const TimeDependentOperator& h,
                     const TimeDependentOperator& mu,
                     const PropagationGrid& grid, const EngineOptions& options,
                     Component component = Component::x);

/// Unitary estimator
///   C = [<e^{i l B}G|+> - <e^{-i l B}G|+> - <e^{i l B}G|-> + <e^{-i l B}G|->] / (4 l^2)
/// with |+-> = U(t) e^{+-i l mu(0)} |G> and B = mu(t).
TcfSeries tcf_small_lambda(const TimeDependentOperator& h,
                           const TimeDependentOperator& mu,
                           const PropagationGrid& grid,
                           const EngineOptions& options, double lambda,
                           Component component = Component::x);

std::array<TcfSeries, 3> tcf_small_lambda(
    const TimeDependentOperator& h,
    const std::array<TimeDependentOperator, 3>& mu,
    const PropagationGrid& grid, const EngineOptions& options, double lambda);

TcfSeries isotropic_average(const TcfSeries& cx, const TcfSeries& cy,
                            const TcfSeries& cz);

/// Pointwise mean, summed in member order.
TcfSeries ensemble_average(const std::vector<TcfSeries>& members);

/// |c_ref(t) - c_test(t)| / |c_ref(0)|.
std::vector<double> relative_difference(const TcfSeries& c_ref,
                                        const TcfSeries& c_test);

/// "t_fs,re,im" CSV.
void write_tcf(std::ostream& os, const TcfSeries& c);
void save_tcf(const TcfSeries& c, const std::filesystem::path& path);
TcfSeries read_tcf(std::istream& is, Component component = Component::iso);
TcfSeries load_tcf(const std::filesystem::path& path,
                   Component component = Component::iso);

/// "t_fs,delta_c" CSV.
void write_delta_c(std::ostream& os, const std::vector<double>& times,
                   const std::vector<double>& delta);

}  // namespace condspec
