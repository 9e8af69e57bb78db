#pragma once

#include "condspec/exact_engine.hpp"
#include "condspec/pauli.hpp"
#include "condspec/trajectory.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <vector>

namespace condspec {

/// Product ansatz psi(theta) = prod_k exp(i theta_k R_k) |initial>, with the
/// k = 0 factor applied first.
struct Ansatz {
  int n_qubits = 0;
  std::vector<PauliString> generators;
  StateVector initial_state;

  std::size_t size() const noexcept { return generators.size(); }
};

/// Single-qubit X and Z on every qubit (single-qubit Y omitted for real
/// Hamiltonians), then every two-qubit P_m Q_n with m < n and P, Q in
/// {X, Y, Z}. Singles are ordered by qubit then letter; pairs
/// lexicographically by (m, n, P, Q). 2n + 9 n(n-1)/2 generators.
Ansatz build_ansatz(int n_qubits, const StateVector& initial_state);

StateVector ansatz_state(const Ansatz& a, const Eigen::VectorXd& theta);

/// d psi / d theta_k (not normalized).
StateVector tangent_state(const Ansatz& a, const Eigen::VectorXd& theta,
                          std::size_t k);

/// All tangents as columns, plus psi itself.
struct AnsatzJet {
  Eigen::VectorXcd psi;
  Eigen::MatrixXcd tangents;
};
AnsatzJet ansatz_jet(const Ansatz& a, const Eigen::VectorXd& theta);

/// How the unrepresented global phase is handled.
///   none    - the plain M/V above; the ansatz carries the phase itself.
///   tracked - M and V projected orthogonal to i psi, with a separate phase
///             phi_dot = -<H>/hbar - sum_k Im<psi|d_k psi> theta_dot_k
///             multiplied onto the state.
enum class PhaseMode { none, tracked };

/// McLachlan linear system M theta_dot = V with
///   M_kl = Re <d_k psi | d_l psi>,  V_k = Im <d_k psi | H | psi> / hbar.
/// With PhaseMode::tracked, M -= a a^T and V += a <H> / hbar where
/// a_k = Im <psi | d_k psi>.
struct McLachlanSystem {
  Eigen::MatrixXd M;
  Eigen::VectorXd V;
  Eigen::VectorXd overlap;  ///< a, tracked mode only
  double energy = 0.0;      ///< <psi|H|psi>, tracked mode only
};

McLachlanSystem mclachlan_system(const Ansatz& a, const Eigen::VectorXd& theta,
                                 const PauliOperator& h,
                                 PhaseMode phase = PhaseMode::none);

struct StepSolution {
  Eigen::VectorXd theta_dot;
  double residual = 0.0;   ///< |M theta_dot - V|
  double condition = 1.0;  ///< ratio of extreme LDLT pivots of M + eps I
  double eps = 0.0;
};

/// Solves (M + eps I) theta_dot = V. The default eps is
/// 1e-8 * max(trace(M) / dim, 1).
StepSolution solve_step(const Eigen::MatrixXd& M, const Eigen::VectorXd& V,
                        std::optional<double> eps = std::nullopt);

enum class Integrator { rk4, euler };

Integrator parse_integrator(std::string_view name);
PhaseMode parse_phase_mode(std::string_view name);

struct VqaOptions {
  Integrator integrator = Integrator::rk4;
  PhaseMode phase = PhaseMode::tracked;
  std::optional<double> eps;
  /// Abort threshold on the per-step solve residual.
  double max_residual = 0.1;
};

struct ThetaTrajectory {
  std::vector<double> times;            ///< record times
  std::vector<Eigen::VectorXd> theta;   ///< parameters at record times
  std::vector<double> phase;            ///< tracked global phase (0 if none)
  // Per integration step diagnostics.
  std::vector<double> step_times;
  std::vector<double> step_theta_norm;
  std::vector<double> step_residual;
  std::vector<double> step_condition;

  double max_residual() const;
};

/**
 * Integrates theta_dot = solve_step(mclachlan_system(theta, H(t))) from
 * theta(t0) = 0 at step grid.substep. Throws NumericError when a step
 * residual exceeds options.max_residual.
 */
ThetaTrajectory evolve_variational(const TimeDependentOperator& h,
                                   const Ansatz& a, const PropagationGrid& grid,
                                   const VqaOptions& options = {});

/// e^{i phase} psi(theta) at every record time.
std::vector<StateVector> variational_states(const Ansatz& a,
                                            const ThetaTrajectory& traj);

/// "t theta_norm residual" per integration step.
void write_diagnostics(std::ostream& os, const ThetaTrajectory& traj);

}  // namespace condspec
