#pragma once

#include "condspec/pauli.hpp"
#include "condspec/trajectory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace condspec {

/// Integration window and output cadence (fs).
struct PropagationGrid {
  double t0 = 0.0;
  double t1 = 100.0;
  double substep = 0.005;
  double record_every = 0.05;

  /// Throws std::invalid_argument unless t0 < t1, substep <= record_every,
  /// and both the window and record_every are integer multiples of their
  /// respective steps.
  void validate() const;
  std::size_t record_count() const;      ///< number of recorded times incl. t0
  std::size_t substeps_per_record() const;
  double record_time(std::size_t i) const;
  std::vector<double> record_times() const;
};

struct PropagateOptions {
  /// Re-run with half the substep and require recorded states to agree.
  bool check_convergence = false;
  double convergence_tol = 1e-8;
  /// Maximum tolerated |norm(t) - norm(t0)|.
  double norm_tol = 1e-10;
};

struct TimedState {
  double t;
  StateVector state;
};

/// States of a block propagation; states[i] holds one column per input state.
struct BlockEvolution {
  std::vector<double> times;
  std::vector<Eigen::MatrixXcd> states;
  double max_norm_drift = 0.0;
};

/// |0...0>.
StateVector ground_state(int n_qubits);

/// block <- exp(-i h dt / hbar) block by scaled Taylor expansion, truncated at
/// machine precision. h must be Hermitian for the result to be unitary.
void apply_propagator(const PauliOperator& h, double dt, Eigen::MatrixXcd& block);

/// exp(i angle op) state for Hermitian op, by scaled Taylor expansion.
StateVector exp_i_operator(const PauliOperator& op, double angle,
                           const StateVector& state);

/**
 * Time-ordered propagation s(t) = T exp[-(i/hbar) int H] s0.
 *
 * Each substep applies exp(-i H(t + dt/2) dt / hbar), the Hamiltonian frozen
 * at the substep midpoint. Throws NumericError for a non-Hermitian series,
 * norm drift above options.norm_tol, or a failed convergence gate.
 */
std::vector<TimedState> propagate(const TimeDependentOperator& h,
                                  const StateVector& s0,
                                  const PropagationGrid& grid,
                                  const PropagateOptions& options = {});

/// Same propagation applied to every column of `block`.
BlockEvolution propagate_block(const TimeDependentOperator& h,
                               const Eigen::MatrixXcd& block,
                               const PropagationGrid& grid,
                               const PropagateOptions& options = {});

}  // namespace condspec
