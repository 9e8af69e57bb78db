#include "condspec/exact_engine.hpp"

#include "condspec/errors.hpp"
#include "condspec/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace condspec {

namespace {

std::size_t checked_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double k = std::round(r);
  if (k < 1.0 || std::abs(r - k) > 1e-6 * std::max(1.0, k)) {
    std::ostringstream os;
    os << what << " (" << num << " / " << den << " is not a positive integer)";
    throw std::invalid_argument(os.str());
  }
  return static_cast<std::size_t>(k);
}

// Dense realization pays off once the term count is comparable to the
// dimension; small registers only.
bool use_dense(const PauliOperator& h) {
  const auto dim = std::size_t{1} << h.n_qubits();
  return h.n_qubits() <= 7 && h.size() * 2 > dim;
}

void check_hermitian(const TimeDependentOperator& h) {
  const auto& c = h.coefficients();
  if (c.size() == 0) return;
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if (c.imag().cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NumericError("non-Hermitian Hamiltonian: complex Pauli coefficients");
  }
}

}  // namespace

void PropagationGrid::validate() const {
  if (!(t1 > t0)) throw std::invalid_argument("propagation grid needs t0 < t1");
  if (!(substep > 0.0) || !(record_every > 0.0)) {
    throw std::invalid_argument("substep and record_every must be positive");
  }
  if (substep > record_every * (1.0 + 1e-12)) {
    throw std::invalid_argument("substep must not exceed record_every");
  }
  checked_ratio(record_every, substep, "record_every must be a multiple of substep");
  checked_ratio(t1 - t0, record_every, "window must be a multiple of record_every");
}

std::size_t PropagationGrid::record_count() const {
  return checked_ratio(t1 - t0, record_every,
                       "window must be a multiple of record_every") + 1;
}

std::size_t PropagationGrid::substeps_per_record() const {
  return checked_ratio(record_every, substep,
                       "record_every must be a multiple of substep");
}

double PropagationGrid::record_time(std::size_t i) const {
  return t0 + static_cast<double>(i) * record_every;
}

std::vector<double> PropagationGrid::record_times() const {
  std::vector<double> out(record_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = record_time(i);
  return out;
}

StateVector ground_state(int n_qubits) { return StateVector::basis(n_qubits, 0); }

void apply_propagator(const PauliOperator& h, double dt, Eigen::MatrixXcd& block) {
  const double scaled = h.one_norm() * std::abs(dt) / units::kHbarEvFs;
  if (scaled == 0.0) return;
  if (!std::isfinite(scaled) || scaled > 5e4) {
    std::ostringstream os;
    os << "propagator step too stiff: |H| dt / hbar = " << scaled;
    throw NumericError(os.str());
  }
  const int slices = std::max(1, static_cast<int>(std::ceil(scaled / 0.5)));
  const Complex factor(0.0, -dt / units::kHbarEvFs / slices);

  const bool dense = use_dense(h);
  Eigen::MatrixXcd hd;
  if (dense) hd = to_dense(h);

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (int s = 0; s < slices; ++s) {
    Eigen::MatrixXcd term = block;
    const double ref = std::max(block.norm(), 1e-300);
    for (int k = 1; k <= 60; ++k) {
      term = dense ? Eigen::MatrixXcd(hd * term) : apply_operator(h, term);
      term *= factor / static_cast<double>(k);
      block += term;
      if (term.norm() <= 0.25 * kEps * ref) break;
    }
  }
}

StateVector exp_i_operator(const PauliOperator& op, double angle,
                           const StateVector& state) {
  if (!op.is_hermitian()) {
    throw std::invalid_argument("exp_i_operator: operator is not Hermitian");
  }
  Eigen::MatrixXcd block = state.amplitudes();
  // exp(i angle op) = exp(-i op dt / hbar) with dt = -angle * hbar.
  apply_propagator(op, -angle * units::kHbarEvFs, block);
  return StateVector(state.n_qubits(), block.col(0));
}

BlockEvolution propagate_block(const TimeDependentOperator& h,
                               const Eigen::MatrixXcd& block,
                               const PropagationGrid& grid,
                               const PropagateOptions& options) {
  grid.validate();
  if (block.rows() != (Eigen::Index{1} << h.n_qubits())) {
    throw std::invalid_argument("propagate: state and Hamiltonian qubit counts differ");
  }
  check_hermitian(h);
  // Throws std::out_of_range when the grid leaves the tabulated window.
  h.coefficients_at(grid.t0);
  h.coefficients_at(grid.t1);

  const std::size_t records = grid.record_count();
  const std::size_t per_record = grid.substeps_per_record();
  const double dt = grid.record_every / static_cast<double>(per_record);

  BlockEvolution out;
  out.times.reserve(records);
  out.states.reserve(records);
  const Eigen::VectorXd norms0 = block.colwise().norm().transpose();

  Eigen::MatrixXcd current = block;
  out.times.push_back(grid.t0);
  out.states.push_back(current);

  const PauliOperator frozen =
      h.is_constant() ? h.at(h.t_begin()) : PauliOperator{};
  for (std::size_t r = 1; r < records; ++r) {
    const double start = grid.record_time(r - 1);
    for (std::size_t s = 0; s < per_record; ++s) {
      const double mid = start + (static_cast<double>(s) + 0.5) * dt;
      if (h.is_constant()) {
        apply_propagator(frozen, dt, current);
      } else {
        apply_propagator(h.at(mid), dt, current);
      }
    }
    const double drift =
        (current.colwise().norm().transpose() - norms0).cwiseAbs().maxCoeff();
    out.max_norm_drift = std::max(out.max_norm_drift, drift);
    out.times.push_back(grid.record_time(r));
    out.states.push_back(current);
  }

  if (out.max_norm_drift > options.norm_tol * std::max(1.0, norms0.maxCoeff())) {
    std::ostringstream os;
    os << "propagation norm drift " << out.max_norm_drift << " exceeds "
       << options.norm_tol;
    throw NumericError(os.str());
  }

  if (options.check_convergence) {
    PropagationGrid fine = grid;
    fine.substep = grid.substep / 2.0;
    PropagateOptions inner = options;
    inner.check_convergence = false;
    const auto refined = propagate_block(h, block, fine, inner);
    double worst = 0.0;
    for (std::size_t r = 0; r < records; ++r) {
      worst = std::max(worst, (refined.states[r] - out.states[r]).norm());
    }
    if (worst > options.convergence_tol) {
      std::ostringstream os;
      os << "convergence gate failed: halving the substep moved the states by "
         << worst << " (tolerance " << options.convergence_tol << ")";
      throw NumericError(os.str());
    }
  }
  return out;
}

std::vector<TimedState> propagate(const TimeDependentOperator& h,
                                  const StateVector& s0,
                                  const PropagationGrid& grid,
                                  const PropagateOptions& options) {
  if (s0.n_qubits() != h.n_qubits()) {
    throw std::invalid_argument("propagate: state and Hamiltonian qubit counts differ");
  }
  const auto block = propagate_block(h, s0.amplitudes(), grid, options);
  std::vector<TimedState> out;
  out.reserve(block.times.size());
  for (std::size_t i = 0; i < block.times.size(); ++i) {
    out.push_back({block.times[i], StateVector(s0.n_qubits(), block.states[i].col(0))});
  }
  return out;
}

}  // namespace condspec
