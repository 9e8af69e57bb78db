#include "condspec/vqa.hpp"

#include "condspec/errors.hpp"
#include "condspec/units.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace condspec {

namespace {

using RowMajorBlock =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Generator tables: (R s)[b] = r[b] * s[b ^ x].
struct CompiledGenerator {
  std::uint64_t x = 0;
  std::vector<Complex> r;
};

class CompiledAnsatz {
 public:
  explicit CompiledAnsatz(const Ansatz& a) : dim_(std::size_t{1} << a.n_qubits) {
    if (a.initial_state.n_qubits() != a.n_qubits) {
      throw std::invalid_argument("ansatz initial state has wrong qubit count");
    }
    gens_.reserve(a.size());
    for (const auto& g : a.generators) {
      if (g.n_qubits() != a.n_qubits) {
        throw std::invalid_argument("ansatz generator has wrong qubit count");
      }
      CompiledGenerator c;
      c.x = g.x_mask();
      c.r.resize(dim_);
      for (std::uint64_t b = 0; b < dim_; ++b) c.r[b] = g.phase_on(b ^ c.x);
      gens_.push_back(std::move(c));
    }
  }

  std::size_t size() const { return gens_.size(); }
  std::size_t dim() const { return dim_; }

  /// rows of `block` <- exp(i theta R_k) applied to each column.
  void rotate(std::size_t k, double theta, RowMajorBlock& block, Eigen::Index cols) const {
    const auto& g = gens_[k];
    const double c = std::cos(theta);
    const Complex is(0.0, std::sin(theta));
    if (g.x == 0) {
      for (std::uint64_t b = 0; b < dim_; ++b) {
        block.row(static_cast<Eigen::Index>(b)).head(cols) *= (c + is * g.r[b]);
      }
      return;
    }
    for (std::uint64_t b = 0; b < dim_; ++b) {
      const std::uint64_t p = b ^ g.x;
      if (p < b) continue;
      const auto rb = static_cast<Eigen::Index>(b);
      const auto rp = static_cast<Eigen::Index>(p);
      const Eigen::RowVectorXcd lo = block.row(rb).head(cols);
      const Eigen::RowVectorXcd hi = block.row(rp).head(cols);
      block.row(rb).head(cols) = c * lo + (is * g.r[b]) * hi;
      block.row(rp).head(cols) = c * hi + (is * g.r[p]) * lo;
    }
  }

  /// column `dst` <- i R_k column `src`.
  void generator_times_i(std::size_t k, RowMajorBlock& block, Eigen::Index src,
                         Eigen::Index dst) const {
    const auto& g = gens_[k];
    const Complex i(0.0, 1.0);
    for (std::uint64_t b = 0; b < dim_; ++b) {
      block(static_cast<Eigen::Index>(b), dst) =
          i * g.r[b] * block(static_cast<Eigen::Index>(b ^ g.x), src);
    }
  }

  /// Column 0: psi(theta); column k + 1: d psi / d theta_k.
  void jet(const Eigen::VectorXcd& initial, const Eigen::VectorXd& theta,
           RowMajorBlock& block) const {
    const auto K = static_cast<Eigen::Index>(gens_.size());
    block.resize(static_cast<Eigen::Index>(dim_), K + 1);
    block.col(0) = initial;
    for (Eigen::Index k = 0; k < K; ++k) {
      rotate(static_cast<std::size_t>(k), theta[k], block, k + 1);
      generator_times_i(static_cast<std::size_t>(k), block, 0, k + 1);
    }
  }

  Eigen::VectorXcd state(const Eigen::VectorXcd& initial,
                         const Eigen::VectorXd& theta) const {
    RowMajorBlock block(static_cast<Eigen::Index>(dim_), 1);
    block.col(0) = initial;
    for (std::size_t k = 0; k < gens_.size(); ++k) {
      rotate(k, theta[static_cast<Eigen::Index>(k)], block, 1);
    }
    return block.col(0);
  }

 private:
  std::size_t dim_;
  std::vector<CompiledGenerator> gens_;
};

void check_theta(const Ansatz& a, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != a.size()) {
    throw std::invalid_argument("parameter vector length " +
                                std::to_string(theta.size()) +
                                " does not match " + std::to_string(a.size()) +
                                " generators");
  }
}

/// Real and imaginary parts stacked: X = [Re T; Im T].
Eigen::MatrixXd stack_real(const RowMajorBlock& t, Eigen::Index first, Eigen::Index cols) {
  const Eigen::Index dim = t.rows();
  Eigen::MatrixXd x(2 * dim, cols);
  x.topRows(dim) = t.middleCols(first, cols).real();
  x.bottomRows(dim) = t.middleCols(first, cols).imag();
  return x;
}

struct Derivative {
  Eigen::VectorXd theta_dot;
  double phase_dot = 0.0;
  double residual = 0.0;
  double condition = 1.0;
};

class McLachlanRhs {
 public:
  McLachlanRhs(const Ansatz& a, const VqaOptions& options)
      : compiled_(a), initial_(a.initial_state.amplitudes()), options_(options) {}

  Derivative operator()(const PauliOperator& h, const Eigen::VectorXd& theta) {
    compiled_.jet(initial_, theta, block_);
    const auto K = static_cast<Eigen::Index>(compiled_.size());
    const Eigen::Index dim = block_.rows();
    const Eigen::MatrixXd x = stack_real(block_, 1, K);

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(K, K);
    M.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    M.triangularView<Eigen::StrictlyUpper>() = M.transpose();

    const Eigen::VectorXcd psi = block_.col(0);
    Eigen::VectorXcd hpsi = Eigen::VectorXcd::Zero(dim);
    apply_operator_accumulate(h, psi, hpsi);

    Eigen::VectorXd w(2 * dim);
    w.head(dim) = hpsi.imag();
    w.tail(dim) = -hpsi.real();
    Eigen::VectorXd V = x.transpose() * w / units::kHbarEvFs;

    Eigen::VectorXd overlap;  // Im <psi | d_k psi>
    double energy = 0.0;
    if (options_.phase == PhaseMode::tracked) {
      Eigen::VectorXd p(2 * dim);
      p.head(dim) = -psi.imag();
      p.tail(dim) = psi.real();
      overlap = x.transpose() * p;
      energy = psi.dot(hpsi).real();
      M -= overlap * overlap.transpose();
      V += overlap * (energy / units::kHbarEvFs);
    }

    const StepSolution sol = solve_step(M, V, options_.eps);
    Derivative d;
    d.theta_dot = sol.theta_dot;
    d.residual = sol.residual;
    d.condition = sol.condition;
    if (options_.phase == PhaseMode::tracked) {
      d.phase_dot = -energy / units::kHbarEvFs - overlap.dot(sol.theta_dot);
    }
    return d;
  }

 private:
  CompiledAnsatz compiled_;
  Eigen::VectorXcd initial_;
  VqaOptions options_;
  RowMajorBlock block_;
};

}  // namespace

Ansatz build_ansatz(int n_qubits, const StateVector& initial_state) {
  if (n_qubits < 1) throw std::invalid_argument("ansatz needs >= 1 qubit");
  if (initial_state.n_qubits() != n_qubits) {
    throw std::invalid_argument("ansatz initial state has wrong qubit count");
  }
  Ansatz a;
  a.n_qubits = n_qubits;
  a.initial_state = initial_state;
  for (int q = 0; q < n_qubits; ++q) {
    a.generators.push_back(PauliString::single(n_qubits, q, Pauli::X));
    a.generators.push_back(PauliString::single(n_qubits, q, Pauli::Z));
  }
  constexpr Pauli kLetters[] = {Pauli::X, Pauli::Y, Pauli::Z};
  for (int m = 0; m < n_qubits; ++m) {
    for (int n = m + 1; n < n_qubits; ++n) {
      for (Pauli p : kLetters) {
        for (Pauli q : kLetters) {
          a.generators.push_back(PauliString::pair(n_qubits, m, p, n, q));
        }
      }
    }
  }
  return a;
}

StateVector ansatz_state(const Ansatz& a, const Eigen::VectorXd& theta) {
  check_theta(a, theta);
  const CompiledAnsatz c(a);
  return StateVector(a.n_qubits, c.state(a.initial_state.amplitudes(), theta));
}

AnsatzJet ansatz_jet(const Ansatz& a, const Eigen::VectorXd& theta) {
  check_theta(a, theta);
  const CompiledAnsatz c(a);
  RowMajorBlock block;
  c.jet(a.initial_state.amplitudes(), theta, block);
  AnsatzJet jet;
  jet.psi = block.col(0);
  jet.tangents = block.rightCols(block.cols() - 1);
  return jet;
}

StateVector tangent_state(const Ansatz& a, const Eigen::VectorXd& theta,
                          std::size_t k) {
  if (k >= a.size()) throw std::out_of_range("tangent index out of range");
  const auto jet = ansatz_jet(a, theta);
  return StateVector(a.n_qubits, jet.tangents.col(static_cast<Eigen::Index>(k)));
}

McLachlanSystem mclachlan_system(const Ansatz& a, const Eigen::VectorXd& theta,
                                 const PauliOperator& h, PhaseMode phase) {
  check_theta(a, theta);
  if (h.n_qubits() != a.n_qubits) {
    throw std::invalid_argument("mclachlan_system: qubit-count mismatch");
  }
  if (!h.is_hermitian()) {
    throw NumericError("mclachlan_system: Hamiltonian is not Hermitian");
  }
  const auto jet = ansatz_jet(a, theta);
  Eigen::VectorXcd hpsi = Eigen::VectorXcd::Zero(jet.psi.size());
  apply_operator_accumulate(h, jet.psi, hpsi);

  McLachlanSystem sys;
  sys.M = (jet.tangents.adjoint() * jet.tangents).real();
  sys.V = (jet.tangents.adjoint() * hpsi).imag() / units::kHbarEvFs;
  if (phase == PhaseMode::tracked) {
    sys.overlap = (jet.psi.adjoint() * jet.tangents).imag().transpose();
    sys.energy = jet.psi.dot(hpsi).real();
    sys.M -= sys.overlap * sys.overlap.transpose();
    sys.V += sys.overlap * (sys.energy / units::kHbarEvFs);
  }
  return sys;
}

StepSolution solve_step(const Eigen::MatrixXd& M, const Eigen::VectorXd& V,
                        std::optional<double> eps) {
  if (M.rows() != M.cols() || M.rows() != V.size()) {
    throw std::invalid_argument("solve_step: M must be square and match V");
  }
  const auto n = M.rows();
  StepSolution out;
  if (n == 0) {
    out.theta_dot = Eigen::VectorXd(0);
    return out;
  }
  out.eps = eps.value_or(1e-8 * std::max(M.trace() / static_cast<double>(n), 1.0));
  Eigen::MatrixXd reg = M;
  reg.diagonal().array() += out.eps;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
  out.theta_dot = ldlt.solve(V);
  out.residual = (M * out.theta_dot - V).norm();
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  out.condition = d.maxCoeff() / std::max(d.minCoeff(), 1e-300);
  return out;
}

Integrator parse_integrator(std::string_view name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "euler") return Integrator::euler;
  throw std::invalid_argument("unknown integrator '" + std::string(name) +
                              "' (expected rk4 or euler)");
}

PhaseMode parse_phase_mode(std::string_view name) {
  if (name == "none") return PhaseMode::none;
  if (name == "tracked") return PhaseMode::tracked;
  throw std::invalid_argument("unknown phase mode '" + std::string(name) +
                              "' (expected none or tracked)");
}

double ThetaTrajectory::max_residual() const {
  return step_residual.empty()
             ? 0.0
             : *std::max_element(step_residual.begin(), step_residual.end());
}

ThetaTrajectory evolve_variational(const TimeDependentOperator& h,
                                   const Ansatz& a, const PropagationGrid& grid,
                                   const VqaOptions& options) {
  grid.validate();
  if (h.n_qubits() != a.n_qubits) {
    throw std::invalid_argument("evolve_variational: qubit-count mismatch");
  }
  {
    const auto& c = h.coefficients();
    if (c.size() > 0 && c.imag().cwiseAbs().maxCoeff() >
                            1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
      throw NumericError("evolve_variational: Hamiltonian is not Hermitian");
    }
  }

  McLachlanRhs rhs(a, options);
  const auto K = static_cast<Eigen::Index>(a.size());
  const std::size_t records = grid.record_count();
  const std::size_t per_record = grid.substeps_per_record();
  const double dt = grid.record_every / static_cast<double>(per_record);

  ThetaTrajectory out;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(K);
  double phase = 0.0;
  out.times.push_back(grid.t0);
  out.theta.push_back(theta);
  out.phase.push_back(phase);

  h.coefficients_at(grid.t0);
  h.coefficients_at(grid.t1);
  const PauliOperator frozen = h.is_constant() ? h.at(h.t_begin()) : PauliOperator{};
  auto hamiltonian = [&](double t) { return h.is_constant() ? frozen : h.at(t); };

  for (std::size_t r = 1; r < records; ++r) {
    const double start = grid.record_time(r - 1);
    for (std::size_t s = 0; s < per_record; ++s) {
      const double t = start + static_cast<double>(s) * dt;
      double residual = 0.0;
      double condition = 0.0;
      auto eval = [&](double time, const Eigen::VectorXd& th) {
        Derivative d = rhs(hamiltonian(time), th);
        residual = std::max(residual, d.residual);
        condition = std::max(condition, d.condition);
        return d;
      };

      if (options.integrator == Integrator::euler) {
        const Derivative k1 = eval(t, theta);
        theta += dt * k1.theta_dot;
        phase += dt * k1.phase_dot;
      } else {
        const Derivative k1 = eval(t, theta);
        const Derivative k2 = eval(t + 0.5 * dt, theta + 0.5 * dt * k1.theta_dot);
        const Derivative k3 = eval(t + 0.5 * dt, theta + 0.5 * dt * k2.theta_dot);
        const Derivative k4 = eval(t + dt, theta + dt * k3.theta_dot);
        theta += (dt / 6.0) * (k1.theta_dot + 2.0 * k2.theta_dot +
                               2.0 * k3.theta_dot + k4.theta_dot);
        phase += (dt / 6.0) * (k1.phase_dot + 2.0 * k2.phase_dot +
                               2.0 * k3.phase_dot + k4.phase_dot);
      }

      out.step_times.push_back(t + dt);
      out.step_theta_norm.push_back(theta.norm());
      out.step_residual.push_back(residual);
      out.step_condition.push_back(condition);
      if (!(residual <= options.max_residual) || !theta.allFinite()) {
        std::ostringstream os;
        os << "variational step diverged at t = " << t + dt
           << " fs: residual " << residual << " (limit " << options.max_residual
           << "), |theta| = " << theta.norm();
        throw NumericError(os.str());
      }
    }
    out.times.push_back(grid.record_time(r));
    out.theta.push_back(theta);
    out.phase.push_back(phase);
  }
  return out;
}

std::vector<StateVector> variational_states(const Ansatz& a,
                                            const ThetaTrajectory& traj) {
  const CompiledAnsatz c(a);
  std::vector<StateVector> out;
  out.reserve(traj.theta.size());
  for (std::size_t i = 0; i < traj.theta.size(); ++i) {
    check_theta(a, traj.theta[i]);
    Eigen::VectorXcd psi = c.state(a.initial_state.amplitudes(), traj.theta[i]);
    if (i < traj.phase.size() && traj.phase[i] != 0.0) {
      psi *= std::polar(1.0, traj.phase[i]);
    }
    out.emplace_back(a.n_qubits, std::move(psi));
  }
  return out;
}

void write_diagnostics(std::ostream& os, const ThetaTrajectory& traj) {
  std::ostringstream line;
  line.precision(10);
  for (std::size_t i = 0; i < traj.step_times.size(); ++i) {
    line.str({});
    line << traj.step_times[i] << ' ' << traj.step_theta_norm[i] << ' '
         << traj.step_residual[i] << '\n';
    os << line.str();
  }
}

}  // namespace condspec
