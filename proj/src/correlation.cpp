#include "condspec/correlation.hpp"

#include "condspec/errors.hpp"
#include "condspec/parallel.hpp"
#include "condspec/units.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace condspec {

namespace {

bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i]))) return false;
  }
  return true;
}

void require_same_grid(const TcfSeries& a, const TcfSeries& b, const char* what) {
  if (!same_grid(a.times, b.times)) {
    throw std::invalid_argument(std::string(what) + ": TCF time grids differ");
  }
}

/// <g| P |psi> without materializing P|g>.
Complex pauli_matrix_element(const PauliString& p, const Eigen::VectorXcd& g,
                             const Eigen::VectorXcd& psi) {
  const std::uint64_t x = p.x_mask();
  Complex sum = 0.0;
  for (Eigen::Index b = 0; b < g.size(); ++b) {
    if (g[b] == 0.0) continue;
    const auto src = static_cast<std::uint64_t>(b) ^ x;
    sum += std::conj(g[b]) * p.phase_on(src) * psi[static_cast<Eigen::Index>(src)];
  }
  return sum;
}

void check_ground_invariant(const TimeDependentOperator& h) {
  const Eigen::Index dim = Eigen::Index{1} << h.n_qubits();
  const StateVector g = ground_state(h.n_qubits());
  for (std::size_t j = 0; j < h.frame_count(); ++j) {
    const StateVector hg = apply_operator(h.frame(j), g);
    const double leak = hg.amplitudes().tail(dim - 1).norm();
    if (leak > 1e-12 * std::max(1.0, h.frame(j).one_norm())) {
      throw std::invalid_argument(
          "rotating frame requires a Hamiltonian that leaves |0...0> invariant "
          "(Frenkel basis)");
    }
  }
}

struct DirectPlan {
  std::vector<std::uint64_t> columns;       // basis index of each prepared state
  std::vector<std::vector<Complex>> weights;  // [component][column]
};

/// Groups mu(0) = sum_j a_j A_j by the basis state A_j|0...0> each term
/// produces; columns whose total weight vanishes in every component are
/// dropped.
DirectPlan plan_direct(const std::vector<PauliOperator>& mu0) {
  std::map<std::uint64_t, std::vector<Complex>> acc;
  const std::size_t nc = mu0.size();
  double scale = 0.0;
  for (std::size_t k = 0; k < nc; ++k) {
    for (const auto& t : mu0[k].terms()) {
      auto& w = acc[t.string.x_mask()];
      w.resize(nc, 0.0);
      w[k] += t.coeff * t.string.phase_on(0);
      scale = std::max(scale, std::abs(t.coeff));
    }
  }
  DirectPlan plan;
  plan.weights.resize(nc);
  for (const auto& [x, w] : acc) {
    bool keep = false;
    for (const auto& v : w) keep = keep || std::abs(v) > 1e-13 * scale;
    if (!keep) continue;
    plan.columns.push_back(x);
    for (std::size_t k = 0; k < nc; ++k) plan.weights[k].push_back(w[k]);
  }
  return plan;
}

void check_inputs(const TimeDependentOperator& h,
                  const std::vector<const TimeDependentOperator*>& mu,
                  const PropagationGrid& grid) {
  grid.validate();
  for (const auto* m : mu) {
    if (m->n_qubits() != h.n_qubits()) {
      throw std::invalid_argument("dipole and Hamiltonian qubit counts differ");
    }
  }
}

std::vector<TcfSeries> direct_impl(const TimeDependentOperator& h,
                                   const std::vector<const TimeDependentOperator*>& mu,
                                   const std::vector<Component>& tags,
                                   const PropagationGrid& grid,
                                   const EngineOptions& options) {
  check_inputs(h, mu, grid);
  const int n = h.n_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  const std::size_t nc = mu.size();

  std::vector<PauliOperator> mu0;
  for (const auto* m : mu) mu0.push_back(m->at(grid.t0).canonicalized());
  const DirectPlan plan = plan_direct(mu0);

  std::vector<TcfSeries> out(nc);
  const auto times = grid.record_times();
  for (std::size_t k = 0; k < nc; ++k) {
    out[k].times = times;
    out[k].values = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(times.size()));
    out[k].component = tags[k];
  }
  if (plan.columns.empty()) return out;

  Eigen::MatrixXcd initial =
      Eigen::MatrixXcd::Zero(dim, static_cast<Eigen::Index>(plan.columns.size()));
  for (std::size_t c = 0; c < plan.columns.size(); ++c) {
    initial(static_cast<Eigen::Index>(plan.columns[c]), static_cast<Eigen::Index>(c)) = 1.0;
  }
  const EvolvedStates ev = evolve_states(h, initial, grid, options);
  const StateVector g = ground_state(n);

  for (std::size_t k = 0; k < nc; ++k) {
    PauliOperator b;
    for (std::size_t r = 0; r < times.size(); ++r) {
      if (r == 0 || !mu[k]->is_constant()) b = mu[k]->at(times[r]).canonicalized();
      Complex sum = 0.0;
      for (std::size_t c = 0; c < plan.columns.size(); ++c) {
        const Complex w = plan.weights[k][c];
        if (w == 0.0) continue;
        const auto col = ev.states[r].col(static_cast<Eigen::Index>(c));
        Complex amp = 0.0;
        for (const auto& term : b.terms()) {
          amp += term.coeff * pauli_matrix_element(term.string, g.amplitudes(), col);
        }
        sum += w * amp;
      }
      out[k].values[static_cast<Eigen::Index>(r)] = sum;
    }
  }
  return out;
}

std::vector<TcfSeries> small_lambda_impl(
    const TimeDependentOperator& h,
    const std::vector<const TimeDependentOperator*>& mu,
    const std::vector<Component>& tags, const PropagationGrid& grid,
    const EngineOptions& options, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  check_inputs(h, mu, grid);
  const int n = h.n_qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  const std::size_t nc = mu.size();
  const StateVector g = ground_state(n);

  Eigen::MatrixXcd initial(dim, static_cast<Eigen::Index>(2 * nc));
  for (std::size_t k = 0; k < nc; ++k) {
    const PauliOperator m0 = mu[k]->at(grid.t0).canonicalized();
    initial.col(static_cast<Eigen::Index>(2 * k)) =
        exp_i_operator(m0, lambda, g).amplitudes();
    initial.col(static_cast<Eigen::Index>(2 * k + 1)) =
        exp_i_operator(m0, -lambda, g).amplitudes();
  }
  const EvolvedStates ev = evolve_states(h, initial, grid, options);

  const auto times = grid.record_times();
  std::vector<TcfSeries> out(nc);
  const double scale = 1.0 / (4.0 * lambda * lambda);
  for (std::size_t k = 0; k < nc; ++k) {
    out[k].times = times;
    out[k].values.resize(static_cast<Eigen::Index>(times.size()));
    out[k].component = tags[k];
    Eigen::VectorXcd bp, bm;
    for (std::size_t r = 0; r < times.size(); ++r) {
      if (r == 0 || !mu[k]->is_constant()) {
        const PauliOperator b = mu[k]->at(times[r]).canonicalized();
        bp = exp_i_operator(b, lambda, g).amplitudes();
        bm = exp_i_operator(b, -lambda, g).amplitudes();
      }
      const auto plus = ev.states[r].col(static_cast<Eigen::Index>(2 * k));
      const auto minus = ev.states[r].col(static_cast<Eigen::Index>(2 * k + 1));
      out[k].values[static_cast<Eigen::Index>(r)] =
          scale * (bp.dot(plus) - bm.dot(plus) - bp.dot(minus) + bm.dot(minus));
    }
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw IoError("line " + std::to_string(line) + ": bad number '" +
                  std::string(s) + "'");
  }
  return v;
}

}  // namespace

Engine parse_engine(std::string_view name) {
  if (name == "exact") return Engine::exact;
  if (name == "vqa") return Engine::vqa;
  throw std::invalid_argument("unknown engine '" + std::string(name) +
                              "' (expected exact or vqa)");
}

std::string_view to_string(Engine e) {
  return e == Engine::exact ? "exact" : "vqa";
}

TcfMethod parse_tcf_method(std::string_view name) {
  if (name == "direct") return TcfMethod::direct;
  if (name == "small_lambda") return TcfMethod::small_lambda;
  throw std::invalid_argument("unknown tcf_method '" + std::string(name) +
                              "' (expected direct or small_lambda)");
}

std::string_view to_string(TcfMethod m) {
  return m == TcfMethod::direct ? "direct" : "small_lambda";
}

std::string_view to_string(Component c) {
  switch (c) {
    case Component::x: return "x";
    case Component::y: return "y";
    case Component::z: return "z";
    case Component::iso: return "iso";
  }
  return "iso";
}

std::size_t EvolvedStates::record_index(double t) const {
  if (times.empty()) throw std::out_of_range("no recorded states");
  const double step = times.size() > 1 ? times[1] - times[0] : 1.0;
  const double pos = std::round((t - times.front()) / step);
  if (pos >= 0.0 && pos < static_cast<double>(times.size())) {
    const auto i = static_cast<std::size_t>(pos);
    if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
  }
  std::ostringstream os;
  os << "t = " << t << " fs is not on the record grid";
  throw std::out_of_range(os.str());
}

PauliOperator excitation_projector(int n_qubits) {
  PauliOperator p = PauliOperator::identity(n_qubits);
  p -= encode_projector(0, 0, n_qubits);
  return p.canonicalized();
}

EvolvedStates evolve_states(const TimeDependentOperator& h,
                            const Eigen::MatrixXcd& initial,
                            const PropagationGrid& grid,
                            const EngineOptions& options) {
  const int n = h.n_qubits();
  if (initial.rows() != (Eigen::Index{1} << n)) {
    throw std::invalid_argument("evolve_states: state and Hamiltonian qubit counts differ");
  }

  const TimeDependentOperator* hp = &h;
  TimeDependentOperator shifted;
  if (options.rotating_frame) {
    check_ground_invariant(h);
    shifted = h.minus(*options.rotating_frame * excitation_projector(n));
    hp = &shifted;
  }

  EvolvedStates out;
  if (options.engine == Engine::exact) {
    BlockEvolution b = propagate_block(*hp, initial, grid, options.exact);
    out.times = std::move(b.times);
    out.states = std::move(b.states);
    out.max_norm_drift = b.max_norm_drift;
  } else {
    grid.validate();
    out.times = grid.record_times();
    out.states.assign(out.times.size(), Eigen::MatrixXcd(initial.rows(), initial.cols()));
    const auto cols = static_cast<std::size_t>(initial.cols());
    parallel_for(cols, options.jobs, [&](std::size_t c) {
      const Eigen::VectorXcd init = initial.col(static_cast<Eigen::Index>(c));
      if (std::abs(init.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument("variational engine needs normalized initial states");
      }
      const Ansatz a = build_ansatz(n, StateVector(n, init));
      const ThetaTrajectory traj = evolve_variational(*hp, a, grid, options.vqa);
      const auto states = variational_states(a, traj);
      for (std::size_t r = 0; r < states.size(); ++r) {
        out.states[r].col(static_cast<Eigen::Index>(c)) = states[r].amplitudes();
      }
    });
    const Eigen::RowVectorXd n0 = initial.colwise().norm();
    for (const auto& s : out.states) {
      out.max_norm_drift = std::max(
          out.max_norm_drift, (s.colwise().norm() - n0).cwiseAbs().maxCoeff());
    }
  }

  if (options.rotating_frame) {
    const double e = *options.rotating_frame;
    for (std::size_t r = 0; r < out.times.size(); ++r) {
      const Complex phase = std::polar(1.0, -e * (out.times[r] - grid.t0) / units::kHbarEvFs);
      out.states[r].bottomRows(out.states[r].rows() - 1) *= phase;
    }
  }
  return out;
}

void TcfSeries::validate() const {
  if (static_cast<Eigen::Index>(times.size()) != values.size()) {
    throw std::invalid_argument("TCF times and values differ in length");
  }
  if (times.size() > 1) {
    const double step = times[1] - times[0];
    if (!(step > 0.0)) throw std::invalid_argument("TCF times must ascend");
    for (std::size_t i = 2; i < times.size(); ++i) {
      if (std::abs(times[i] - times[i - 1] - step) > 1e-6 * step) {
        throw std::invalid_argument("TCF times are not uniform");
      }
    }
  }
  if (!values.allFinite()) throw std::invalid_argument("TCF values are not finite");
}

Complex transition_amplitude_direct(const PauliString& b,
                                    const StateVector& evolved,
                                    const StateVector& g, double prep_norm) {
  if (b.n_qubits() != evolved.n_qubits() || g.n_qubits() != evolved.n_qubits()) {
    throw std::invalid_argument("transition amplitude: qubit counts differ");
  }
  return prep_norm * pauli_matrix_element(b, g.amplitudes(), evolved.amplitudes());
}

Complex transition_amplitude_direct(const PauliString& b,
                                    const EvolvedStates& evolution,
                                    std::size_t column, double t,
                                    const StateVector& g, double prep_norm) {
  const std::size_t r = evolution.record_index(t);
  const auto& block = evolution.states[r];
  if (column >= static_cast<std::size_t>(block.cols())) {
    throw std::out_of_range("evolved state column out of range");
  }
  return transition_amplitude_direct(
      b, StateVector(g.n_qubits(), block.col(static_cast<Eigen::Index>(column))), g,
      prep_norm);
}

double transition_amplitude_hadamard(const PauliString& b,
                                     const StateVector& evolved,
                                     const StateVector& g, double phi) {
  const int n = evolved.n_qubits();
  if (b.n_qubits() != n || g.n_qubits() != n) {
    throw std::invalid_argument("hadamard test: qubit counts differ");
  }
  if (n + 1 > kMaxQubits) throw std::invalid_argument("hadamard test: too many qubits");
  const Eigen::Index dim = Eigen::Index{1} << n;
  const int anc = n;

  // Ancilla is the most significant qubit.
  Eigen::VectorXcd joint(2 * dim);
  joint.head(dim) = evolved.amplitudes() / std::numbers::sqrt2;
  joint.tail(dim) = std::polar(1.0 / std::numbers::sqrt2, phi) * g.amplitudes();

  // Controlled-B on the |0> branch: (I + Z_a)/2 (x) B + (I - Z_a)/2 (x) I.
  const PauliString b_ext(n + 1, b.x_mask(), b.z_mask());
  const PauliString z_anc = PauliString::single(n + 1, anc, Pauli::Z);
  PauliOperator cb(n + 1, {});
  cb.add_term(0.5, b_ext);
  cb.add_term(0.5, mul_strings(z_anc, b_ext).second);
  cb.add_term(0.5, PauliString(n + 1));
  cb.add_term(-0.5, z_anc);
  const StateVector after = apply_operator(cb, StateVector(n + 1, joint));

  const PauliOperator x_anc =
      PauliOperator::from_string(PauliString::single(n + 1, anc, Pauli::X));
  return inner(after, apply_operator(x_anc, after)).real();
}

std::array<TcfSeries, 3> tcf_direct(const TimeDependentOperator& h,
                                    const std::array<TimeDependentOperator, 3>& mu,
                                    const PropagationGrid& grid,
                                    const EngineOptions& options) {
  auto v = direct_impl(h, {&mu[0], &mu[1], &mu[2]},
                       {Component::x, Component::y, Component::z}, grid, options);
  return {std::move(v[0]), std::move(v[1]), std::move(v[2])};
}

TcfSeries tcf_direct(const TimeDependentOperator& h,
                     const TimeDependentOperator& mu, const PropagationGrid& grid,
                     const EngineOptions& options, Component component) {
  return std::move(direct_impl(h, {&mu}, {component}, grid, options).front());
}

TcfSeries tcf_small_lambda(const TimeDependentOperator& h,
                           const TimeDependentOperator& mu,
                           const PropagationGrid& grid,
                           const EngineOptions& options, double lambda,
                           Component component) {
  return std::move(
      small_lambda_impl(h, {&mu}, {component}, grid, options, lambda).front());
}

std::array<TcfSeries, 3> tcf_small_lambda(
    const TimeDependentOperator& h,
    const std::array<TimeDependentOperator, 3>& mu,
    const PropagationGrid& grid, const EngineOptions& options, double lambda) {
  auto v = small_lambda_impl(h, {&mu[0], &mu[1], &mu[2]},
                             {Component::x, Component::y, Component::z}, grid,
                             options, lambda);
  return {std::move(v[0]), std::move(v[1]), std::move(v[2])};
}

TcfSeries isotropic_average(const TcfSeries& cx, const TcfSeries& cy,
                            const TcfSeries& cz) {
  require_same_grid(cx, cy, "isotropic_average");
  require_same_grid(cx, cz, "isotropic_average");
  TcfSeries out;
  out.times = cx.times;
  out.values = (cx.values + cy.values + cz.values) / 3.0;
  out.component = Component::iso;
  out.ensemble_size = cx.ensemble_size;
  return out;
}

TcfSeries ensemble_average(const std::vector<TcfSeries>& members) {
  if (members.empty()) throw std::invalid_argument("ensemble_average: no members");
  TcfSeries out;
  out.times = members.front().times;
  out.component = members.front().component;
  out.values = Eigen::VectorXcd::Zero(members.front().values.size());
  out.ensemble_size = 0;
  for (const auto& m : members) {
    require_same_grid(members.front(), m, "ensemble_average");
    out.values += m.values;
    out.ensemble_size += m.ensemble_size;
  }
  out.values /= static_cast<double>(members.size());
  return out;
}

std::vector<double> relative_difference(const TcfSeries& c_ref,
                                        const TcfSeries& c_test) {
  require_same_grid(c_ref, c_test, "relative_difference");
  if (c_ref.values.size() == 0 || std::abs(c_ref.values[0]) == 0.0) {
    throw std::invalid_argument("relative_difference: reference C(0) is zero");
  }
  const double norm0 = std::abs(c_ref.values[0]);
  std::vector<double> out(c_ref.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[i] = std::abs(c_ref.values[k] - c_test.values[k]) / norm0;
  }
  return out;
}

void write_tcf(std::ostream& os, const TcfSeries& c) {
  std::string buf = "t_fs,re,im\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Complex v = c.values[static_cast<Eigen::Index>(i)];
    buf += format_double(c.times[i]) + ',' + format_double(v.real()) + ',' +
           format_double(v.imag()) + '\n';
  }
  os << buf;
}

void save_tcf(const TcfSeries& c, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tcf(os, c);
  if (!os) throw IoError("write failed: " + path.string());
}

TcfSeries read_tcf(std::istream& is, Component component) {
  std::string line;
  if (!std::getline(is, line) || line != "t_fs,re,im") {
    throw IoError("line 1: expected header 't_fs,re,im'");
  }
  TcfSeries out;
  out.component = component;
  std::vector<Complex> values;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw IoError("line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const std::string_view sv(line);
    out.times.push_back(parse_double(sv.substr(0, c1), lineno));
    values.emplace_back(parse_double(sv.substr(c1 + 1, c2 - c1 - 1), lineno),
                        parse_double(sv.substr(c2 + 1), lineno));
  }
  out.values = Eigen::Map<Eigen::VectorXcd>(values.data(),
                                            static_cast<Eigen::Index>(values.size()));
  try {
    out.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  return out;
}

TcfSeries load_tcf(const std::filesystem::path& path, Component component) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_tcf(is, component);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_delta_c(std::ostream& os, const std::vector<double>& times,
                   const std::vector<double>& delta) {
  if (times.size() != delta.size()) {
    throw std::invalid_argument("write_delta_c: length mismatch");
  }
  std::string buf = "t_fs,delta_c\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    buf += format_double(times[i]) + ',' + format_double(delta[i]) + '\n';
  }
  os << buf;
}

}  // namespace condspec
