#include "condspec/errors.hpp"
#include "condspec/exact_engine.hpp"
#include "condspec/exciton.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace condspec;

namespace {

constexpr double kHbar = 0.6582119569;  // eV fs

PauliString ps(const char* letters) { return PauliString::from_letters(letters); }

PauliOperator two_level(double a, double b) {
  PauliOperator h(1, {});
  h.add_term(a, ps("X"));
  h.add_term(b, ps("Z"));
  return h;
}

PropagationGrid grid(double t1, double substep = 0.005, double record = 0.05) {
  PropagationGrid g;
  g.t0 = 0.0;
  g.t1 = t1;
  g.substep = substep;
  g.record_every = record;
  return g;
}

}  // namespace

TEST_CASE("ground state is |0...0>") {
  const StateVector g1 = ground_state(1);
  CHECK(g1.dim() == 2);
  CHECK(g1[0] == Complex(1));
  CHECK(g1[1] == Complex(0));
  const StateVector g2 = ground_state(2);
  CHECK(g2.amplitudes() == Eigen::VectorXcd::Unit(4, 0));
  CHECK(ground_state(5).norm() == 1.0);
}

TEST_CASE("propagation grid validation and record times") {
  const PropagationGrid g = grid(1.0, 0.01, 0.1);
  CHECK_NOTHROW(g.validate());
  CHECK(g.record_count() == 11);
  CHECK(g.substeps_per_record() == 10);
  CHECK(g.record_time(10) == Catch::Approx(1.0));

  CHECK_THROWS_AS(grid(0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(grid(1.0, 0.2, 0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(grid(1.0, 0.03, 0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(grid(1.03, 0.01, 0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(grid(1.0, -0.01, 0.1).validate(), std::invalid_argument);
}

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
  std::mt19937_64 rng(1);
  const StateVector s0(2, oracle::random_state(rng, 2));
  const auto h = TimeDependentOperator::constant(PauliOperator(2, {}), 0.0, 1.0);
  const auto out = propagate(h, s0, grid(1.0));
  REQUIRE(out.size() == 21);
  for (const auto& ts : out) CHECK((ts.state.amplitudes() - s0.amplitudes()).norm() < 1e-15);
}

TEST_CASE("Larmor precession of <X> under (w/2) Z") {
  const double omega = 2.0;
  PauliOperator hz(1, {});
  hz.add_term(omega / 2.0, ps("Z"));
  Eigen::VectorXcd plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const auto out = propagate(TimeDependentOperator::constant(hz, 0.0, 5.0),
                             StateVector(1, plus), grid(5.0));
  const PauliOperator x = PauliOperator::from_string(ps("X"));
  for (const auto& ts : out) {
    const double ex = inner(ts.state, apply_operator(x, ts.state)).real();
    CHECK(std::abs(ex - std::cos(omega * ts.t / kHbar)) < 1e-8);
  }
}

TEST_CASE("monomer excited state acquires the phase exp(-iEt/hbar)") {
  ChromophoreFrame f;
  Chromophore c;
  c.excitation_energy = 4.5;
  c.mu01 = Vec3(1.0, 0.0, 0.0);
  f.chromophores.push_back(c);
  const PauliOperator h = build_hamiltonian(f, Basis::full);
  const auto series = TimeDependentOperator::constant(h, 0.0, 10.0).minus(
      ground_energy(h) * PauliOperator::identity(1));
  const auto out = propagate(series, StateVector::basis(1, 1), grid(10.0));
  for (const auto& ts : out) {
    const Complex expect = std::exp(Complex(0.0, -4.5 * ts.t / kHbar));
    CHECK(std::abs(ts.state[1] - expect) < 1e-8);
    CHECK(std::abs(ts.state[0]) < 1e-12);
  }
  // period h/E
  CHECK(2.0 * M_PI * kHbar / 4.5 == Catch::Approx(0.919).epsilon(1e-3));
}

TEST_CASE("Rabi formula for constant aX + bZ") {
  const double a = 0.3, b = -0.7;
  const double w = std::hypot(a, b);
  const auto out = propagate(TimeDependentOperator::constant(two_level(a, b), 0.0, 8.0),
                             ground_state(1), grid(8.0));
  for (const auto& ts : out) {
    const double p1 = (a / w) * (a / w) * std::pow(std::sin(w * ts.t / kHbar), 2);
    CHECK(std::abs(std::norm(ts.state[1]) - p1) < 1e-8);
  }
}

TEST_CASE("constant Hamiltonians match the dense matrix exponential") {
  std::mt19937_64 rng(2);
  for (int n = 1; n <= 4; ++n) {
    const PauliOperator h = oracle::random_operator(rng, n, 8, true);
    const StateVector s0(n, oracle::random_state(rng, n));
    const auto out = propagate(TimeDependentOperator::constant(h, 0.0, 2.0), s0, grid(2.0));
    const Eigen::MatrixXcd hd = oracle::dense(h);
    for (std::size_t i = 0; i < out.size(); i += 8) {
      const Eigen::VectorXcd ref = oracle::propagator(hd, out[i].t, kHbar) * s0.amplitudes();
      CHECK((out[i].state.amplitudes() - ref).norm() < 1e-9);
    }
  }
}

TEST_CASE("apply_propagator and exp_i_operator match dense exponentials") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 4; ++n) {
    const PauliOperator h = oracle::random_operator(rng, n, 10, true);
    Eigen::MatrixXcd block(Eigen::Index{1} << n, 2);
    block.col(0) = oracle::random_state(rng, n);
    block.col(1) = oracle::random_state(rng, n);
    const Eigen::MatrixXcd ref = oracle::propagator(oracle::dense(h), 0.7, kHbar) * block;
    apply_propagator(h, 0.7, block);
    CHECK((block - ref).norm() < 1e-12);

    const StateVector s(n, oracle::random_state(rng, n));
    const Eigen::MatrixXcd expi = (Complex(0.0, 1.3) * oracle::dense(h)).exp();
    CHECK((exp_i_operator(h, 1.3, s).amplitudes() - expi * s.amplitudes()).norm() < 1e-12);
  }
  PauliOperator nh(1, {});
  nh.add_term(Complex(0, 1), ps("X"));
  CHECK_THROWS_AS(exp_i_operator(nh, 0.1, ground_state(1)), std::invalid_argument);
}

TEST_CASE("exciton series: unitarity and the convergence gate") {
  std::mt19937_64 rng(4);
  OUConfig bath;
  bath.n_chromophores = 3;
  bath.n_frames = 11;
  const Trajectory traj = synthesize_ou(bath);
  const auto h = hamiltonian_series(traj, Basis::full);
  const StateVector s0(3, oracle::random_state(rng, 3));
  PropagateOptions opt;
  opt.check_convergence = true;
  // midpoint-frozen error is second order: E * J * dE/dt sets the step needed
  const auto out = propagate(h, s0, grid(20.0, 0.0025, 0.05), opt);
  for (const auto& ts : out) CHECK(std::abs(ts.state.norm() - 1.0) < 1e-10);
}

TEST_CASE("time reversal returns the initial state") {
  std::mt19937_64 rng(4);
  const int n = 3;
  std::vector<PauliOperator> frames;
  std::vector<double> times;
  const PauliOperator base = oracle::random_operator(rng, n, 10, true);
  std::normal_distribution<double> g;
  for (int j = 0; j <= 5; ++j) {
    PauliOperator f(n, {});
    for (const auto& t : base.terms()) f.add_term(t.coeff * (1.0 + 0.3 * g(rng)), t.string);
    frames.push_back(f);
    times.push_back(2.0 * j);
  }
  const auto h = make_series(frames, times);
  const StateVector s0(n, oracle::random_state(rng, n));
  const auto fwd = propagate(h, s0, grid(10.0));
  for (const auto& ts : fwd) CHECK(std::abs(ts.state.norm() - 1.0) < 1e-10);

  // H'(tau) = -H(t1 - tau) undoes the forward evolution
  std::vector<PauliOperator> rev;
  std::vector<double> rtimes;
  for (int j = 5; j >= 0; --j) {
    rev.push_back(-1.0 * frames[static_cast<std::size_t>(j)]);
    rtimes.push_back(10.0 - times[static_cast<std::size_t>(j)]);
  }
  const auto back = propagate(make_series(rev, rtimes), fwd.back().state, grid(10.0));
  CHECK((back.back().state.amplitudes() - s0.amplitudes()).norm() < 1e-8);
}

TEST_CASE("block propagation agrees with column-wise propagation") {
  std::mt19937_64 rng(5);
  const PauliOperator h = oracle::random_operator(rng, 2, 6, true);
  const auto series = TimeDependentOperator::constant(h, 0.0, 1.0);
  Eigen::MatrixXcd block(4, 3);
  for (int c = 0; c < 3; ++c) block.col(c) = oracle::random_state(rng, 2);
  const auto b = propagate_block(series, block, grid(1.0));
  REQUIRE(b.times.size() == 21);
  CHECK(b.max_norm_drift < 1e-10);
  for (int c = 0; c < 3; ++c) {
    const auto col = propagate(series, StateVector(2, block.col(c)), grid(1.0));
    CHECK((col.back().state.amplitudes() - b.states.back().col(c)).norm() < 1e-14);
  }
}

TEST_CASE("propagate error paths") {
  PauliOperator nh(1, {});
  nh.add_term(Complex(0.2, 0.5), ps("X"));
  CHECK_THROWS_AS(propagate(TimeDependentOperator::constant(nh, 0.0, 1.0), ground_state(1),
                            grid(1.0)),
                  NumericError);
  const auto h = TimeDependentOperator::constant(two_level(1, 1), 0.0, 1.0);
  CHECK_THROWS_AS(propagate(h, ground_state(2), grid(1.0)), std::invalid_argument);
  // grid beyond the tabulated window
  CHECK_THROWS_AS(propagate(h, ground_state(1), grid(2.0)), std::out_of_range);
  // convergence gate trips when the substep is far too coarse
  PropagateOptions opt;
  opt.check_convergence = true;
  const auto fast = TimeDependentOperator::constant(two_level(20.0, 15.0), 0.0, 1.0);
  const std::vector<double> t{0.0, 1.0};
  Eigen::MatrixXcd coeffs(2, 2);
  coeffs << 20.0, 15.0, -20.0, 5.0;
  const TimeDependentOperator varying(1, {ps("X"), ps("Z")}, t, coeffs);
  CHECK_THROWS_AS(propagate(varying, ground_state(1), grid(1.0, 0.5, 0.5), opt), NumericError);
  CHECK_NOTHROW(propagate(fast, ground_state(1), grid(1.0, 0.001, 0.01), opt));
}
