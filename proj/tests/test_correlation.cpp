#include "condspec/correlation.hpp"
#include "condspec/errors.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace condspec;

namespace {

constexpr double kHbar = 0.6582119569;  // eV fs

PauliString ps(const char* letters) { return PauliString::from_letters(letters); }

PropagationGrid grid(double t1, double substep = 0.005, double record = 0.05) {
  PropagationGrid g;
  g.t1 = t1;
  g.substep = substep;
  g.record_every = record;
  return g;
}

/// Two identical frames spanning [0, t_end].
Trajectory frozen(const ChromophoreFrame& f, double t_end) {
  Trajectory t;
  t.dt_frame = t_end;
  t.frames = {f, f};
  return t;
}

ChromophoreFrame monomer(double e, double mu) {
  ChromophoreFrame f;
  Chromophore c;
  c.excitation_energy = e;
  c.mu01 = Vec3(mu, 0.0, 0.0);
  f.chromophores.push_back(c);
  return f;
}

/// <G| mu e^{-iHt/hbar} mu |G> for a constant shifted Hamiltonian.
Eigen::VectorXcd dense_tcf(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& mu,
                           const std::vector<double>& times) {
  Eigen::VectorXcd g = Eigen::VectorXcd::Unit(h.rows(), 0);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 0; i < times.size(); ++i)
    out[static_cast<Eigen::Index>(i)] =
        g.dot(mu * oracle::propagator(h, times[i], kHbar) * mu * g);
  return out;
}

TcfSeries series(std::vector<double> t, Eigen::VectorXcd v, Component c = Component::x) {
  TcfSeries s;
  s.times = std::move(t);
  s.values = std::move(v);
  s.component = c;
  return s;
}

double max_rel(const TcfSeries& ref, const TcfSeries& test) {
  const auto d = relative_difference(ref, test);
  return *std::max_element(d.begin(), d.end());
}

}  // namespace

TEST_CASE("direct amplitude: t = 0, monomer phase and the dense oracle") {
  const StateVector g = ground_state(1);
  const StateVector x0 = apply_operator(PauliOperator::from_string(ps("X")), g);
  CHECK(transition_amplitude_direct(ps("X"), x0, g) == Complex(1.0));
  CHECK(transition_amplitude_direct(ps("X"), x0, g, 2.5) == Complex(2.5));

  const PauliOperator h = build_hamiltonian(monomer(4.5, 1.0), Basis::full);
  const auto hs = TimeDependentOperator::constant(h, 0.0, 5.0).minus(
      ground_energy(h) * PauliOperator::identity(1));
  EngineOptions opt;
  const auto ev = evolve_states(hs, x0.amplitudes(), grid(5.0), opt);
  for (double t : {0.0, 0.5, 1.35, 5.0}) {
    const Complex a = transition_amplitude_direct(ps("X"), ev, 0, t, g);
    CHECK(std::abs(a - std::exp(Complex(0, -4.5 * t / kHbar))) < 1e-8);
  }
  CHECK_THROWS_AS(transition_amplitude_direct(ps("X"), ev, 0, 0.123, g), std::out_of_range);
  CHECK_THROWS_AS(ev.record_index(7.0), std::out_of_range);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const PauliOperator h2 = oracle::random_operator(rng, 2, 6, true);
    const PauliString a = ps(oracle::random_letters(rng, 2).c_str());
    const PauliString b = ps(oracle::random_letters(rng, 2).c_str());
    const StateVector ag = apply_operator(PauliOperator::from_string(a), ground_state(2));
    const auto e2 = evolve_states(TimeDependentOperator::constant(h2, 0.0, 1.0),
                                  ag.amplitudes(), grid(1.0), opt);
    const Eigen::VectorXcd gd = Eigen::VectorXcd::Unit(4, 0);
    const Complex ref = gd.dot(oracle::kron_letters(b.to_string()) *
                               oracle::propagator(oracle::dense(h2), 1.0, kHbar) *
                               oracle::kron_letters(a.to_string()) * gd);
    CHECK(std::abs(transition_amplitude_direct(b, e2, 0, 1.0, ground_state(2)) - ref) < 1e-8);
  }
}

TEST_CASE("Hadamard test quadratures") {
  const StateVector g = ground_state(1);
  const StateVector x0 = StateVector::basis(1, 1);
  CHECK(transition_amplitude_hadamard(ps("X"), x0, g, 0.0) == Catch::Approx(1.0));
  CHECK(std::abs(transition_amplitude_hadamard(ps("X"), x0, g, M_PI / 2)) < 1e-14);

  // amplitude -i
  const StateVector rot(1, Eigen::Vector2cd(0.0, Complex(0, -1)));
  CHECK(std::abs(transition_amplitude_hadamard(ps("X"), rot, g, 0.0)) < 1e-14);
  CHECK(transition_amplitude_hadamard(ps("X"), rot, g, M_PI / 2) == Catch::Approx(-1.0));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    const StateVector psi(n, oracle::random_state(rng, n));
    const StateVector ref(n, oracle::random_state(rng, n));
    const PauliString b = ps(oracle::random_letters(rng, n).c_str());
    const double re = transition_amplitude_hadamard(b, psi, ref, 0.0);
    const double im = transition_amplitude_hadamard(b, psi, ref, M_PI / 2);
    CHECK(std::abs(re) <= 1.0 + 1e-12);
    CHECK(std::abs(im) <= 1.0 + 1e-12);
    CHECK(std::abs(Complex(re, im) - transition_amplitude_direct(b, psi, ref)) < 1e-10);
  }
}

TEST_CASE("monomer TCF is mu^2 exp(-iEt/hbar) with both engines") {
  const double mu = 1.7;
  const Trajectory t = frozen(monomer(4.5, mu), 10.0);
  const auto h = hamiltonian_series(t, Basis::full);
  const auto d = dipole_series(t, Basis::full, Axis::x);
  for (Engine e : {Engine::exact, Engine::vqa}) {
    EngineOptions opt;
    opt.engine = e;
    const TcfSeries c = tcf_direct(h, d, grid(10.0), opt);
    REQUIRE(c.size() == 201);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Complex expect = mu * mu * std::exp(Complex(0, -4.5 * c.times[i] / kHbar));
      worst = std::max(worst, std::abs(c.values[static_cast<Eigen::Index>(i)] - expect));
    }
    CHECK(worst < (e == Engine::exact ? 1e-8 : 1e-4) * mu * mu);
  }
}

TEST_CASE("zero dipole gives a zero TCF") {
  ChromophoreFrame f = monomer(4.5, 0.0);
  f.chromophores.push_back(f.chromophores[0]);
  f.chromophores[1].com = Vec3(0.0, 0.0, 5.0);
  const Trajectory t = frozen(f, 2.0);
  EngineOptions opt;
  for (Axis k : kAxes) {
    const auto c = tcf_direct(hamiltonian_series(t, Basis::full), dipole_series(t, Basis::full, k),
                              grid(2.0), opt);
    CHECK(c.values.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("four-site full-space TCF matches the dense brute force") {
  std::mt19937_64 rng(3);
  const ChromophoreFrame f = oracle::random_frame(rng, 4);
  const Trajectory t = frozen(f, 5.0);
  EngineOptions opt;
  const auto h = hamiltonian_series(t, Basis::full);
  std::array<TimeDependentOperator, 3> mu{dipole_series(t, Basis::full, Axis::x),
                                          dipole_series(t, Basis::full, Axis::y),
                                          dipole_series(t, Basis::full, Axis::z)};
  const auto c = tcf_direct(h, mu, grid(5.0), opt);
  Eigen::MatrixXcd hd = oracle::diabatic_hamiltonian(f);
  hd -= hd(0, 0) * Eigen::MatrixXcd::Identity(16, 16);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXcd ref = dense_tcf(hd, oracle::diabatic_dipole(f, k), c[k].times);
    CHECK((c[k].values - ref).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(c[k].component == static_cast<Component>(k));
  }
}

TEST_CASE("static TCF has Hermitian symmetry C(-t) = C(t)*") {
  std::mt19937_64 rng(4);
  const ChromophoreFrame f = oracle::random_frame(rng, 3);
  const Trajectory t = frozen(f, 4.0);
  const auto h = hamiltonian_series(t, Basis::full);
  const auto d = dipole_series(t, Basis::full, Axis::y);
  EngineOptions opt;
  const auto fwd = tcf_direct(h, d, grid(4.0), opt);
  // propagating under -H for time t is U(-t)
  const auto neg = TimeDependentOperator::constant(-1.0 * h.at(0.0), 0.0, 4.0);
  const auto bwd = tcf_direct(neg, d, grid(4.0), opt);
  CHECK((fwd.values.conjugate() - bwd.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("small-lambda estimator: closed form, Richardson ratio and slope") {
  // H = 0, mu = X: C = sin^2(l) / l^2
  const auto h0 = TimeDependentOperator::constant(PauliOperator(1, {}), 0.0, 1.0);
  const auto mx = TimeDependentOperator::constant(PauliOperator::from_string(ps("X")), 0.0, 1.0);
  EngineOptions opt;
  const auto c = tcf_small_lambda(h0, mx, grid(1.0), opt, 0.1);
  CHECK(c.values.real().maxCoeff() == Catch::Approx(0.99667).epsilon(1e-5));
  CHECK(c.values.real().minCoeff() == Catch::Approx(std::pow(std::sin(0.1) / 0.1, 2)));
  CHECK(c.values.imag().cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(tcf_small_lambda(h0, mx, grid(1.0), opt, 0.0), std::invalid_argument);

  // monomer with permanent dipoles so the estimator is not trivially exact
  ChromophoreFrame f = monomer(4.5, 1.2);
  f.chromophores[0].mu00 = Vec3(0.4, 0.0, 0.0);
  f.chromophores[0].mu11 = Vec3(-0.9, 0.0, 0.0);
  const Trajectory t = frozen(f, 5.0);
  const auto h = hamiltonian_series(t, Basis::full);
  const auto d = dipole_series(t, Basis::full, Axis::x);
  const auto direct = tcf_direct(h, d, grid(5.0), opt);
  std::vector<double> lambdas{0.2, 0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double l : lambdas) errs.push_back(max_rel(direct, tcf_small_lambda(h, d, grid(5.0), opt, l)));
  const double ratio = errs[2] / errs[1];
  CHECK(ratio == Catch::Approx(0.25).margin(0.03));
  // least-squares slope of log(err) against log(lambda)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double x = std::log(lambdas[i]), y = std::log(errs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double n = static_cast<double>(lambdas.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::abs(slope - 2.0) < 0.1);
}

TEST_CASE("small-lambda on a 15-site Frenkel cluster is direct scaled by sinc^2") {
  // mu couples |G> only to the bright state sum_m mu_m |m>, and H|G> = 0, so the
  // four amplitudes combine to sinc^2(lambda |mu|) times the direct TCF.
  OUConfig bath;
  bath.n_chromophores = 15;
  bath.n_frames = 11;
  const Trajectory t = synthesize_ou(bath);
  const auto h = hamiltonian_series(t, Basis::frenkel);
  EngineOptions opt;
  for (Axis k : kAxes) {
    double mu2 = 0.0;
    for (const auto& c : t.frames[0].chromophores) {
      const double m = c.mu01[static_cast<int>(k)];
      mu2 += m * m;
    }
    const double x = 0.1 * std::sqrt(mu2);
    const double sinc2 = x > 0 ? std::pow(std::sin(x) / x, 2) : 1.0;
    const auto d = dipole_series(t, Basis::frenkel, k);
    const auto direct = tcf_direct(h, d, grid(20.0), opt);
    const auto small = tcf_small_lambda(h, d, grid(20.0), opt, 0.1);
    CHECK((small.values - sinc2 * direct.values).cwiseAbs().maxCoeff() <
          1e-10 * std::max(1.0, mu2));
    // the relative deviation is exactly 1 - sinc^2
    if (mu2 > 0) CHECK(max_rel(direct, small) == Catch::Approx(1.0 - sinc2).margin(1e-9));
  }
}

TEST_CASE("rotating frame leaves the exact TCF unchanged") {
  OUConfig bath;
  bath.n_chromophores = 5;
  bath.n_frames = 6;
  const Trajectory t = synthesize_ou(bath);
  const auto h = hamiltonian_series(t, Basis::frenkel);
  const auto d = dipole_series(t, Basis::frenkel, Axis::x);
  EngineOptions plain;
  EngineOptions rot;
  rot.rotating_frame = 4.5;
  const auto a = tcf_direct(h, d, grid(10.0), plain);
  const auto b = tcf_direct(h, d, grid(10.0), rot);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
  const auto sa = tcf_small_lambda(h, d, grid(10.0), plain, 0.1);
  const auto sb = tcf_small_lambda(h, d, grid(10.0), rot, 0.1);
  CHECK((sa.values - sb.values).cwiseAbs().maxCoeff() < 1e-10);

  // full space couples |0...0> to double excitations
  std::mt19937_64 rng(5);
  const Trajectory full = frozen(oracle::random_frame(rng, 2), 1.0);
  CHECK_THROWS_AS(tcf_direct(hamiltonian_series(full, Basis::full),
                             dipole_series(full, Basis::full, Axis::x), grid(1.0), rot),
                  std::invalid_argument);
}

TEST_CASE("parallel VQA evolutions are identical to serial ones") {
  std::mt19937_64 rng(6);
  const Trajectory t = frozen(oracle::random_frame(rng, 2), 1.0);
  const auto h = hamiltonian_series(t, Basis::full);
  const auto d = dipole_series(t, Basis::full, Axis::z);
  EngineOptions serial;
  serial.engine = Engine::vqa;
  EngineOptions par = serial;
  par.jobs = 3;
  const auto a = tcf_direct(h, d, grid(1.0), serial);
  const auto b = tcf_direct(h, d, grid(1.0), par);
  CHECK(a.values == b.values);
}

TEST_CASE("isotropic and ensemble averages") {
  const std::vector<double> t{0.0, 0.5, 1.0};
  Eigen::VectorXcd v(3);
  v << Complex(1, 2), Complex(-0.5, 0.25), Complex(3, -1);
  const auto cx = series(t, v, Component::x);
  const auto zero = series(t, Eigen::VectorXcd::Zero(3));
  const auto same = isotropic_average(cx, cx, cx);
  CHECK((same.values - v).norm() < 1e-15);
  CHECK(same.component == Component::iso);
  CHECK((isotropic_average(cx, zero, zero).values - v / 3.0).norm() < 1e-15);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Eigen::VectorXcd w(3), u(3);
  for (int i = 0; i < 3; ++i) {
    w[i] = Complex(g(rng), g(rng));
    u[i] = Complex(g(rng), g(rng));
  }
  CHECK((isotropic_average(cx, series(t, w), series(t, u)).values - (v + w + u) / 3.0).norm() <
        1e-15);
  CHECK_THROWS_AS(isotropic_average(cx, series({0.0, 0.5, 1.5}, w), cx), std::invalid_argument);

  CHECK(ensemble_average({cx}).values == v);
  CHECK(ensemble_average({cx, series(t, -v)}).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(ensemble_average({}), std::invalid_argument);
  CHECK_THROWS_AS(ensemble_average({cx, series({0.0, 0.5, 1.5}, v)}), std::invalid_argument);

  std::vector<TcfSeries> members;
  Eigen::VectorXcd running = Eigen::VectorXcd::Zero(3);
  for (int m = 0; m < 400; ++m) {
    Eigen::VectorXcd x(3);
    for (int i = 0; i < 3; ++i) x[i] = Complex(g(rng), g(rng));
    running += (x - running) / static_cast<double>(m + 1);
    members.push_back(series(t, x));
  }
  const auto avg = ensemble_average(members);
  CHECK(avg.ensemble_size == 400);
  CHECK((avg.values - running).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("relative difference") {
  const std::vector<double> t{0.0, 1.0, 2.0};
  Eigen::VectorXcd v(3);
  v << Complex(2, 0), Complex(0, 1), Complex(-1, 1);
  const auto ref = series(t, v);
  for (double d : relative_difference(ref, ref)) CHECK(d == 0.0);
  const auto shifted = series(t, v + Eigen::VectorXcd::Constant(3, 0.1));
  for (double d : relative_difference(ref, shifted)) CHECK(d == Catch::Approx(0.05));
  CHECK_THROWS_AS(relative_difference(series(t, Eigen::VectorXcd::Zero(3)), ref),
                  std::invalid_argument);
  CHECK_THROWS_AS(relative_difference(ref, series({0.0, 1.0}, v.head(2))), std::invalid_argument);
}

TEST_CASE("TCF CSV round trip and malformed files") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<double> t;
  Eigen::VectorXcd v(50);
  for (int i = 0; i < 50; ++i) {
    t.push_back(0.05 * i);
    v[i] = Complex(g(rng), g(rng));
  }
  const auto c = series(t, v, Component::z);
  std::ostringstream os;
  write_tcf(os, c);
  CHECK(os.str().rfind("t_fs,re,im\n", 0) == 0);
  std::istringstream is(os.str());
  const auto back = read_tcf(is, Component::z);
  CHECK(back.times == c.times);
  CHECK(back.values == c.values);
  CHECK(back.component == Component::z);

  const auto path = std::filesystem::temp_directory_path() / "condspec_tcf.csv";
  save_tcf(c, path);
  CHECK(load_tcf(path).values == c.values);
  std::filesystem::remove(path);

  std::istringstream bad_header("t,re,im\n0,1,0\n");
  CHECK_THROWS_AS(read_tcf(bad_header), IoError);
  std::istringstream bad_row("t_fs,re,im\n0,1,0\n0.05,oops,0\n");
  CHECK_THROWS_WITH(read_tcf(bad_row), Catch::Matchers::ContainsSubstring("line 3"));
  std::istringstream short_row("t_fs,re,im\n0,1\n");
  CHECK_THROWS_AS(read_tcf(short_row), IoError);
  CHECK_THROWS_AS(load_tcf("/nonexistent/tcf.csv"), IoError);

  TcfSeries nonuniform = series({0.0, 0.1, 0.3}, Eigen::VectorXcd::Ones(3));
  CHECK_THROWS_AS(nonuniform.validate(), std::invalid_argument);
  TcfSeries nan = series({0.0, 0.1}, Eigen::VectorXcd::Constant(2, Complex(NAN, 0)));
  CHECK_THROWS_AS(nan.validate(), std::invalid_argument);

  std::ostringstream dc;
  write_delta_c(dc, {0.0, 0.05}, {0.0, 1e-3});
  CHECK(dc.str().rfind("t_fs,delta_c\n", 0) == 0);
}

TEST_CASE("engine and method names") {
  CHECK(parse_engine("exact") == Engine::exact);
  CHECK(parse_engine("vqa") == Engine::vqa);
  CHECK(to_string(Engine::vqa) == "vqa");
  CHECK_THROWS_AS(parse_engine("analog"), std::invalid_argument);
  CHECK(parse_tcf_method("small_lambda") == TcfMethod::small_lambda);
  CHECK_THROWS_AS(parse_tcf_method("indirect"), std::invalid_argument);
  CHECK(to_string(Component::iso) == "iso");
}
