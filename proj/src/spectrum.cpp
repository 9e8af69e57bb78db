#include "condspec/spectrum.hpp"

#include "condspec/errors.hpp"
#include "condspec/trajectory.hpp"
#include "condspec/units.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace condspec {

namespace {

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

void check_tau(double tau_fs) {
  if (!(tau_fs > 0.0) || !std::isfinite(tau_fs)) {
    throw std::invalid_argument("tau_fs must be positive");
  }
}

Spectrum make_spectrum(const OmegaGrid& grid, double tau_fs, Route route) {
  Spectrum s;
  s.omega = grid.values();
  s.intensity.assign(s.omega.size(), 0.0);
  s.tau_fs = tau_fs;
  s.route = route;
  return s;
}

}  // namespace

void OmegaGrid::validate() const {
  if (points < 2) throw std::invalid_argument("omega_points must be at least 2");
  if (!(max_ev > min_ev)) throw std::invalid_argument("omega_max_ev must exceed omega_min_ev");
}

std::vector<double> OmegaGrid::values() const {
  validate();
  std::vector<double> w(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) w[static_cast<std::size_t>(i)] = at(i);
  return w;
}

std::string_view to_string(Route r) {
  return r == Route::dynamic ? "dynamic" : "static";
}

void normalize(Spectrum& s) {
  double peak = 0.0;
  for (double v : s.intensity) peak = std::max(peak, v);
  if (peak <= 0.0) return;
  for (double& v : s.intensity) v /= peak;
}

Spectrum damped_fourier(const TcfSeries& c, double tau_fs, const OmegaGrid& grid) {
  check_tau(tau_fs);
  c.validate();
  Spectrum s = make_spectrum(grid, tau_fs, Route::dynamic);
  s.ensemble_size = c.ensemble_size;
  const std::size_t n = c.size();
  if (n < 2) throw std::invalid_argument("damped_fourier needs at least two TCF samples");

  const double t0 = c.times.front();
  const double dt = c.times[1] - c.times[0];
  const double window = c.times.back() - t0;
  if (window < 3.0 * tau_fs) {
    std::ostringstream os;
    os << "TCF window " << window << " fs is shorter than 3 tau = " << 3.0 * tau_fs
       << " fs; expect truncation ripples";
    s.warnings.push_back(os.str());
  }

  // Damped, trapezoid-weighted samples.
  std::vector<Complex> f(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = c.times[j] - t0;
    const double w = (j == 0 || j + 1 == n) ? 0.5 * dt : dt;
    f[j] = w * std::exp(-t / tau_fs) * c.values[static_cast<Eigen::Index>(j)];
  }
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    const double rate = s.omega[i] / units::kHbarEvFs;
    Complex sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      sum += std::polar(1.0, rate * (c.times[j] - t0)) * f[j];
    }
    s.intensity[i] = std::max(0.0, 2.0 * sum.real());
  }
  normalize(s);
  return s;
}

Spectrum static_spectrum(const std::vector<ChromophoreFrame>& frames, Basis basis,
                         double tau_fs, const OmegaGrid& grid) {
  check_tau(tau_fs);
  if (frames.empty()) throw std::invalid_argument("static_spectrum needs at least one frame");
  Spectrum s = make_spectrum(grid, tau_fs, Route::static_);
  s.ensemble_size = static_cast<int>(frames.size());
  const double gamma = units::kHbarEvFs / tau_fs;

  std::vector<double> acc(s.omega.size(), 0.0);
  for (const auto& frame : frames) {
    PauliOperator h = build_hamiltonian(frame, basis);
    const int n = h.n_qubits();
    h -= PauliOperator::identity(n, ground_energy(h));
    if (!h.canonicalized().is_hermitian()) {
      throw NumericError("static_spectrum: Hamiltonian is not Hermitian");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(to_dense(h));
    if (eig.info() != Eigen::Success) {
      throw NumericError("static_spectrum: diagonalization failed");
    }
    for (Axis k : kAxes) {
      const StateVector mg = apply_operator(build_dipole(frame, basis, k), ground_state(n));
      const Eigen::VectorXd weight =
          (eig.eigenvectors().adjoint() * mg.amplitudes()).cwiseAbs2();
      for (Eigen::Index a = 0; a < weight.size(); ++a) {
        if (weight[a] == 0.0) continue;
        const double e = eig.eigenvalues()[a];
        for (std::size_t i = 0; i < acc.size(); ++i) {
          const double d = s.omega[i] - e;
          acc[i] += weight[a] * gamma / (d * d + gamma * gamma);
        }
      }
    }
  }
  const double scale = 1.0 / (3.0 * static_cast<double>(frames.size()));
  for (std::size_t i = 0; i < acc.size(); ++i) s.intensity[i] = acc[i] * scale;
  normalize(s);
  return s;
}

std::vector<Peak> peak_analysis(const Spectrum& s) {
  const auto& y = s.intensity;
  const auto& w = s.omega;
  if (y.size() != w.size()) throw std::invalid_argument("spectrum grid and intensity differ");
  std::vector<Peak> peaks;
  if (y.size() < 3) return peaks;
  const double top = *std::max_element(y.begin(), y.end());
  if (!(top > 0.0)) return peaks;
  const double step = w[1] - w[0];

  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    if (y[i] < 0.05 * top) continue;

    Peak p;
    const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
    const double shift = denom != 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / denom : 0.0;
    p.position = w[i] + shift * step;
    p.height = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * shift;

    const double half = 0.5 * p.height;
    std::size_t l = i;
    while (l > 0 && y[l] >= half) --l;
    std::size_t r = i;
    while (r + 1 < y.size() && y[r] >= half) ++r;
    if (y[l] < half && y[r] < half) {
      const double wl = w[l] + (half - y[l]) / (y[l + 1] - y[l]) * step;
      const double wr = w[r - 1] + (y[r - 1] - half) / (y[r - 1] - y[r]) * step;
      p.fwhm = wr - wl;
    }
    peaks.push_back(p);
  }
  return peaks;
}

void write_spectrum(std::ostream& os, const Spectrum& s) {
  std::string buf;
  buf += "# tau_fs: " + format_double(s.tau_fs) + '\n';
  buf += "# route: " + std::string(to_string(s.route)) + '\n';
  buf += "# engine: " + s.engine + '\n';
  buf += "# ensemble_size: " + std::to_string(s.ensemble_size) + '\n';
  buf += "# normalization: peak\n";
  for (const auto& w : s.warnings) buf += "# warning: " + w + '\n';
  buf += "omega_ev,intensity\n";
  for (std::size_t i = 0; i < s.omega.size(); ++i) {
    buf += format_double(s.omega[i]) + ',' + format_double(s.intensity[i]) + '\n';
  }
  os << buf;
}

void save_spectrum(const Spectrum& s, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_spectrum(os, s);
  if (!os) throw IoError("write failed: " + path.string());
}

Spectrum read_spectrum(std::istream& is) {
  Spectrum s;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!header && line.starts_with("# ")) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      const std::string key = line.substr(2, colon - 2);
      const std::string value = line.substr(colon + 2);
      if (key == "tau_fs") s.tau_fs = parse_double(value, lineno);
      else if (key == "route") s.route = value == "static" ? Route::static_ : Route::dynamic;
      else if (key == "engine") s.engine = value;
      else if (key == "ensemble_size") s.ensemble_size = static_cast<int>(parse_double(value, lineno));
      else if (key == "warning") s.warnings.push_back(value);
      continue;
    }
    if (!header) {
      if (line != "omega_ev,intensity") {
        throw IoError("line " + std::to_string(lineno) +
                      ": expected header 'omega_ev,intensity'");
      }
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw IoError("line " + std::to_string(lineno) + ": expected 2 fields");
    }
    const std::string_view sv(line);
    s.omega.push_back(parse_double(sv.substr(0, comma), lineno));
    s.intensity.push_back(parse_double(sv.substr(comma + 1), lineno));
  }
  if (!header) throw IoError("missing header 'omega_ev,intensity'");
  return s;
}

Spectrum load_spectrum(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return read_spectrum(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string compare_report(const Spectrum& a, const Spectrum& b) {
  bool same = a.omega.size() == b.omega.size();
  for (std::size_t i = 0; same && i < a.omega.size(); ++i) {
    same = std::abs(a.omega[i] - b.omega[i]) <= 1e-9 * std::max(1.0, std::abs(a.omega[i]));
  }
  if (!same) throw std::invalid_argument("compare: spectra are on different grids");

  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  auto table = [&](const char* name, const Spectrum& s) {
    os << name << " (" << to_string(s.route) << ", " << s.engine
       << ", tau_fs " << s.tau_fs << ")\n";
    os << "  position_ev  height    fwhm_ev\n";
    for (const auto& p : peak_analysis(s)) {
      os << "  " << p.position << "  " << p.height << "  " << p.fwhm << '\n';
    }
  };
  table("A", a);
  table("B", b);
  double worst = 0.0;
  double where = a.omega.empty() ? 0.0 : a.omega.front();
  for (std::size_t i = 0; i < a.omega.size(); ++i) {
    const double d = std::abs(a.intensity[i] - b.intensity[i]);
    if (d > worst) {
      worst = d;
      where = a.omega[i];
    }
  }
  os << "max |A - B| = " << worst << " at " << where << " eV\n";
  return os.str();
}

}  // namespace condspec
