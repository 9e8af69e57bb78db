#include "condspec/trajectory.hpp"

#include "condspec/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace condspec {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Trajectory

void Trajectory::validate() const {
  if (!(dt_frame > 0.0) || !std::isfinite(dt_frame)) {
    throw std::invalid_argument("frame spacing must be positive");
  }
  if (frames.size() < 2) {
    throw std::invalid_argument(">= 2 frames required, got " +
                                std::to_string(frames.size()));
  }
  const int n = frames.front().size();
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (frames[j].size() != n) {
      throw std::invalid_argument(
          "frame " + std::to_string(j) + " has " +
          std::to_string(frames[j].size()) + " chromophores, expected " +
          std::to_string(n));
    }
    try {
      frames[j].validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("frame " + std::to_string(j) + ": " + e.what());
    }
  }
}

void OUConfig::validate() const {
  if (n_chromophores < 1) throw std::invalid_argument("n_chromophores must be >= 1");
  if (!(correlation_time > 0.0)) {
    throw std::invalid_argument("correlation_time must be positive");
  }
  if (!(energy_sigma >= 0.0)) {
    throw std::invalid_argument("energy_sigma must be non-negative");
  }
  if (!(dt_frame > 0.0)) throw std::invalid_argument("dt_frame must be positive");
  if (n_frames < 2) throw std::invalid_argument("n_frames must be >= 2");
  if (!sites.empty() && static_cast<int>(sites.size()) != n_chromophores) {
    throw std::invalid_argument("sites size does not match n_chromophores");
  }
}

std::vector<Chromophore> default_cluster(int n_chromophores) {
  if (n_chromophores < 1) throw std::invalid_argument("need >= 1 chromophore");
  constexpr double kSpacing[3] = {5.0, 6.0, 7.5};
  constexpr double kTilt = 0.45;                      // rad, long axis vs z
  constexpr double kHerringbone = std::numbers::pi / 3.0;
  constexpr double kTransition = 1.9;
  constexpr double kGround = 0.10;
  constexpr double kExcited = 0.35;

  std::vector<Chromophore> out;
  out.reserve(static_cast<std::size_t>(n_chromophores));
  for (int i = 0; i < n_chromophores; ++i) {
    const int ix = i % 2;
    const int iy = (i / 2) % 2;
    const int iz = i / 4;
    const double sign = ((ix + iy + iz) % 2 == 0) ? 1.0 : -1.0;
    const double phi = sign * kHerringbone / 2.0;
    const Vec3 axis(std::sin(kTilt) * std::cos(phi),
                    std::sin(kTilt) * std::sin(phi), std::cos(kTilt));
    const Vec3 shorter = axis.cross(Vec3::UnitZ()).normalized();

    Chromophore c;
    c.com = Vec3(ix * kSpacing[0], iy * kSpacing[1], iz * kSpacing[2]);
    c.mu01 = kTransition * axis;
    c.mu00 = kGround * shorter;
    c.mu11 = kExcited * shorter;
    out.push_back(c);
  }
  return out;
}

Trajectory synthesize_ou(const OUConfig& config,
                         std::uint64_t trajectory_index) {
  config.validate();
  const auto sites = config.sites.empty()
                         ? default_cluster(config.n_chromophores)
                         : config.sites;
  std::mt19937_64 rng(config.seed + trajectory_index);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double decay = std::exp(-config.dt_frame / config.correlation_time);
  const double kick = config.energy_sigma * std::sqrt(1.0 - decay * decay);

  Trajectory traj;
  traj.t0 = 0.0;
  traj.dt_frame = config.dt_frame;
  traj.frames.resize(static_cast<std::size_t>(config.n_frames));

  std::vector<double> energy(sites.size());
  for (auto& e : energy) e = config.mean_energy + config.energy_sigma * normal(rng);
  for (std::size_t j = 0; j < traj.frames.size(); ++j) {
    if (j > 0) {
      for (auto& e : energy) {
        e = config.mean_energy + (e - config.mean_energy) * decay +
            kick * normal(rng);
      }
    }
    auto& frame = traj.frames[j];
    frame.chromophores = sites;
    for (std::size_t m = 0; m < sites.size(); ++m) {
      frame.chromophores[m].excitation_energy = energy[m];
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// File format

namespace {

constexpr const char* kFormat = "exciton-traj-v1";

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const json& j, const char* field) {
  if (!j.contains(field)) throw std::invalid_argument(std::string("missing field '") + field + "'");
  const auto& a = j.at(field);
  if (!a.is_array() || a.size() != 3) {
    throw std::invalid_argument(std::string("field '") + field +
                                "' must be a 3-element array");
  }
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

double number_from(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_number()) {
    throw std::invalid_argument(std::string("missing numeric field '") + field + "'");
  }
  return j.at(field).get<double>();
}

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  json header = {{"format", kFormat},
                 {"dt_fs", traj.dt_frame},
                 {"n_chromophores", traj.n_chromophores()}};
  os << header.dump() << '\n';
  for (std::size_t j = 0; j < traj.frames.size(); ++j) {
    json chromophores = json::array();
    for (const auto& c : traj.frames[j].chromophores) {
      chromophores.push_back({{"E_ev", c.excitation_energy},
                              {"mu00", vec_json(c.mu00)},
                              {"mu11", vec_json(c.mu11)},
                              {"mu01", vec_json(c.mu01)},
                              {"com_ang", vec_json(c.com)}});
    }
    json frame = {{"t_fs", traj.time(j)}, {"chromophores", chromophores}};
    os << frame.dump() << '\n';
  }
}

void save_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_trajectory(os, traj);
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

Trajectory read_trajectory(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) -> IoError {
    return IoError("line " + std::to_string(line_no) + ": " + what);
  };

  if (!next_line()) throw IoError("empty trajectory file");
  Trajectory traj;
  int declared_n = 0;
  try {
    const json header = json::parse(line);
    if (header.value("format", std::string{}) != kFormat) {
      throw std::invalid_argument(std::string("field 'format' must be \"") + kFormat + "\"");
    }
    traj.dt_frame = number_from(header, "dt_fs");
    if (!header.contains("n_chromophores") || !header.at("n_chromophores").is_number_integer()) {
      throw std::invalid_argument("missing integer field 'n_chromophores'");
    }
    declared_n = header.at("n_chromophores").get<int>();
  } catch (const json::exception& e) {
    throw fail(e.what());
  } catch (const std::invalid_argument& e) {
    throw fail(e.what());
  }

  std::vector<double> times;
  while (next_line()) {
    ChromophoreFrame frame;
    try {
      const json j = json::parse(line);
      times.push_back(number_from(j, "t_fs"));
      if (!j.contains("chromophores") || !j.at("chromophores").is_array()) {
        throw std::invalid_argument("missing array field 'chromophores'");
      }
      for (const auto& c : j.at("chromophores")) {
        Chromophore ch;
        ch.excitation_energy = number_from(c, "E_ev");
        ch.mu00 = vec_from(c, "mu00");
        ch.mu11 = vec_from(c, "mu11");
        ch.mu01 = vec_from(c, "mu01");
        ch.com = vec_from(c, "com_ang");
        frame.chromophores.push_back(ch);
      }
    } catch (const json::exception& e) {
      throw fail(e.what());
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    if (frame.size() != declared_n) {
      throw fail("frame " + std::to_string(traj.frames.size()) + " has " +
                 std::to_string(frame.size()) +
                 " chromophores, header declares " + std::to_string(declared_n));
    }
    traj.frames.push_back(std::move(frame));
  }

  if (traj.frames.size() < 2) {
    throw IoError(">= 2 frames required, got " + std::to_string(traj.frames.size()));
  }
  traj.t0 = times.front();
  for (std::size_t j = 1; j < times.size(); ++j) {
    const double expected = traj.time(j);
    if (std::abs(times[j] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw IoError("frame " + std::to_string(j) + ": nonuniform spacing (t_fs = " +
                    std::to_string(times[j]) + ", expected " +
                    std::to_string(expected) + ")");
    }
  }
  try {
    traj.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  try {
    return read_trajectory(is);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// TimeDependentOperator

TimeDependentOperator::TimeDependentOperator(int n_qubits,
                                             std::vector<PauliString> strings,
                                             std::vector<double> times,
                                             Eigen::MatrixXcd coefficients)
    : n_qubits_(n_qubits),
      strings_(std::move(strings)),
      times_(std::move(times)),
      coeffs_(std::move(coefficients)) {
  if (times_.empty()) throw std::invalid_argument("series needs at least one time");
  if (coeffs_.rows() != static_cast<Eigen::Index>(times_.size()) ||
      coeffs_.cols() != static_cast<Eigen::Index>(strings_.size())) {
    throw std::logic_error("term-template mismatch: coefficient table is " +
                           std::to_string(coeffs_.rows()) + "x" +
                           std::to_string(coeffs_.cols()));
  }
  for (const auto& s : strings_) {
    if (s.n_qubits() != n_qubits_) {
      throw std::invalid_argument("series string has wrong qubit count");
    }
  }
  for (std::size_t j = 1; j < times_.size(); ++j) {
    if (!(times_[j] > times_[j - 1])) {
      throw std::invalid_argument("series times must increase");
    }
  }
  constant_ = times_.size() == 1;
  if (!constant_) {
    constant_ = true;
    for (Eigen::Index j = 1; j < coeffs_.rows() && constant_; ++j) {
      constant_ = coeffs_.row(j) == coeffs_.row(0);
    }
  }
}

TimeDependentOperator TimeDependentOperator::constant(const PauliOperator& op,
                                                      double t_begin,
                                                      double t_end) {
  if (!(t_end > t_begin)) throw std::invalid_argument("empty time window");
  const auto c = op.canonicalized();
  std::vector<PauliString> strings;
  Eigen::MatrixXcd coeffs(2, static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    strings.push_back(c.terms()[i].string);
    coeffs(0, static_cast<Eigen::Index>(i)) = c.terms()[i].coeff;
    coeffs(1, static_cast<Eigen::Index>(i)) = c.terms()[i].coeff;
  }
  return TimeDependentOperator(op.n_qubits(), std::move(strings),
                               {t_begin, t_end}, std::move(coeffs));
}

Eigen::VectorXcd TimeDependentOperator::coefficients_at(double t) const {
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  if (t < times_.front() - slack || t > times_.back() + slack) {
    throw std::out_of_range("time " + std::to_string(t) +
                            " outside operator window [" +
                            std::to_string(times_.front()) + ", " +
                            std::to_string(times_.back()) + "]");
  }
  if (constant_ || times_.size() == 1) return coeffs_.row(0).transpose();
  if (t <= times_.front()) return coeffs_.row(0).transpose();
  if (t >= times_.back()) return coeffs_.row(coeffs_.rows() - 1).transpose();

  // Uniform grids hit the right segment directly; the loops only fix rounding.
  const double span = times_.back() - times_.front();
  const auto last = static_cast<std::ptrdiff_t>(times_.size()) - 2;
  auto j = static_cast<std::ptrdiff_t>(
      (t - times_.front()) / span * static_cast<double>(last + 1));
  j = std::clamp<std::ptrdiff_t>(j, 0, last);
  while (j > 0 && times_[static_cast<std::size_t>(j)] > t) --j;
  while (j < last && times_[static_cast<std::size_t>(j + 1)] <= t) ++j;

  const auto ju = static_cast<std::size_t>(j);
  const double w = (t - times_[ju]) / (times_[ju + 1] - times_[ju]);
  if (w == 0.0) return coeffs_.row(j).transpose();
  return ((1.0 - w) * coeffs_.row(j) + w * coeffs_.row(j + 1)).transpose();
}

PauliOperator TimeDependentOperator::at(double t) const {
  const Eigen::VectorXcd c = coefficients_at(t);
  std::vector<PauliTerm> terms;
  terms.reserve(strings_.size());
  for (std::size_t i = 0; i < strings_.size(); ++i) {
    const Complex v = c[static_cast<Eigen::Index>(i)];
    if (v != Complex{}) terms.push_back({v, strings_[i]});
  }
  return PauliOperator(n_qubits_, std::move(terms));
}

PauliOperator TimeDependentOperator::frame(std::size_t j) const {
  return at(times_.at(j));
}

TimeDependentOperator TimeDependentOperator::minus(const PauliOperator& shift) const {
  std::vector<PauliString> strings = strings_;
  std::map<PauliString, std::size_t> index;
  for (std::size_t i = 0; i < strings.size(); ++i) index.emplace(strings[i], i);
  const auto c = shift.canonicalized();
  for (const auto& t : c.terms()) {
    if (index.emplace(t.string, strings.size()).second) strings.push_back(t.string);
  }
  Eigen::MatrixXcd coeffs =
      Eigen::MatrixXcd::Zero(coeffs_.rows(), static_cast<Eigen::Index>(strings.size()));
  coeffs.leftCols(coeffs_.cols()) = coeffs_;
  for (const auto& t : c.terms()) {
    coeffs.col(static_cast<Eigen::Index>(index.at(t.string))).array() -= t.coeff;
  }
  return TimeDependentOperator(n_qubits_, std::move(strings), times_, std::move(coeffs));
}

TimeDependentOperator make_series(const std::vector<PauliOperator>& per_frame,
                                  std::vector<double> times) {
  if (per_frame.empty() || per_frame.size() != times.size()) {
    throw std::invalid_argument("make_series: frame/time count mismatch");
  }
  const int n = per_frame.front().n_qubits();
  std::map<PauliString, std::size_t> index;
  for (const auto& op : per_frame) {
    if (op.n_qubits() != n) throw std::invalid_argument("make_series: qubit mismatch");
    for (const auto& t : op.terms()) index.emplace(t.string, 0);
  }
  std::vector<PauliString> strings;
  for (auto& [s, i] : index) {
    i = strings.size();
    strings.push_back(s);
  }
  Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(per_frame.size()), static_cast<Eigen::Index>(strings.size()));
  for (std::size_t j = 0; j < per_frame.size(); ++j) {
    for (const auto& t : per_frame[j].terms()) {
      coeffs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(index.at(t.string))) +=
          t.coeff;
    }
  }
  return TimeDependentOperator(n, std::move(strings), std::move(times), std::move(coeffs));
}

double ground_energy(const PauliOperator& h) {
  Complex e{};
  for (const auto& t : h.terms()) {
    if (t.string.x_mask() == 0) e += t.coeff;
  }
  return e.real();
}

TimeDependentOperator hamiltonian_series(const Trajectory& traj, Basis basis) {
  traj.validate();
  std::vector<PauliOperator> ops;
  std::vector<double> times;
  ops.reserve(traj.frames.size());
  for (std::size_t j = 0; j < traj.frames.size(); ++j) {
    PauliOperator h = build_hamiltonian(traj.frames[j], basis);
    h -= PauliOperator::identity(h.n_qubits(), ground_energy(h));
    ops.push_back(h.canonicalized());
    times.push_back(traj.time(j));
  }
  return make_series(ops, std::move(times));
}

DipoleMode parse_dipole_mode(std::string_view name) {
  if (name == "averaged") return DipoleMode::averaged;
  if (name == "instant") return DipoleMode::instant;
  throw std::invalid_argument("unknown dipole mode '" + std::string(name) +
                              "' (expected averaged or instant)");
}

TimeDependentOperator dipole_series(const Trajectory& traj, Basis basis, Axis k,
                                    DipoleMode mode) {
  traj.validate();
  std::vector<PauliOperator> ops;
  std::vector<double> times;
  for (std::size_t j = 0; j < traj.frames.size(); ++j) {
    ops.push_back(build_dipole(traj.frames[j], basis, k));
    times.push_back(traj.time(j));
  }
  auto series = make_series(ops, times);
  if (mode == DipoleMode::instant) return series;

  const Eigen::RowVectorXcd mean = series.coefficients().colwise().mean();
  Eigen::MatrixXcd coeffs = mean.replicate(series.coefficients().rows(), 1);
  return TimeDependentOperator(series.n_qubits(), series.strings(), std::move(times),
                               std::move(coeffs));
}

}  // namespace condspec
