#include "condspec/job.hpp"

#include "condspec/errors.hpp"
#include "condspec/parallel.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace condspec {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Config text

struct Value {
  enum class Kind { string, number, boolean, number_array, string_array } kind;
  std::string text;  // raw token for numbers, contents for strings
  bool flag = false;
  std::vector<std::string> items;
  int line = 0;
};

[[noreturn]] void fail(int line, const std::string& key, const std::string& msg) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  if (!key.empty()) os << "key '" << key << "': ";
  os << msg;
  throw ConfigError(os.str());
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

/// Parses a quoted string starting at s[0] == '"'; returns the remainder.
std::string_view parse_quoted(std::string_view s, std::string& out, int line,
                              const std::string& key) {
  out.clear();
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      out += s[++i];
    } else if (s[i] == '"') {
      return s.substr(i + 1);
    } else {
      out += s[i];
    }
  }
  fail(line, key, "unterminated string");
}

Value parse_value(std::string_view s, int line, const std::string& key) {
  Value v;
  v.line = line;
  if (s.empty()) fail(line, key, "missing value");
  if (s.front() == '"') {
    v.kind = Value::Kind::string;
    if (!trim(parse_quoted(s, v.text, line, key)).empty()) {
      fail(line, key, "trailing characters after string");
    }
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::boolean;
    v.flag = s == "true";
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, key, "arrays must close on the same line");
    std::string_view body = trim(s.substr(1, s.size() - 2));
    v.kind = Value::Kind::number_array;
    bool strings = !body.empty() && body.front() == '"';
    if (strings) v.kind = Value::Kind::string_array;
    while (!body.empty()) {
      if (strings) {
        if (body.front() != '"') fail(line, key, "mixed array element types");
        std::string item;
        body = trim(parse_quoted(body, item, line, key));
        v.items.push_back(item);
      } else {
        const auto comma = body.find(',');
        const std::string_view tok = trim(body.substr(0, comma));
        if (tok.empty() || tok.front() == '"') fail(line, key, "bad array element");
        v.items.emplace_back(tok);
        body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma);
      }
      if (body.empty()) break;
      if (body.front() != ',') fail(line, key, "expected ',' between array elements");
      body = trim(body.substr(1));
    }
    return v;
  }
  v.kind = Value::Kind::number;
  v.text = std::string(s);
  return v;
}

double to_number(const std::string& tok, int line, const std::string& key) {
  double d = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), d);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    fail(line, key, "expected a number, got '" + tok + "'");
  }
  return d;
}

class Table {
 public:
  void set(const std::string& key, Value v) {
    if (!values_.emplace(key, std::move(v)).second) {
      fail(values_.at(key).line, key, "duplicate key");
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const Value& get(const std::string& key, Value::Kind kind, const char* what) {
    const Value& v = values_.at(key);
    used_.insert(key);
    if (v.kind != kind) fail(v.line, key, std::string("expected ") + what);
    return v;
  }

  std::string string(const std::string& key) {
    return get(key, Value::Kind::string, "a string").text;
  }
  double number(const std::string& key) {
    const Value& v = get(key, Value::Kind::number, "a number");
    return to_number(v.text, v.line, key);
  }
  bool boolean(const std::string& key) {
    return get(key, Value::Kind::boolean, "true or false").flag;
  }
  template <class Int>
  Int integer(const std::string& key) {
    const Value& v = get(key, Value::Kind::number, "an integer");
    Int out{};
    const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.text.data() + v.text.size()) {
      fail(v.line, key, "expected an integer, got '" + v.text + "'");
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key) {
    const Value& v = values_.at(key);
    if (v.kind == Value::Kind::number_array && v.items.empty()) {
      used_.insert(key);
      return {};
    }
    get(key, Value::Kind::number_array, "an array of numbers");
    std::vector<double> out;
    for (const auto& t : v.items) out.push_back(to_number(t, v.line, key));
    return out;
  }
  std::vector<std::string> strings(const std::string& key) {
    const Value& v = values_.at(key);
    used_.insert(key);
    if (v.kind == Value::Kind::string) return {v.text};
    if (v.kind == Value::Kind::string_array) return v.items;
    if (v.kind == Value::Kind::number_array && v.items.empty()) return {};
    fail(v.line, key, "expected a string or an array of strings");
  }
  int line(const std::string& key) const { return values_.at(key).line; }

  void reject_unknown() const {
    for (const auto& [key, v] : values_) {
      if (!used_.count(key)) fail(v.line, key, "unknown key");
    }
  }

 private:
  std::map<std::string, Value> values_;
  std::set<std::string> used_;
};

template <class Fn>
auto as_config_error(const std::string& key, int line, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    fail(line, key, e.what());
  }
}

std::vector<Vec3> split_vectors(const std::vector<double>& flat, int n,
                                const std::string& key, int line) {
  if (static_cast<int>(flat.size()) != 3 * n) {
    fail(line, key, "expected " + std::to_string(3 * n) + " numbers (3 per chromophore)");
  }
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.emplace_back(flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  // Keep floats recognizably non-integer for readers of the echo.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

std::string vec_array(const std::vector<Chromophore>& sites, Vec3 Chromophore::*field) {
  std::string out = "[";
  bool first = true;
  for (const auto& c : sites) {
    for (int k = 0; k < 3; ++k) {
      if (!first) out += ", ";
      out += fmt((c.*field)[k]);
      first = false;
    }
  }
  return out + "]";
}

std::string_view to_string(DipoleMode m) {
  return m == DipoleMode::averaged ? "averaged" : "instant";
}
std::string_view to_string(Integrator i) { return i == Integrator::rk4 ? "rk4" : "euler"; }
std::string_view to_string(PhaseMode p) { return p == PhaseMode::none ? "none" : "tracked"; }

// ---------------------------------------------------------------------------
// Pipeline helpers

/// Re-throws with the stage name prefixed, keeping the exception category.
template <class Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(name + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(name + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

std::string tcf_text(const TcfSeries& c) {
  std::ostringstream os;
  write_tcf(os, c);
  return os.str();
}

std::string spectrum_text(const Spectrum& s) {
  std::ostringstream os;
  write_spectrum(os, s);
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

void JobConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(lambda > 0.0, "lambda must be positive");
  require(tau_fs > 0.0, "tau_fs must be positive");
  require(t_max_fs > 0.0, "t_max_fs must be positive");
  require(record_every_fs > 0.0, "record_every_fs must be positive");
  require(substep_fs > 0.0, "substep_fs must be positive");
  require(omega_points >= 2, "omega_points must be at least 2");
  require(omega_max_ev > omega_min_ev, "omega_max_ev must exceed omega_min_ev");
  require(n_trajectories >= 1, "n_trajectories must be positive");
  require(static_stride >= 1, "static_stride must be positive");
  require(jobs >= 1, "jobs must be positive");
  require(!out.empty(), "out must not be empty");
  require(trajectory.empty() != !ou.has_value(),
          "exactly one trajectory source is required: trajectory or [ou]");
  require(trajectory.empty() || static_cast<int>(trajectory.size()) == n_trajectories,
          "n_trajectories must equal the number of trajectory files");
  require(!rotating_frame_ev || basis == Basis::frenkel,
          "rotating_frame_ev requires basis = \"frenkel\"");
  try {
    grid().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (ou) {
    try {
      ou->validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("ou: ") + e.what());
    }
  }
}

PropagationGrid JobConfig::grid() const {
  return PropagationGrid{0.0, t_max_fs, substep_fs, record_every_fs};
}

OmegaGrid JobConfig::omega_grid() const {
  return OmegaGrid{omega_min_ev, omega_max_ev, omega_points};
}

EngineOptions JobConfig::engine_options(Engine e) const {
  EngineOptions o;
  o.engine = e;
  o.vqa.integrator = integrator;
  o.vqa.phase = phase;
  o.rotating_frame = rotating_frame_ev;
  o.jobs = jobs;
  return o;
}

JobConfig parse_config_text(const std::string& text) {
  Table top;
  Table ou;
  bool has_ou = false;
  Table* current = &top;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line(trim(strip_comment(raw)));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(lineno, "", "malformed section header");
      const std::string name(trim(std::string_view(line).substr(1, line.size() - 2)));
      if (name != "ou") fail(lineno, name, "unknown section");
      if (has_ou) fail(lineno, name, "duplicate section");
      has_ou = true;
      current = &ou;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "", "expected 'key = value'");
    const std::string key(trim(std::string_view(line).substr(0, eq)));
    if (key.empty() || key.find_first_not_of(
                           "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_") !=
                           std::string::npos) {
      fail(lineno, key, "invalid key");
    }
    const std::string qualified = current == &ou ? "ou." + key : key;
    current->set(key, parse_value(trim(std::string_view(line).substr(eq + 1)), lineno,
                                  qualified));
  }

  JobConfig cfg;
  if (!top.has("basis")) fail(0, "basis", "missing required key");
  auto parse_enum = [&](const char* key, auto parser, auto& field) {
    if (!top.has(key)) return;
    const std::string v = top.string(key);
    field = as_config_error(key, top.line(key), [&] { return parser(v); });
  };
  parse_enum("basis", parse_basis, cfg.basis);
  parse_enum("engine", parse_engine, cfg.engine);
  parse_enum("tcf_method", parse_tcf_method, cfg.tcf_method);
  parse_enum("dipole_mode", parse_dipole_mode, cfg.dipole_mode);
  parse_enum("integrator", parse_integrator, cfg.integrator);
  parse_enum("phase", parse_phase_mode, cfg.phase);

  auto num = [&](const char* key, double& field) {
    if (top.has(key)) field = top.number(key);
  };
  num("lambda", cfg.lambda);
  num("tau_fs", cfg.tau_fs);
  num("t_max_fs", cfg.t_max_fs);
  num("record_every_fs", cfg.record_every_fs);
  num("substep_fs", cfg.substep_fs);
  num("omega_min_ev", cfg.omega_min_ev);
  num("omega_max_ev", cfg.omega_max_ev);
  if (top.has("rotating_frame_ev")) cfg.rotating_frame_ev = top.number("rotating_frame_ev");

  auto integer = [&](const char* key, int& field) {
    if (top.has(key)) field = top.integer<int>(key);
  };
  integer("omega_points", cfg.omega_points);
  integer("static_stride", cfg.static_stride);
  integer("jobs", cfg.jobs);
  if (top.has("seed")) cfg.seed = top.integer<std::uint64_t>("seed");
  if (top.has("out")) cfg.out = top.string("out");
  if (top.has("trajectory")) cfg.trajectory = top.strings("trajectory");
  if (top.has("n_trajectories")) {
    cfg.n_trajectories = top.integer<int>("n_trajectories");
  } else if (!cfg.trajectory.empty()) {
    cfg.n_trajectories = static_cast<int>(cfg.trajectory.size());
  }
  top.reject_unknown();

  if (has_ou) {
    OUConfig o;
    if (ou.has("n_chromophores")) o.n_chromophores = ou.integer<int>("n_chromophores");
    if (ou.has("mean_energy")) o.mean_energy = ou.number("mean_energy");
    if (ou.has("energy_sigma")) o.energy_sigma = ou.number("energy_sigma");
    if (ou.has("correlation_time")) o.correlation_time = ou.number("correlation_time");
    if (ou.has("dt_frame")) o.dt_frame = ou.number("dt_frame");
    if (ou.has("n_frames")) o.n_frames = ou.integer<int>("n_frames");

    const char* kVectors[] = {"mu00", "mu11", "mu01", "com"};
    int given = 0;
    for (const char* k : kVectors) given += ou.has(k) ? 1 : 0;
    if (given != 0 && given != 4) {
      fail(0, "ou", "mu00, mu11, mu01 and com must be given together");
    }
    if (given == 4 && o.n_chromophores >= 1) {
      Vec3 Chromophore::*fields[] = {&Chromophore::mu00, &Chromophore::mu11,
                                     &Chromophore::mu01, &Chromophore::com};
      o.sites.resize(static_cast<std::size_t>(o.n_chromophores));
      for (int f = 0; f < 4; ++f) {
        const std::string key = kVectors[f];
        const auto v = split_vectors(ou.numbers(key), o.n_chromophores, "ou." + key,
                                     ou.line(key));
        for (int i = 0; i < o.n_chromophores; ++i) {
          o.sites[static_cast<std::size_t>(i)].*fields[f] = v[static_cast<std::size_t>(i)];
        }
      }
    }
    try {
      ou.reject_unknown();
    } catch (const ConfigError& e) {
      // Report section-qualified key names.
      std::string msg = e.what();
      const auto pos = msg.find("key '");
      if (pos != std::string::npos) msg.insert(pos + 5, "ou.");
      throw ConfigError(msg);
    }
    cfg.ou = o;
  }
  cfg.validate();
  return cfg;
}

JobConfig parse_config(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string to_config_text(const JobConfig& c) {
  std::ostringstream os;
  os << "basis = " << quote(std::string(to_string(c.basis))) << '\n'
     << "engine = " << quote(std::string(to_string(c.engine))) << '\n'
     << "tcf_method = " << quote(std::string(to_string(c.tcf_method))) << '\n'
     << "lambda = " << fmt(c.lambda) << '\n'
     << "tau_fs = " << fmt(c.tau_fs) << '\n'
     << "t_max_fs = " << fmt(c.t_max_fs) << '\n'
     << "record_every_fs = " << fmt(c.record_every_fs) << '\n'
     << "substep_fs = " << fmt(c.substep_fs) << '\n'
     << "omega_min_ev = " << fmt(c.omega_min_ev) << '\n'
     << "omega_max_ev = " << fmt(c.omega_max_ev) << '\n'
     << "omega_points = " << c.omega_points << '\n'
     << "n_trajectories = " << c.n_trajectories << '\n'
     << "seed = " << c.seed << '\n';
  if (!c.trajectory.empty()) {
    os << "trajectory = [";
    for (std::size_t i = 0; i < c.trajectory.size(); ++i) {
      os << (i ? ", " : "") << quote(c.trajectory[i]);
    }
    os << "]\n";
  }
  os << "dipole_mode = " << quote(std::string(to_string(c.dipole_mode))) << '\n'
     << "integrator = " << quote(std::string(to_string(c.integrator))) << '\n'
     << "phase = " << quote(std::string(to_string(c.phase))) << '\n';
  if (c.rotating_frame_ev) os << "rotating_frame_ev = " << fmt(*c.rotating_frame_ev) << '\n';
  os << "static_stride = " << c.static_stride << '\n'
     << "jobs = " << c.jobs << '\n'
     << "out = " << quote(c.out) << '\n';
  if (c.ou) {
    const OUConfig& o = *c.ou;
    os << "\n[ou]\n"
       << "n_chromophores = " << o.n_chromophores << '\n'
       << "mean_energy = " << fmt(o.mean_energy) << '\n'
       << "energy_sigma = " << fmt(o.energy_sigma) << '\n'
       << "correlation_time = " << fmt(o.correlation_time) << '\n'
       << "dt_frame = " << fmt(o.dt_frame) << '\n'
       << "n_frames = " << o.n_frames << '\n';
    if (!o.sites.empty()) {
      os << "mu00 = " << vec_array(o.sites, &Chromophore::mu00) << '\n'
         << "mu11 = " << vec_array(o.sites, &Chromophore::mu11) << '\n'
         << "mu01 = " << vec_array(o.sites, &Chromophore::mu01) << '\n'
         << "com = " << vec_array(o.sites, &Chromophore::com) << '\n';
    }
  }
  return os.str();
}

std::vector<Trajectory> job_trajectories(const JobConfig& cfg) {
  std::vector<Trajectory> out;
  if (!cfg.trajectory.empty()) {
    for (const auto& p : cfg.trajectory) out.push_back(load_trajectory(p));
  } else {
    OUConfig o = *cfg.ou;
    o.seed = cfg.seed;
    out.resize(static_cast<std::size_t>(cfg.n_trajectories));
    parallel_for(out.size(), cfg.jobs, [&](std::size_t i) { out[i] = synthesize_ou(o, i); });
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double window = out[i].t_end() - out[i].t0;
    if (cfg.t_max_fs > window * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "t_max_fs = " << cfg.t_max_fs << " exceeds the " << window
         << " fs window of trajectory " << i;
      throw ConfigError(os.str());
    }
  }
  return out;
}

std::array<TcfSeries, 4> job_tcfs(const JobConfig& cfg,
                                  const std::vector<Trajectory>& trajs,
                                  Engine engine) {
  if (trajs.empty()) throw std::invalid_argument("no trajectories");
  EngineOptions opts = cfg.engine_options(engine);
  // Parallelize over ensemble members when there are several.
  const int outer_jobs = trajs.size() > 1 ? cfg.jobs : 1;
  if (trajs.size() > 1) opts.jobs = 1;

  std::vector<std::array<TcfSeries, 3>> members(trajs.size());
  parallel_for(trajs.size(), outer_jobs, [&](std::size_t i) {
    const Trajectory& traj = trajs[i];
    const TimeDependentOperator h = hamiltonian_series(traj, cfg.basis);
    const std::array<TimeDependentOperator, 3> mu = {
        dipole_series(traj, cfg.basis, Axis::x, cfg.dipole_mode),
        dipole_series(traj, cfg.basis, Axis::y, cfg.dipole_mode),
        dipole_series(traj, cfg.basis, Axis::z, cfg.dipole_mode)};
    PropagationGrid grid = cfg.grid();
    grid.t0 = traj.t0;
    grid.t1 = traj.t0 + cfg.t_max_fs;
    members[i] = cfg.tcf_method == TcfMethod::direct
                     ? tcf_direct(h, mu, grid, opts)
                     : tcf_small_lambda(h, mu, grid, opts, cfg.lambda);
    // Report times relative to the trajectory origin.
    for (auto& c : members[i]) {
      for (auto& t : c.times) t -= traj.t0;
    }
  });

  std::array<TcfSeries, 4> out;
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<TcfSeries> comp;
    comp.reserve(members.size());
    for (auto& m : members) comp.push_back(std::move(m[k]));
    out[k] = ensemble_average(comp);
  }
  out[3] = isotropic_average(out[0], out[1], out[2]);
  return out;
}

Spectrum job_static_spectrum(const JobConfig& cfg, const std::vector<Trajectory>& trajs) {
  std::vector<ChromophoreFrame> frames;
  for (const auto& t : trajs) {
    for (std::size_t j = 0; j < t.frames.size(); j += static_cast<std::size_t>(cfg.static_stride)) {
      frames.push_back(t.frames[j]);
    }
  }
  Spectrum s = static_spectrum(frames, cfg.basis, cfg.tau_fs, cfg.omega_grid());
  s.engine = "diagonalization";
  return s;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

JobResult run_job(const JobConfig& cfg, std::ostream& log) {
  stage("config", [&] { cfg.validate(); });
  JobResult result;
  const fs::path out(cfg.out);

  auto emit = [&](const fs::path& rel, const std::string& content) {
    const fs::path p = out / rel;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
    write_file_atomic(p, content);
    result.files.push_back(p);
    log << "[write] " << p.string() << '\n';
  };

  stage("output", [&] { emit("config.toml", to_config_text(cfg)); });
  const auto trajs = stage("trajectories", [&] { return job_trajectories(cfg); });
  log << "[trajectories] " << trajs.size() << " x " << trajs.front().n_chromophores()
      << " chromophores, basis " << to_string(cfg.basis) << '\n';

  auto tcf_stage = [&](Engine e) {
    const std::string name(to_string(e));
    const auto tcfs = stage(name + " tcf", [&] { return job_tcfs(cfg, trajs, e); });
    const char* files[] = {"tcf_x.csv", "tcf_y.csv", "tcf_z.csv", "tcf_iso.csv"};
    stage("output", [&] {
      for (int k = 0; k < 4; ++k) emit(fs::path(name) / files[k], tcf_text(tcfs[static_cast<std::size_t>(k)]));
    });
    Spectrum dyn = stage(name + " spectrum", [&] {
      return damped_fourier(tcfs[3], cfg.tau_fs, cfg.omega_grid());
    });
    dyn.engine = name;
    for (const auto& w : dyn.warnings) log << "[" << name << " spectrum] warning: " << w << '\n';
    stage("output", [&] { emit(fs::path(name) / "spectrum_dynamic.csv", spectrum_text(dyn)); });
    return tcfs;
  };

  const auto exact = tcf_stage(Engine::exact);
  const Spectrum stat = stage("static spectrum", [&] { return job_static_spectrum(cfg, trajs); });
  stage("output", [&] { emit("spectrum_static.csv", spectrum_text(stat)); });

  if (cfg.engine == Engine::vqa) {
    const auto vqa = tcf_stage(Engine::vqa);
    const auto delta = stage("delta_c", [&] { return relative_difference(exact[3], vqa[3]); });
    std::ostringstream os;
    write_delta_c(os, exact[3].times, delta);
    stage("output", [&] { emit("delta_c.csv", os.str()); });
    for (double d : delta) result.max_delta_c = std::max(result.max_delta_c, d);
    log << "[delta_c] max " << result.max_delta_c << '\n';
  }
  return result;
}

}  // namespace condspec
