#include "condspec/errors.hpp"
#include "condspec/job.hpp"

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

using namespace condspec;
namespace fs = std::filesystem;

namespace {

const char* kMonomer = R"(# single chromophore, no fluctuations
basis = "full"
t_max_fs = 300
record_every_fs = 0.1
substep_fs = 0.05
omega_min_ev = 4.0
omega_max_ev = 5.0
omega_points = 401

[ou]
n_chromophores = 1
energy_sigma = 0.0
n_frames = 151
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("condspec_job_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(CONDSPEC_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const JobConfig cfg = parse_config_text("basis = \"frenkel\"\n[ou]\nn_chromophores = 3\n");
  JobConfig expect;
  expect.basis = Basis::frenkel;
  expect.ou = OUConfig{};
  expect.ou->n_chromophores = 3;
  CHECK(cfg == expect);
  CHECK(cfg.tau_fs == 50.0);
  CHECK(cfg.lambda == 0.1);
  CHECK(cfg.engine == Engine::exact);
  CHECK(cfg.tcf_method == TcfMethod::direct);
  CHECK(cfg.omega_points == 2000);
  CHECK(cfg.n_trajectories == 1);
  CHECK(cfg.dipole_mode == DipoleMode::averaged);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors name the key and constraint") {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text).validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string base = "basis = \"full\"\n";
  CHECK_THAT(message(base + "tau_fs = -1\n[ou]\n"),
             Catch::Matchers::ContainsSubstring("tau_fs must be positive"));
  CHECK_THAT(message(base + "colour = 3\n"), Catch::Matchers::ContainsSubstring("colour"));
  CHECK_THAT(message(base + "[ou]\nwobble = 1\n"),
             Catch::Matchers::ContainsSubstring("ou.wobble"));
  CHECK_THAT(message(base + "[md]\n"), Catch::Matchers::ContainsSubstring("md"));
  CHECK_THAT(message("tau_fs = 10\n[ou]\n"), Catch::Matchers::ContainsSubstring("basis"));
  CHECK_THAT(message(base + "engine = \"analog\"\n[ou]\n"),
             Catch::Matchers::ContainsSubstring("engine"));
  CHECK_THAT(message(base + "lambda = abc\n[ou]\n"), Catch::Matchers::ContainsSubstring("lambda"));
  CHECK_THAT(message(base + "[ou]\ncorrelation_time = 0\n"),
             Catch::Matchers::ContainsSubstring("correlation_time"));
  CHECK_THAT(message(base), Catch::Matchers::ContainsSubstring("trajectory"));
  CHECK_THAT(message(base + "substep_fs = 0.03\n[ou]\n"),
             Catch::Matchers::ContainsSubstring("substep"));
  CHECK_THROWS_AS(parse_config("/nonexistent/job.toml"), IoError);
}

TEST_CASE("effective config text re-parses to an equal config") {
  JobConfig cfg = parse_config_text(kMonomer);
  CHECK(parse_config_text(to_config_text(cfg)) == cfg);

  cfg.basis = Basis::frenkel;
  cfg.engine = Engine::vqa;
  cfg.tcf_method = TcfMethod::small_lambda;
  cfg.lambda = 0.05;
  cfg.tau_fs = 33.3;
  cfg.rotating_frame_ev = 4.5;
  cfg.phase = PhaseMode::none;
  cfg.integrator = Integrator::euler;
  cfg.dipole_mode = DipoleMode::instant;
  cfg.seed = 12345678901ULL;
  cfg.out = "some dir/out";
  cfg.ou->sites = default_cluster(1);
  cfg.ou->correlation_time = 0.1 + 0.2;  // not exactly representable in short decimal
  CHECK(parse_config_text(to_config_text(cfg)) == cfg);

  JobConfig files;
  files.trajectory = {"a.jsonl", "b.jsonl"};
  files.n_trajectories = 2;
  CHECK(parse_config_text(to_config_text(files)) == files);
}

TEST_CASE("monomer pipeline: peak at the mean energy and byte-identical reruns") {
  const fs::path dir = scratch("monomer");
  JobConfig cfg = parse_config_text(kMonomer);
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  const JobResult r = run_job(cfg, log);
  CHECK(fs::exists(dir / "out/config.toml"));
  for (const char* f : {"exact/tcf_x.csv", "exact/tcf_y.csv", "exact/tcf_z.csv",
                        "exact/tcf_iso.csv", "exact/spectrum_dynamic.csv", "spectrum_static.csv"})
    CHECK(fs::exists(dir / "out" / f));
  CHECK(r.files.size() == 7);
  CHECK(parse_config(dir / "out/config.toml") == cfg);

  const Spectrum dyn = load_spectrum(dir / "out/exact/spectrum_dynamic.csv");
  const auto peaks = peak_analysis(dyn);
  REQUIRE(peaks.size() == 1);
  CHECK(std::abs(peaks[0].position - cfg.ou->mean_energy) <= cfg.omega_grid().step());
  CHECK(dyn.tau_fs == 50.0);
  CHECK(dyn.engine == "exact");

  const auto first = snapshot(dir / "out");
  run_job(cfg, log);
  CHECK(snapshot(dir / "out") == first);
  fs::remove_all(dir);
}

TEST_CASE("a failing vqa stage leaves the exact reference intact") {
  const fs::path dir = scratch("isolation");
  JobConfig cfg = parse_config_text(kMonomer);
  cfg.t_max_fs = 2.0;
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  run_job(cfg, log);
  const auto exact = snapshot(dir / "out/exact");

  cfg.engine = Engine::vqa;
  write_text(dir / "out/vqa", "blocks the vqa output directory\n");
  CHECK_THROWS_AS(run_job(cfg, log), IoError);
  CHECK(snapshot(dir / "out/exact") == exact);
  fs::remove_all(dir);
}

TEST_CASE("vqa run writes delta C against the exact reference") {
  const fs::path dir = scratch("vqa");
  JobConfig cfg = parse_config_text(kMonomer);
  cfg.engine = Engine::vqa;
  cfg.t_max_fs = 5.0;
  cfg.substep_fs = 0.005;
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  const JobResult r = run_job(cfg, log);
  CHECK(fs::exists(dir / "out/vqa/tcf_iso.csv"));
  CHECK(fs::exists(dir / "out/vqa/spectrum_dynamic.csv"));
  REQUIRE(fs::exists(dir / "out/delta_c.csv"));
  CHECK(slurp(dir / "out/delta_c.csv").rfind("t_fs,delta_c\n", 0) == 0);
  CHECK(r.max_delta_c < 1e-4);
  fs::remove_all(dir);
}

TEST_CASE("compare report") {
  const OmegaGrid grid{4.0, 5.0, 101};
  Spectrum a;
  a.omega = grid.values();
  for (double w : a.omega) a.intensity.push_back(1.0 / (1.0 + 100.0 * (w - 4.5) * (w - 4.5)));
  CHECK(compare_report(a, a).find("max |A - B| = 0.000000") != std::string::npos);
  Spectrum b = a;
  b.omega.pop_back();
  b.intensity.pop_back();
  CHECK_THROWS_AS(compare_report(a, b), std::invalid_argument);
}

TEST_CASE("compare report on a narrowing benchmark shows the broader static line") {
  const fs::path dir = scratch("narrowing");
  JobConfig cfg;
  cfg.t_max_fs = 300.0;
  cfg.n_trajectories = 200;
  cfg.omega_min_ev = 4.0;
  cfg.omega_max_ev = 5.0;
  cfg.omega_points = 801;
  cfg.ou = OUConfig{};
  cfg.ou->energy_sigma = 0.1;
  cfg.ou->correlation_time = 5.0;
  cfg.ou->dt_frame = 0.5;
  cfg.ou->n_frames = 601;
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  run_job(cfg, log);
  const std::string report = compare_report(load_spectrum(dir / "out/exact/spectrum_dynamic.csv"),
                                            load_spectrum(dir / "out/spectrum_static.csv"));

  // fwhm of the tallest row in each peak table
  std::map<char, double> width;
  std::istringstream is(report);
  std::string line;
  char table = 0;
  double best = -1.0;
  while (std::getline(is, line)) {
    if (line.size() > 2 && (line[0] == 'A' || line[0] == 'B') && line[1] == ' ') {
      table = line[0];
      best = -1.0;
      continue;
    }
    std::istringstream row(line);
    double pos, height, fwhm;
    if (table && row >> pos >> height >> fwhm && height > best) {
      best = height;
      width[table] = fwhm;
    }
  }
  REQUIRE(width.size() == 2);
  CHECK(width['B'] > width['A']);
  fs::remove_all(dir);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch("cli");
  write_text(dir / "ok.toml", kMonomer);
  const std::string out = " --out " + (dir / "out").string();

  CHECK(cli("--help") == 0);
  CHECK(cli("static --config " + (dir / "ok.toml").string() + out) == 0);
  CHECK(fs::exists(dir / "out/spectrum_static.csv"));
  CHECK(cli("synth --config " + (dir / "ok.toml").string() + out) == 0);
  CHECK(fs::exists(dir / "out/traj_0000.jsonl"));

  // flags override the file
  CHECK(cli("static --config " + (dir / "ok.toml").string() + out + " --tau-fs -5") == 1);
  write_text(dir / "bad.toml", std::string(kMonomer) + "tau_fs = -1\n");
  CHECK(cli("run --config " + (dir / "bad.toml").string() + out) == 1);
  CHECK(cli("run --bogus-flag") == 1);
  CHECK(cli("run --config " + (dir / "missing.toml").string()) == 3);
  CHECK(cli("spectrum --tcf " + (dir / "missing.csv").string()) == 3);

  // a site energy far beyond any physical scale makes the propagator step too stiff
  write_text(dir / "stiff.jsonl",
             "{\"format\":\"exciton-traj-v1\",\"dt_fs\":10.0,\"n_chromophores\":1}\n"
             "{\"t_fs\":0.0,\"chromophores\":[{\"E_ev\":1e12,\"mu00\":[0,0,0],"
             "\"mu11\":[0,0,0],\"mu01\":[1,0,0],\"com_ang\":[0,0,0]}]}\n"
             "{\"t_fs\":10.0,\"chromophores\":[{\"E_ev\":1e12,\"mu00\":[0,0,0],"
             "\"mu11\":[0,0,0],\"mu01\":[1,0,0],\"com_ang\":[0,0,0]}]}\n");
  write_text(dir / "stiff.toml", "basis = \"full\"\nt_max_fs = 1\ntrajectory = [\"" +
                                     (dir / "stiff.jsonl").string() + "\"]\n");
  CHECK(cli("tcf --config " + (dir / "stiff.toml").string() + out) == 2);
  fs::remove_all(dir);
}
