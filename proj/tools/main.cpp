// condspec command-line driver.
#include "condspec/errors.hpp"
#include "condspec/job.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace condspec;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumeric = 2, kIo = 3 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> engine;
  std::optional<std::string> basis;
  std::optional<double> tau_fs;
  std::optional<double> lambda;
  std::optional<int> jobs;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Job configuration file")->required();
    app->add_option("--seed", seed, "Base RNG seed for synthesized trajectories");
    app->add_option("--out", out, "Output directory");
    app->add_option("--engine", engine, "exact or vqa");
    app->add_option("--basis", basis, "full or frenkel");
    app->add_option("--tau-fs", tau_fs, "Lineshape damping time (fs)");
    app->add_option("--lambda", lambda, "Small-lambda estimator strength");
    app->add_option("--jobs", jobs, "Worker threads");
  }

  JobConfig load() const {
    JobConfig cfg = parse_config(config);
    try {
      if (seed) cfg.seed = *seed;
      if (out) cfg.out = *out;
      if (engine) cfg.engine = parse_engine(*engine);
      if (basis) cfg.basis = parse_basis(*basis);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (tau_fs) cfg.tau_fs = *tau_fs;
    if (lambda) cfg.lambda = *lambda;
    if (jobs) cfg.jobs = *jobs;
    cfg.validate();
    return cfg;
  }
};

void print_peaks(const Spectrum& s) {
  std::cout << std::fixed << std::setprecision(5);
  std::cout << "position_ev  height   fwhm_ev\n";
  for (const auto& p : peak_analysis(s)) {
    std::cout << p.position << "  " << p.height << "  " << p.fwhm << '\n';
  }
}

int guarded(const std::function<void()>& fn) {
  try {
    fn();
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exciton absorption spectra from qubit-encoded dynamics"};
  app.require_subcommand(1);

  Overrides run_opts, tcf_opts, static_opts, synth_opts;
  auto* run = app.add_subcommand("run", "Full pipeline: TCFs, spectra and, for vqa, delta C");
  run_opts.attach(run);
  auto* tcf = app.add_subcommand("tcf", "Write TCF files for the configured engine");
  tcf_opts.attach(tcf);
  auto* stat = app.add_subcommand("static", "Write the static (ensemble) spectrum");
  static_opts.attach(stat);
  auto* synth = app.add_subcommand("synth", "Write synthesized OU trajectory files");
  synth_opts.attach(synth);

  std::string tcf_file, spectrum_out;
  double spectrum_tau = 50.0;
  OmegaGrid omega;
  auto* spec = app.add_subcommand("spectrum", "Damped Fourier transform of a TCF file");
  spec->add_option("--tcf", tcf_file, "Input TCF file (t_fs,re,im)")->required();
  spec->add_option("--tau-fs", spectrum_tau, "Damping time (fs)");
  spec->add_option("--out", spectrum_out, "Output spectrum file");
  spec->add_option("--omega-min", omega.min_ev, "Grid start (eV)");
  spec->add_option("--omega-max", omega.max_ev, "Grid end (eV)");
  spec->add_option("--omega-points", omega.points, "Grid points");

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "Peak tables and pointwise difference of two spectra");
  cmp->add_option("a", cmp_a, "First spectrum file")->required();
  cmp->add_option("b", cmp_b, "Second spectrum file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (run->parsed()) {
    return guarded([&] {
      const JobConfig cfg = run_opts.load();
      const auto r = run_job(cfg, std::cout);
      std::cout << "wrote " << r.files.size() << " files to " << cfg.out << '\n';
    });
  }
  if (tcf->parsed()) {
    return guarded([&] {
      const JobConfig cfg = tcf_opts.load();
      const auto trajs = job_trajectories(cfg);
      const auto tcfs = job_tcfs(cfg, trajs, cfg.engine);
      const fs::path dir = fs::path(cfg.out) / std::string(to_string(cfg.engine));
      fs::create_directories(dir);
      const char* names[] = {"tcf_x.csv", "tcf_y.csv", "tcf_z.csv", "tcf_iso.csv"};
      for (int k = 0; k < 4; ++k) {
        std::ostringstream os;
        write_tcf(os, tcfs[static_cast<std::size_t>(k)]);
        write_file_atomic(dir / names[k], os.str());
        std::cout << "[write] " << (dir / names[k]).string() << '\n';
      }
    });
  }
  if (stat->parsed()) {
    return guarded([&] {
      const JobConfig cfg = static_opts.load();
      const Spectrum s = job_static_spectrum(cfg, job_trajectories(cfg));
      fs::create_directories(cfg.out);
      std::ostringstream os;
      write_spectrum(os, s);
      write_file_atomic(fs::path(cfg.out) / "spectrum_static.csv", os.str());
      print_peaks(s);
    });
  }
  if (synth->parsed()) {
    return guarded([&] {
      const JobConfig cfg = synth_opts.load();
      if (!cfg.ou) throw ConfigError("synth needs an [ou] section");
      const auto trajs = job_trajectories(cfg);
      fs::create_directories(cfg.out);
      for (std::size_t i = 0; i < trajs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "traj_%04zu.jsonl", i);
        std::ostringstream os;
        write_trajectory(os, trajs[i]);
        write_file_atomic(fs::path(cfg.out) / name, os.str());
        std::cout << "[write] " << (fs::path(cfg.out) / name).string() << '\n';
      }
    });
  }
  if (spec->parsed()) {
    return guarded([&] {
      try {
        omega.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      if (!(spectrum_tau > 0.0)) throw ConfigError("tau_fs must be positive");
      const Spectrum s = damped_fourier(load_tcf(tcf_file), spectrum_tau, omega);
      for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
      if (!spectrum_out.empty()) {
        std::ostringstream os;
        write_spectrum(os, s);
        write_file_atomic(spectrum_out, os.str());
      }
      print_peaks(s);
    });
  }
  if (cmp->parsed()) {
    return guarded([&] {
      std::cout << compare_report(load_spectrum(cmp_a), load_spectrum(cmp_b));
    });
  }
  return kOk;
}
