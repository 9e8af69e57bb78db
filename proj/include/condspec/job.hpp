#pragma once

#include "condspec/correlation.hpp"
#include "condspec/exciton.hpp"
#include "condspec/spectrum.hpp"
#include "condspec/trajectory.hpp"
#include "condspec/vqa.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace condspec {

/// Everything one pipeline run needs. Field names match the config keys.
struct JobConfig {
  Basis basis = Basis::full;
  Engine engine = Engine::exact;
  TcfMethod tcf_method = TcfMethod::direct;
  double lambda = 0.1;
  double tau_fs = 50.0;

  double t_max_fs = 100.0;
  double record_every_fs = 0.05;
  double substep_fs = 0.005;
  double omega_min_ev = 2.0;
  double omega_max_ev = 7.0;
  int omega_points = 2000;

  int n_trajectories = 1;
  std::uint64_t seed = 0;
  /// Trajectory files; when empty the [ou] section synthesizes them.
  std::vector<std::string> trajectory;
  std::optional<OUConfig> ou;

  DipoleMode dipole_mode = DipoleMode::averaged;
  Integrator integrator = Integrator::rk4;
  PhaseMode phase = PhaseMode::tracked;
  std::optional<double> rotating_frame_ev;
  int static_stride = 1;
  int jobs = 1;
  std::string out = "out";

  /// Throws ConfigError naming the violated constraint.
  void validate() const;

  PropagationGrid grid() const;
  OmegaGrid omega_grid() const;
  EngineOptions engine_options(Engine e) const;

  friend bool operator==(const JobConfig&, const JobConfig&) = default;
};

/// Flat TOML subset: `key = value` lines, `[ou]` section, `#` comments,
/// strings in double quotes, numbers, booleans and one-line arrays.
/// Unknown keys and malformed values throw ConfigError with the line and key.
JobConfig parse_config_text(const std::string& text);
JobConfig parse_config(const std::filesystem::path& path);

/// Effective configuration in the same syntax; re-parses to an equal config.
std::string to_config_text(const JobConfig& cfg);

/// Trajectories named by the config (loaded or synthesized, in order).
std::vector<Trajectory> job_trajectories(const JobConfig& cfg);

/// Ensemble-averaged Cartesian TCFs followed by the isotropic average.
std::array<TcfSeries, 4> job_tcfs(const JobConfig& cfg,
                                  const std::vector<Trajectory>& trajs,
                                  Engine engine);

Spectrum job_static_spectrum(const JobConfig& cfg,
                             const std::vector<Trajectory>& trajs);

struct JobResult {
  std::vector<std::filesystem::path> files;
  double max_delta_c = 0.0;  ///< VQA runs only
};

/**
 * Full pipeline. Writes config.toml, exact/tcf_{x,y,z,iso}.csv,
 * exact/spectrum_dynamic.csv and spectrum_static.csv; with engine = vqa also
 * vqa/... and delta_c.csv, after the exact reference is on disk. Every file
 * is written to a temporary name and renamed into place. Progress lines go
 * to `log`.
 */
JobResult run_job(const JobConfig& cfg, std::ostream& log);

/// Writes `content` to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace condspec
