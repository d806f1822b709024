#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <toml.hpp>

#include "bvpcont/chemostat.hpp"
#include "bvpcont/nonlocal.hpp"
#include "bvpcont/resonance.hpp"

namespace bvpcont::cli {

struct Overrides {
  std::optional<std::size_t> grid;
  std::optional<double> tol;
  int jobs = 1;
};

struct ConfigFile {
  toml::table root;
  std::filesystem::path base_dir;

  /// [section] table, empty when absent.
  const toml::table& section(const std::string& name) const;
};

/// Throws IoError when unreadable, ConfigError on TOML syntax errors.
ConfigFile load_config(const std::filesystem::path& path);

struct NonlocalSetup {
  NonlocalProblem prob;
  NonlocalSolveOptions opts;
  int multistart = 3;
};

struct ResonanceSetup {
  ResonantProblem prob;
  RangeOptions opts;
  std::optional<double> s;
  double wirtinger_radius = 10.0;
  Rectangle box;
  int resolution = 9;
  WxOptions wx;
  std::vector<std::string> perturbation;
  std::vector<double> amplitudes;
  double degeneracy_tol = 1e-6;
};

struct ChemostatSetup {
  ChemostatModel model;
  double x0_max = 1e6;
  double tol = 1e-8;
};

NonlocalSetup build_nonlocal(const ConfigFile& cfg, const Overrides& ov);
ResonanceSetup build_resonance(const ConfigFile& cfg, const Overrides& ov);
ChemostatSetup build_chemostat(const ConfigFile& cfg, const Overrides& ov);

/// problem.kind when present.
std::optional<std::string> declared_kind(const ConfigFile& cfg);

}  // namespace bvpcont::cli
