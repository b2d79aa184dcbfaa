#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "snse/experiments.hpp"
#include "snse/fields.hpp"
#include "snse/mesh.hpp"

namespace snse {

struct PairSpec {
  int level = 0;
  int J = 0;
  bool operator==(const PairSpec&) const = default;
};

/// Everything a CLI command needs. Serialized as a JSON key tree; see README for the keys.
struct RunConfig {
  // mesh
  Domain domain = Domain::disk;
  int mesh_base = 8;  // square: cells per side; disk: boundary vertices
  int mesh_level = 1;
  std::vector<int> space_levels{0, 1, 2};
  int reference_level = 3;

  // time
  double T = 0.25;
  int J = 64;
  std::vector<int> time_levels{16, 32, 64, 128};
  int reference_J = 1024;

  // noise
  NoiseFamily family = NoiseFamily::standard;
  int modes = 16;
  double c_scale = 0.5;
  double decay = 1.0;
  double coupling = 1.0;
  double saturation = 4.0;

  // initial data: amplitude of the smooth vortex
  double amplitude = 1.0;

  // solver
  double newton_tol = 1e-10;
  int newton_max_iters = 25;
  int max_halvings = 8;
  NonlinearSolver solver = NonlinearSolver::newton;
  bool jacobian_reuse = false;

  // sampling and study
  std::uint64_t seed_first = 1;
  std::uint64_t seed_last = 8;
  double alpha = 2.5;
  double beta = 0.5;
  std::vector<double> epsilon{0.001, 0.01, 0.1, 1.0, 10.0};
  std::vector<PairSpec> pairs{{0, 4}, {1, 16}};
  PairSpec exceedance_reference{2, 64};
  double r_h = std::numeric_limits<double>::infinity();
  double r_h_tau = std::numeric_limits<double>::infinity();

  // output
  std::string out_dir = "snse-out";
  int workers = 1;
  bool save_trajectory = true;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError on malformed text, unknown keys, wrong types or invalid values.
[[nodiscard]] RunConfig parse_config(const std::string& text);
/// Throws ConfigError when the file cannot be read.
[[nodiscard]] RunConfig load_config(const std::string& path);
[[nodiscard]] std::string dump_config(const RunConfig& cfg);
/// Throws ConfigError on inconsistent values.
void validate_config(const RunConfig& cfg);

/// "A..B" or "A".
[[nodiscard]] std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

[[nodiscard]] Mesh build_mesh(const RunConfig& cfg, int level);
[[nodiscard]] SchemeConfig scheme_config(const RunConfig& cfg, int J);
[[nodiscard]] NoiseParameters noise_parameters(const RunConfig& cfg);
[[nodiscard]] std::vector<std::uint64_t> seeds(const RunConfig& cfg);

}  // namespace snse
