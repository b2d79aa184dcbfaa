#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snse/assembly.hpp"
#include "snse/noise.hpp"
#include "snse/stokes.hpp"

namespace snse {

enum class NonlinearSolver {
  newton,  // exact Jacobian
  picard,  // frozen advection (Oseen) linearization
};

struct SchemeConfig {
  double T = 1.0;
  int J = 64;
  double newton_tol = 1e-10;
  int newton_max_iters = 25;
  int max_halvings = 8;
  NonlinearSolver solver = NonlinearSolver::newton;
  bool convection = true;  // false drops G from the drift
  ConvectionForm form{};
  /// Keep the last factorized Jacobian across iterations and steps (chord iterations) and
  /// refactorize only when the residual contracts by less than reuse_contraction. The
  /// stopping test is unchanged.
  bool jacobian_reuse = false;
  double reuse_contraction = 0.25;
  bool store_pressure = false;
  int snapshot_stride = 1;  // keep Y_j for j divisible by the stride (and j = J)

  [[nodiscard]] double tau() const { return T / J; }
  void validate() const;
};

struct StepReport {
  int iterations = 0;
  int halvings = 0;
  int factorizations = 0;
  double residual = 0.0;          // final ||r|| of the step equations
  double tolerance = 0.0;         // newton_tol * (1 + ||rhs||)
  std::vector<double> history;    // ||r|| before each iteration and at exit
  double divergence = 0.0;        // ||B Y_{j+1}||
};

/// One step Y_j -> Y_{j+1} of the implicit drift / explicit noise scheme,
///
///   M(Y - Y_j) + tau K Y + tau N(Y) + B^T p = L_j,   B Y = 0,   m^T p = 0,
///
/// solved by damped Newton on the bordered saddle system. Owns its own
/// factorization; not shareable across threads.
class Stepper {
 public:
  Stepper(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg);

  struct Result {
    VelocityVector velocity;
    PressureVector pressure;  // physical pressure, mean zero
    StepReport report;
  };

  /// `step_index` is only used to label errors.
  [[nodiscard]] Result step(const VelocityVector& y, const DualVector& noise_load, int step_index = 0);

  [[nodiscard]] const StokesOperators& operators() const { return *ops_; }
  [[nodiscard]] const SchemeConfig& config() const { return cfg_; }

 private:
  /// Velocity residual without the pressure term; also fills the saddle Jacobian when requested.
  Eigen::VectorXd drift_residual(const VelocityVector& u, const VelocityVector& y_prev, bool jacobian);

  std::shared_ptr<const StokesOperators> ops_;
  SchemeConfig cfg_;
  SaddleSolver solver_;
  bool have_jacobian_ = false;
};

struct Trajectory {
  SchemeConfig config;
  std::string mesh_hash;
  std::uint64_t seed = 0;
  std::string model;                       // NoiseModel::describe()
  std::shared_ptr<const TaylorHoodSpace> space;
  std::vector<int> snapshot_steps;         // j of each stored snapshot, ascending, starts at 0
  std::vector<VelocityVector> snapshots;
  std::vector<PressureVector> pressures;   // parallel to snapshot_steps[1..] when stored
  std::vector<double> l2_norms;            // ||Y_j||, j = 0..J
  std::vector<double> h1_norms;            // ||grad Y_j||, j = 0..J
  std::vector<StepReport> steps;           // j = 1..J at index j-1

  /// Snapshot at step j; throws InvalidArgument if it was not stored.
  [[nodiscard]] const VelocityVector& at_step(int j) const;
  [[nodiscard]] double max_l2() const;
  [[nodiscard]] double max_h1() const;
};

/// Runs J steps from Y_0 = y0 (expected discretely divergence-free) driven by `path`.
[[nodiscard]] Trajectory run_trajectory(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg,
                                        const NoiseModel& model, const BrownianPath& path, const VelocityVector& y0);

/// As above with the path sample_path(seed, J, N, tau).
[[nodiscard]] Trajectory run_trajectory(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg,
                                        const NoiseModel& model, std::uint64_t seed, const VelocityVector& y0);

/// J*k steps of size tau/k on the fine path sample_path(seed, J*k, N, tau/k), whose
/// k-coarsening drives the matching coarse run. Snapshots are stored every
/// k * cfg.snapshot_stride fine steps, i.e. at the coarse snapshot times.
[[nodiscard]] Trajectory run_reference_temporal(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg,
                                                const NoiseModel& model, std::uint64_t seed, const VelocityVector& y0,
                                                int k);

/// Path used by run_reference_temporal; coarsen it by k to drive the coupled coarse run.
[[nodiscard]] BrownianPath reference_path(const SchemeConfig& cfg, const NoiseModel& model, std::uint64_t seed, int k);

/// Container file: magic, JSON header (mesh hash, config, model, seed), then flat binary64 arrays.
void save_trajectory(const Trajectory& traj, const std::string& path);
/// Throws IoError on malformed files and InvalidArgument if the mesh hash differs from `space`.
[[nodiscard]] Trajectory load_trajectory(const std::string& path, std::shared_ptr<const TaylorHoodSpace> space);

[[nodiscard]] std::string config_json(const SchemeConfig& cfg);

}  // namespace snse
