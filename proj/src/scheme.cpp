#include "snse/scheme.hpp"

#include <algorithm>
#include <cmath>

#include "snse/errors.hpp"

namespace snse {

void SchemeConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("SchemeConfig: T must be positive");
  if (J < 1) throw InvalidArgument("SchemeConfig: J must be at least 1");
  if (!(newton_tol > 0.0)) throw InvalidArgument("SchemeConfig: newton_tol must be positive");
  if (newton_max_iters < 1 || max_halvings < 0) throw InvalidArgument("SchemeConfig: bad iteration limits");
  if (snapshot_stride < 1) throw InvalidArgument("SchemeConfig: snapshot_stride must be at least 1");
}

Stepper::Stepper(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg)
    : ops_(std::move(ops)), cfg_(cfg), solver_(ops_->space(), ops_->divergence(), ops_->mean_weights()) {
  cfg_.validate();
  const double tau = cfg_.tau();
  SparseOperator linear;
  linear.matrix = ops_->mass().matrix + tau * ops_->stiffness().matrix;
  solver_.assign_velocity_block(linear);
  solver_.save_values();
  if (!cfg_.convection) solver_.factorize();
}

Eigen::VectorXd Stepper::drift_residual(const VelocityVector& u, const VelocityVector& y_prev, bool jacobian) {
  const double tau = cfg_.tau();
  Eigen::VectorXd r = ops_->mass().matrix * (u.coefficients - y_prev.coefficients);
  r.noalias() += tau * (ops_->stiffness().matrix * u.coefficients);
  if (!cfg_.convection) return r;

  if (jacobian) solver_.restore_values();
  const TaylorHoodSpace& s = ops_->space();
  const BasisTable& table = default_table();
  const auto linearization =
      cfg_.solver == NonlinearSolver::newton ? ConvectionLinearization::newton : ConvectionLinearization::oseen;
  LocalVector local_u, local_r;
  LocalMatrix local_j;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, u, t, local_u);
    convection_element(s.geometry(t), table, local_u, cfg_.form, &local_r, jacobian ? &local_j : nullptr,
                       linearization);
    const auto& dofs = s.local_free_dofs(t);
    for (int i = 0; i < kLocalVelocityDofs; ++i) {
      if (dofs[i] >= 0) r[dofs[i]] += tau * local_r[i];
    }
    if (jacobian) solver_.add_element_block(t, local_j, tau);
  }
  return r;
}

Stepper::Result Stepper::step(const VelocityVector& y, const DualVector& noise_load, int step_index) {
  const int nv = ops_->space().n_vel_free();
  const int np = ops_->space().n_pressure();
  if (y.coefficients.size() != nv || noise_load.values.size() != nv) {
    throw InvalidArgument("Stepper::step: vector sizes do not match the space");
  }
  const auto& b = ops_->divergence().matrix;
  const Eigen::VectorXd rhs = ops_->mass().matrix * y.coefficients + noise_load.values;

  Result out;
  StepReport& report = out.report;
  report.tolerance = cfg_.newton_tol * (1.0 + rhs.norm());

  VelocityVector u = y;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(np);  // multiplier of the B^T block
  auto full_residual = [&](const Eigen::VectorXd& drift, const VelocityVector& uu, const Eigen::VectorXd& pp,
                           Eigen::VectorXd& ru, Eigen::VectorXd& rp) {
    ru = drift - noise_load.values;
    ru.noalias() += b.transpose() * pp;
    rp = b * uu.coefficients;
    return std::sqrt(ru.squaredNorm() + rp.squaredNorm());
  };

  const bool nonlinear = cfg_.convection;
  Eigen::VectorXd ru, rp;
  double norm = full_residual(drift_residual(u, y, false), u, p, ru, rp);
  report.history.push_back(norm);
  bool refresh = !cfg_.jacobian_reuse || !have_jacobian_;

  while (norm > report.tolerance) {
    if (report.iterations >= cfg_.newton_max_iters || !std::isfinite(norm)) {
      throw NewtonDivergence("Newton did not converge in step " + std::to_string(step_index) + " (residual " +
                                 std::to_string(norm) + ")",
                             norm, step_index);
    }
    const bool fresh = nonlinear && refresh;
    if (fresh) {
      drift_residual(u, y, true);
      solver_.factorize();
      have_jacobian_ = true;
      ++report.factorizations;
    }
    const SaddleSolver::Solution d = solver_.solve(-ru, -rp);

    double alpha = 1.0;
    VelocityVector trial;
    Eigen::VectorXd trial_p, trial_ru, trial_rp;
    double trial_norm = 0.0;
    for (int halving = 0;; ++halving) {
      trial.coefficients = u.coefficients + alpha * d.velocity;
      trial_p = p + alpha * d.pressure;
      trial_norm = full_residual(drift_residual(trial, y, false), trial, trial_p, trial_ru, trial_rp);
      if (trial_norm < norm || halving >= cfg_.max_halvings) break;
      alpha *= 0.5;
      ++report.halvings;
    }
    refresh = !cfg_.jacobian_reuse || (!fresh && trial_norm > cfg_.reuse_contraction * norm);
    u = std::move(trial);
    p = std::move(trial_p);
    ru = std::move(trial_ru);
    rp = std::move(trial_rp);
    norm = trial_norm;
    ++report.iterations;
    report.history.push_back(norm);
  }
  report.residual = norm;
  report.divergence = (b * u.coefficients).norm();
  out.velocity = std::move(u);
  out.pressure = PressureVector{-p};
  return out;
}

const VelocityVector& Trajectory::at_step(int j) const {
  const auto it = std::lower_bound(snapshot_steps.begin(), snapshot_steps.end(), j);
  if (it == snapshot_steps.end() || *it != j) {
    throw InvalidArgument("Trajectory: no snapshot stored at step " + std::to_string(j));
  }
  return snapshots[it - snapshot_steps.begin()];
}

double Trajectory::max_l2() const {
  return l2_norms.empty() ? 0.0 : *std::max_element(l2_norms.begin(), l2_norms.end());
}

double Trajectory::max_h1() const {
  return h1_norms.empty() ? 0.0 : *std::max_element(h1_norms.begin(), h1_norms.end());
}

namespace {

double energy_norm(const SparseOperator& a, const VelocityVector& u) {
  return std::sqrt(std::max(0.0, u.coefficients.dot(a.matrix * u.coefficients)));
}

}  // namespace

Trajectory run_trajectory(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg,
                          const NoiseModel& model, const BrownianPath& path, const VelocityVector& y0) {
  cfg.validate();
  if (path.steps() != cfg.J || path.modes() != model.modes()) {
    throw InvalidArgument("run_trajectory: path shape does not match config and model");
  }
  if (std::abs(path.tau() - cfg.tau()) > 1e-14 * cfg.tau()) {
    throw InvalidArgument("run_trajectory: path step size differs from T/J");
  }
  const TaylorHoodSpace& s = ops->space();
  if (y0.coefficients.size() != s.n_vel_free()) throw InvalidArgument("run_trajectory: y0 size mismatch");

  Trajectory traj;
  traj.config = cfg;
  traj.mesh_hash = s.mesh().hash_hex();
  traj.seed = path.seed();
  traj.model = model.describe();
  traj.space = ops->space_ptr();
  traj.snapshot_steps.push_back(0);
  traj.snapshots.push_back(y0);
  traj.l2_norms.push_back(energy_norm(ops->mass(), y0));
  traj.h1_norms.push_back(energy_norm(ops->stiffness(), y0));
  traj.steps.reserve(cfg.J);

  Stepper stepper(ops, cfg);
  VelocityVector y = y0;
  for (int j = 0; j < cfg.J; ++j) {
    const DualVector load =
        model.is_zero() ? DualVector{Eigen::VectorXd::Zero(s.n_vel_free())} : noise_load(s, model, y, path.increments(j));
    Stepper::Result r = stepper.step(y, load, j + 1);
    y = std::move(r.velocity);
    traj.l2_norms.push_back(energy_norm(ops->mass(), y));
    traj.h1_norms.push_back(energy_norm(ops->stiffness(), y));
    traj.steps.push_back(std::move(r.report));
    const int step = j + 1;
    if (step % cfg.snapshot_stride == 0 || step == cfg.J) {
      traj.snapshot_steps.push_back(step);
      traj.snapshots.push_back(y);
      if (cfg.store_pressure) traj.pressures.push_back(std::move(r.pressure));
    }
  }
  return traj;
}

Trajectory run_trajectory(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg,
                          const NoiseModel& model, std::uint64_t seed, const VelocityVector& y0) {
  cfg.validate();
  return run_trajectory(std::move(ops), cfg, model, sample_path(seed, cfg.J, model.modes(), cfg.tau()), y0);
}

namespace {

SchemeConfig refined(const SchemeConfig& cfg, int k) {
  if (k < 2) throw InvalidArgument("run_reference_temporal: refinement factor must be at least 2");
  SchemeConfig fine = cfg;
  fine.J = cfg.J * k;
  fine.snapshot_stride = k * cfg.snapshot_stride;
  return fine;
}

}  // namespace

BrownianPath reference_path(const SchemeConfig& cfg, const NoiseModel& model, std::uint64_t seed, int k) {
  const SchemeConfig fine = refined(cfg, k);
  return sample_path(seed, fine.J, model.modes(), fine.tau());
}

Trajectory run_reference_temporal(std::shared_ptr<const StokesOperators> ops, const SchemeConfig& cfg,
                                  const NoiseModel& model, std::uint64_t seed, const VelocityVector& y0, int k) {
  const SchemeConfig fine = refined(cfg, k);
  return run_trajectory(std::move(ops), fine, model, reference_path(cfg, model, seed, k), y0);
}

}  // namespace snse
