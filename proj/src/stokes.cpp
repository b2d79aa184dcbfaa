#include "snse/stokes.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "snse/errors.hpp"

namespace snse {

SaddleSolver::SaddleSolver(const TaylorHoodSpace& s, const SparseOperator& divergence,
                           const Eigen::VectorXd& mean_weights)
    : nv_(s.n_vel_free()), np_(s.n_pressure()) {
  if (divergence.rows() != np_ || divergence.cols() != nv_ || mean_weights.size() != np_) {
    throw InvalidArgument("SaddleSolver: operator shapes do not match the space");
  }
  const int n = nv_ + np_ + 1;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(s.mesh().num_triangles()) * kLocalVelocityDofs * kLocalVelocityDofs +
                   2 * divergence.matrix.nonZeros() + 2 * np_);
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    const auto& dofs = s.local_free_dofs(t);
    for (int i : dofs) {
      if (i < 0) continue;
      for (int j : dofs) {
        if (j >= 0) triplets.emplace_back(i, j, 0.0);
      }
    }
  }
  for (int q = 0; q < divergence.matrix.outerSize(); ++q) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(divergence.matrix, q); it; ++it) {
      triplets.emplace_back(nv_ + q, static_cast<int>(it.col()), it.value());
      triplets.emplace_back(static_cast<int>(it.col()), nv_ + q, it.value());
    }
  }
  for (int q = 0; q < np_; ++q) {
    triplets.emplace_back(nv_ + q, n - 1, mean_weights[q]);
    triplets.emplace_back(n - 1, nv_ + q, mean_weights[q]);
  }
  system_.resize(n, n);
  system_.setFromTriplets(triplets.begin(), triplets.end());
  system_.makeCompressed();

  for (int col = 0; col < nv_; ++col) {
    for (int k = system_.outerIndexPtr()[col]; k < system_.outerIndexPtr()[col + 1]; ++k) {
      if (system_.innerIndexPtr()[k] < nv_) velocity_slots_.push_back(k);
    }
  }
  element_slots_.resize(s.mesh().num_triangles());
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    const auto& dofs = s.local_free_dofs(t);
    for (int i = 0; i < kLocalVelocityDofs; ++i) {
      for (int j = 0; j < kLocalVelocityDofs; ++j) {
        element_slots_[t][i * kLocalVelocityDofs + j] = (dofs[i] < 0 || dofs[j] < 0) ? -1 : find_slot(dofs[i], dofs[j]);
      }
    }
  }
}

int SaddleSolver::find_slot(int row, int col) const {
  const int* begin = system_.innerIndexPtr() + system_.outerIndexPtr()[col];
  const int* end = system_.innerIndexPtr() + system_.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) throw InvalidArgument("SaddleSolver: entry outside the element pattern");
  return static_cast<int>(it - system_.innerIndexPtr());
}

void SaddleSolver::assign_velocity_block(const SparseOperator& a) {
  if (a.rows() != nv_ || a.cols() != nv_) throw InvalidArgument("SaddleSolver: velocity block shape mismatch");
  double* values = system_.valuePtr();
  for (int k : velocity_slots_) values[k] = 0.0;
  for (int r = 0; r < a.matrix.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a.matrix, r); it; ++it) {
      values[find_slot(r, static_cast<int>(it.col()))] += it.value();
    }
  }
  factorized_ = false;
}

void SaddleSolver::add_element_block(int t, const LocalMatrix& local, double scale) {
  double* values = system_.valuePtr();
  const auto& slots = element_slots_[t];
  for (int i = 0; i < kLocalVelocityDofs; ++i) {
    for (int j = 0; j < kLocalVelocityDofs; ++j) {
      const int slot = slots[i * kLocalVelocityDofs + j];
      if (slot >= 0) values[slot] += scale * local(i, j);
    }
  }
  factorized_ = false;
}

void SaddleSolver::save_values() {
  saved_values_ = Eigen::Map<const Eigen::VectorXd>(system_.valuePtr(), system_.nonZeros());
}

void SaddleSolver::restore_values() {
  if (saved_values_.size() != system_.nonZeros()) throw InvalidArgument("SaddleSolver: no saved values");
  Eigen::Map<Eigen::VectorXd>(system_.valuePtr(), system_.nonZeros()) = saved_values_;
  factorized_ = false;
}

void SaddleSolver::factorize() {
  if (!analyzed_) {
    lu_.analyzePattern(system_);
    analyzed_ = true;
  }
  lu_.factorize(system_);
  if (lu_.info() != Eigen::Success) {
    throw SolverFailure("SaddleSolver: singular saddle-point matrix (inf-sup violation?)");
  }
  factorized_ = true;
}

SaddleSolver::Solution SaddleSolver::solve(const Eigen::VectorXd& f) const {
  return solve(f, Eigen::VectorXd::Zero(np_));
}

SaddleSolver::Solution SaddleSolver::solve(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  if (!factorized_) throw SolverFailure("SaddleSolver: solve before factorize");
  const int n = nv_ + np_ + 1;
  Eigen::VectorXd rhs(n);
  rhs << f, g, 0.0;
  Eigen::VectorXd x = lu_.solve(rhs);
  Eigen::VectorXd r = rhs - system_ * x;
  const double scale = std::max(rhs.norm(), 1e-300);
  if (r.norm() > 1e-13 * scale) {
    x += lu_.solve(r);
    r = rhs - system_ * x;
  }
  if (!x.allFinite()) throw SolverFailure("SaddleSolver: non-finite solution");
  Solution out;
  out.relative_residual = rhs.norm() > 0.0 ? r.norm() / rhs.norm() : r.norm();
  out.velocity = x.head(nv_);
  out.pressure = x.segment(nv_, np_);
  out.multiplier = x[n - 1];
  return out;
}

StokesOperators::StokesOperators(std::shared_ptr<const TaylorHoodSpace> s)
    : space_(std::move(s)),
      mass_(assemble_mass(*space_)),
      stiffness_(assemble_stiffness(*space_)),
      divergence_(assemble_divergence(*space_)),
      mean_weights_(pressure_mean_weights(*space_)) {
  projector_ = std::make_unique<SaddleSolver>(*space_, divergence_, mean_weights_);
  projector_->assign_velocity_block(mass_);
  projector_->factorize();
}

double StokesOperators::divergence_residual(const VelocityVector& u) const {
  return (divergence_.matrix * u.coefficients).norm();
}

double StokesOperators::inner(const VelocityVector& u, const VelocityVector& v) const {
  return u.coefficients.dot(mass_.matrix * v.coefficients);
}

std::shared_ptr<const StokesOperators> make_stokes_operators(std::shared_ptr<const TaylorHoodSpace> s) {
  return std::make_shared<const StokesOperators>(std::move(s));
}

VelocityVector helmholtz_project(const StokesOperators& ops, const DualVector& f) {
  if (f.values.size() != ops.space().n_vel_free()) throw InvalidArgument("helmholtz_project: size mismatch");
  return {ops.projector().solve(f.values).velocity};
}

VelocityVector helmholtz_project(const StokesOperators& ops, const VelocityVector& f) {
  return helmholtz_project(ops, DualVector{ops.mass().matrix * f.coefficients});
}

VelocityVector stokes_apply(const StokesOperators& ops, const VelocityVector& u, double tolerance) {
  const double div = ops.divergence_residual(u);
  if (div > tolerance * (1.0 + u.coefficients.norm())) {
    throw PreconditionViolation("stokes_apply: input is not discretely divergence-free (||Bu|| = " +
                                std::to_string(div) + ")");
  }
  return {ops.projector().solve(ops.stiffness().matrix * u.coefficients).velocity};
}

StokesSolution solve_steady_stokes(const StokesOperators& ops, const VectorField& body_force) {
  SaddleSolver solver(ops.space(), ops.divergence(), ops.mean_weights());
  solver.assign_velocity_block(ops.stiffness());
  solver.factorize();
  const DualVector load = load_vector(ops.space(), body_force);
  auto sol = solver.solve(load.values);
  // The multiplier of the B^T block is minus the physical pressure.
  return {VelocityVector{std::move(sol.velocity)}, PressureVector{-sol.pressure}};
}

VelocityVector project_initial(const StokesOperators& ops, const VectorField& y0) {
  return helmholtz_project(ops, load_vector(ops.space(), y0));
}

DenseKernelOracle::DenseKernelOracle(const StokesOperators& ops) : ops_(&ops) {
  const int nv = ops.space().n_vel_free();
  if (nv > kDenseOracleMaxDofs) {
    throw InvalidArgument("DenseKernelOracle: " + std::to_string(nv) + " velocity dofs exceed the dense limit");
  }
  const Eigen::MatrixXd b = Eigen::MatrixXd(ops.divergence().matrix);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = 1e-10 * (sigma.size() > 0 ? sigma[0] : 1.0);
  int rank = 0;
  while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;
  basis_ = svd.matrixV().rightCols(nv - rank);

  const Eigen::MatrixXd m = Eigen::MatrixXd(ops.mass().matrix);
  const Eigen::MatrixXd k = Eigen::MatrixXd(ops.stiffness().matrix);
  mass_reduced_ = basis_.transpose() * m * basis_;
  const Eigen::MatrixXd k_reduced = basis_.transpose() * k * basis_;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(k_reduced, mass_reduced_);
  if (eig.info() != Eigen::Success) throw SolverFailure("DenseKernelOracle: eigen solve failed");
  eigenvalues_ = eig.eigenvalues();
  eigenvectors_ = basis_ * eig.eigenvectors();
}

VelocityVector DenseKernelOracle::project(const DualVector& f) const {
  const Eigen::VectorXd rhs = basis_.transpose() * f.values;
  const Eigen::VectorXd c = mass_reduced_.ldlt().solve(rhs);
  return {basis_ * c};
}

double DenseKernelOracle::fractional_norm(const VelocityVector& u, double theta) const {
  const Eigen::VectorXd coeff = eigenvectors_.transpose() * (ops_->mass().matrix * u.coefficients);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) sum += std::pow(eigenvalues_[i], theta) * coeff[i] * coeff[i];
  return std::sqrt(sum);
}

Eigen::VectorXd stokes_eigenvalues_from_action(const StokesOperators& ops, const DenseKernelOracle& oracle) {
  const Eigen::MatrixXd& z = oracle.basis();
  Eigen::MatrixXd c(z.cols(), z.cols());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    const VelocityVector w = stokes_apply(ops, VelocityVector{z.col(i)});
    c.col(i) = z.transpose() * w.coefficients;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> eig(c, false);
  Eigen::VectorXd values = eig.eigenvalues().real();
  std::sort(values.data(), values.data() + values.size());
  return values;
}

}  // namespace snse
