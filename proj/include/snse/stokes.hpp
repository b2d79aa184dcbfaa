#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "snse/assembly.hpp"
#include "snse/space.hpp"

namespace snse {

/// Sparse LU of the bordered saddle matrix
///
///     [ A   B^T  0 ] [u]   [f]
///     [ B   0    m ] [p] = [g]
///     [ 0   m^T  0 ] [l]   [0]
///
/// where m holds the integrals of the pressure basis. The last row pins the
/// pressure mean to zero; l vanishes whenever the constants lie in the left
/// kernel of B (no-slip). The pattern covers every pair of velocity dofs that
/// share an element, so the velocity block can be refilled and refactorized
/// without a new symbolic analysis.
class SaddleSolver {
 public:
  SaddleSolver(const TaylorHoodSpace& s, const SparseOperator& divergence, const Eigen::VectorXd& mean_weights);
  SaddleSolver(const SaddleSolver&) = delete;
  SaddleSolver& operator=(const SaddleSolver&) = delete;

  /// Replace the velocity block by a (whose pattern must lie inside the element pattern).
  void assign_velocity_block(const SparseOperator& a);
  /// Velocity block entries of element t plus scale * local, in element-local numbering.
  void add_element_block(int t, const LocalMatrix& local, double scale);
  /// Remember / restore the current matrix values.
  void save_values();
  void restore_values();

  /// Throws SolverFailure on a singular matrix.
  void factorize();

  struct Solution {
    Eigen::VectorXd velocity;
    Eigen::VectorXd pressure;
    double multiplier = 0.0;
    double relative_residual = 0.0;  // ||S x - b|| / ||b||
  };

  /// One step of iterative refinement is applied when the first residual is not small.
  [[nodiscard]] Solution solve(const Eigen::VectorXd& f) const;
  [[nodiscard]] Solution solve(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;


  [[nodiscard]] int n_velocity() const { return nv_; }
  [[nodiscard]] int n_pressure() const { return np_; }
  [[nodiscard]] const Eigen::SparseMatrix<double>& matrix() const { return system_; }

 private:
  int find_slot(int row, int col) const;

  int nv_ = 0;
  int np_ = 0;
  Eigen::SparseMatrix<double> system_;  // column-major for SparseLU
  std::vector<int> velocity_slots_;     // column-major positions of the velocity block
  std::vector<std::array<int, kLocalVelocityDofs * kLocalVelocityDofs>> element_slots_;
  Eigen::VectorXd saved_values_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  bool factorized_ = false;
};

/// Assembled operators of the discrete Stokes problem over one space plus the
/// factorized mass-saddle system that realizes the discrete Helmholtz projection.
/// Immutable after construction.
class StokesOperators {
 public:
  explicit StokesOperators(std::shared_ptr<const TaylorHoodSpace> s);

  [[nodiscard]] const TaylorHoodSpace& space() const { return *space_; }
  [[nodiscard]] const std::shared_ptr<const TaylorHoodSpace>& space_ptr() const { return space_; }
  [[nodiscard]] const SparseOperator& mass() const { return mass_; }
  [[nodiscard]] const SparseOperator& stiffness() const { return stiffness_; }
  [[nodiscard]] const SparseOperator& divergence() const { return divergence_; }
  [[nodiscard]] const Eigen::VectorXd& mean_weights() const { return mean_weights_; }
  [[nodiscard]] const SaddleSolver& projector() const { return *projector_; }

  /// ||B u||_2
  [[nodiscard]] double divergence_residual(const VelocityVector& u) const;
  /// Vector M-inner product u^T M v.
  [[nodiscard]] double inner(const VelocityVector& u, const VelocityVector& v) const;

 private:
  std::shared_ptr<const TaylorHoodSpace> space_;
  SparseOperator mass_;
  SparseOperator stiffness_;
  SparseOperator divergence_;
  Eigen::VectorXd mean_weights_;
  std::unique_ptr<SaddleSolver> projector_;
};

[[nodiscard]] std::shared_ptr<const StokesOperators> make_stokes_operators(std::shared_ptr<const TaylorHoodSpace> s);

/// L2-orthogonal projection onto discretely divergence-free fields of the functional f.
[[nodiscard]] VelocityVector helmholtz_project(const StokesOperators& ops, const DualVector& f);
[[nodiscard]] VelocityVector helmholtz_project(const StokesOperators& ops, const VelocityVector& f);

/// A_h u for discretely divergence-free u; throws PreconditionViolation if ||B u|| exceeds tolerance.
[[nodiscard]] VelocityVector stokes_apply(const StokesOperators& ops, const VelocityVector& u,
                                          double tolerance = 1e-9);

struct StokesSolution {
  VelocityVector velocity;
  PressureVector pressure;  // mean zero
};

/// -Laplace u + grad p = f, div u = 0, u = 0 on the boundary.
[[nodiscard]] StokesSolution solve_steady_stokes(const StokesOperators& ops, const VectorField& body_force);

/// P_h y0 via the load <y0, v>.
[[nodiscard]] VelocityVector project_initial(const StokesOperators& ops, const VectorField& y0);

inline constexpr int kDenseOracleMaxDofs = 400;

/// Explicit orthonormal basis Z of ker B with dense projection and eigen
/// solves. Only available on meshes with at most kDenseOracleMaxDofs free
/// velocity dofs.
class DenseKernelOracle {
 public:
  explicit DenseKernelOracle(const StokesOperators& ops);

  [[nodiscard]] const Eigen::MatrixXd& basis() const { return basis_; }
  [[nodiscard]] Eigen::Index dimension() const { return basis_.cols(); }

  /// Least-squares projection Z (Z^T M Z)^{-1} Z^T f.
  [[nodiscard]] VelocityVector project(const DualVector& f) const;

  /// Generalized eigenpairs of (Z^T K Z, Z^T M Z), ascending; eigenvectors are M-orthonormal
  /// and expressed in free velocity coordinates.
  [[nodiscard]] const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

  /// ||A_h^{theta/2} u|| through the eigen-expansion of a divergence-free u.
  [[nodiscard]] double fractional_norm(const VelocityVector& u, double theta) const;

 private:
  const StokesOperators* ops_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd mass_reduced_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Eigenvalues of A_h obtained by applying stokes_apply to the columns of the oracle basis, ascending.
[[nodiscard]] Eigen::VectorXd stokes_eigenvalues_from_action(const StokesOperators& ops,
                                                             const DenseKernelOracle& oracle);

}  // namespace snse
