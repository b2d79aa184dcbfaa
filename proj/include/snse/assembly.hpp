#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "snse/space.hpp"

namespace snse {

/// Row-compressed operator with sorted columns.
struct SparseOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  bool symmetric = false;

  [[nodiscard]] Eigen::Index rows() const { return matrix.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return matrix.cols(); }
};

/// Velocity mass matrix over free dofs.
[[nodiscard]] SparseOperator assemble_mass(const TaylorHoodSpace& s);

/// Velocity stiffness matrix <grad u, grad v> over free dofs.
[[nodiscard]] SparseOperator assemble_stiffness(const TaylorHoodSpace& s);

enum class VelocityColumns { free, all };

/// B[q, v] = <div v, q>. With VelocityColumns::all the columns follow the
/// total numbering 2*scalar_dof + component, Dirichlet dofs included.
[[nodiscard]] SparseOperator assemble_divergence(const TaylorHoodSpace& s,
                                                 VelocityColumns columns = VelocityColumns::free);

/// Convection (u.grad)u + w (div u) u. The skew-symmetrized operator uses w = 1/2.
struct ConvectionForm {
  double divergence_weight = 0.5;
};

inline constexpr int kLocalVelocityDofs = 2 * kP3LocalDofs;
using LocalVector = std::array<double, kLocalVelocityDofs>;
using LocalMatrix = Eigen::Matrix<double, kLocalVelocityDofs, kLocalVelocityDofs, Eigen::RowMajor>;

enum class ConvectionLinearization {
  newton,  // full derivative of N at u
  oseen,   // z -> (u.grad)z + w (div u) z, the frozen-advection operator
};

/// Element kernel shared by residual and Jacobian assembly. Either output may be null.
void convection_element(const ElementGeometry& geometry, const BasisTable& table, const LocalVector& u_local,
                        const ConvectionForm& form, LocalVector* residual, LocalMatrix* jacobian,
                        ConvectionLinearization linearization = ConvectionLinearization::newton);

/// N(u) with <N(u), v> = <(u.grad)u + 1/2 (div u) u, v>.
[[nodiscard]] DualVector convection_residual(const TaylorHoodSpace& s, const VelocityVector& u,
                                             const ConvectionForm& form = {});

/// Directional derivative of N at u.
[[nodiscard]] SparseOperator convection_jacobian(const TaylorHoodSpace& s, const VelocityVector& u,
                                                 const ConvectionForm& form = {});

[[nodiscard]] double max_asymmetry(const SparseOperator& a);

}  // namespace snse
