#include "snse/assembly.hpp"

#include <cmath>
#include <vector>

namespace snse {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseOperator finalize(Eigen::Index rows, Eigen::Index cols, const Triplets& triplets, bool symmetric) {
  SparseOperator op;
  op.matrix.resize(rows, cols);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  op.symmetric = symmetric;
  return op;
}

// Scalar element matrices scattered to both velocity components.
template <typename Kernel>
SparseOperator assemble_scalar_block(const TaylorHoodSpace& s, Kernel&& kernel) {
  const BasisTable& table = default_table();
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(s.mesh().num_triangles()) * 2 * kP3LocalDofs * kP3LocalDofs);
  Eigen::Matrix<double, kP3LocalDofs, kP3LocalDofs> local;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    local.setZero();
    kernel(s.geometry(t), table, local);
    const auto& dofs = s.local_free_dofs(t);
    for (int a = 0; a < kP3LocalDofs; ++a) {
      if (dofs[2 * a] < 0) continue;
      for (int b = 0; b < kP3LocalDofs; ++b) {
        if (dofs[2 * b] < 0) continue;
        triplets.emplace_back(dofs[2 * a], dofs[2 * b], local(a, b));
        triplets.emplace_back(dofs[2 * a + 1], dofs[2 * b + 1], local(a, b));
      }
    }
  }
  return finalize(s.n_vel_free(), s.n_vel_free(), triplets, true);
}

}  // namespace

SparseOperator assemble_mass(const TaylorHoodSpace& s) {
  return assemble_scalar_block(s, [](const ElementGeometry& g, const BasisTable& table, auto& local) {
    for (std::size_t q = 0; q < table.size(); ++q) {
      const double w = 2.0 * g.area * table.rule.weights[q];
      for (int a = 0; a < kP3LocalDofs; ++a) {
        for (int b = 0; b < kP3LocalDofs; ++b) local(a, b) += w * table.p3[q][a] * table.p3[q][b];
      }
    }
  });
}

SparseOperator assemble_stiffness(const TaylorHoodSpace& s) {
  return assemble_scalar_block(s, [](const ElementGeometry& g, const BasisTable& table, auto& local) {
    P3Gradients grads;
    for (std::size_t q = 0; q < table.size(); ++q) {
      const double w = 2.0 * g.area * table.rule.weights[q];
      p3_gradients(g, table.p3_partials[q], grads);
      for (int a = 0; a < kP3LocalDofs; ++a) {
        for (int b = 0; b < kP3LocalDofs; ++b) local(a, b) += w * grads[a].dot(grads[b]);
      }
    }
  });
}

SparseOperator assemble_divergence(const TaylorHoodSpace& s, VelocityColumns columns) {
  const BasisTable& table = default_table();
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(s.mesh().num_triangles()) * kP2LocalDofs * kLocalVelocityDofs);
  P3Gradients grads;
  Eigen::Matrix<double, kP2LocalDofs, kLocalVelocityDofs> local;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    const ElementGeometry& g = s.geometry(t);
    local.setZero();
    for (std::size_t q = 0; q < table.size(); ++q) {
      const double w = 2.0 * g.area * table.rule.weights[q];
      p3_gradients(g, table.p3_partials[q], grads);
      for (int i = 0; i < kP2LocalDofs; ++i) {
        const double wq = w * table.p2[q][i];
        for (int b = 0; b < kP3LocalDofs; ++b) {
          local(i, 2 * b) += wq * grads[b].x();
          local(i, 2 * b + 1) += wq * grads[b].y();
        }
      }
    }
    const auto& pdofs = s.pressure_dofs(t);
    const auto& free = s.local_free_dofs(t);
    const auto& scalar = s.scalar_dofs(t);
    for (int i = 0; i < kP2LocalDofs; ++i) {
      for (int j = 0; j < kLocalVelocityDofs; ++j) {
        const int col = columns == VelocityColumns::free ? free[j] : 2 * scalar[j / 2] + j % 2;
        if (col >= 0) triplets.emplace_back(pdofs[i], col, local(i, j));
      }
    }
  }
  const Eigen::Index ncols = columns == VelocityColumns::free ? s.n_vel_free() : s.n_vel_total();
  return finalize(s.n_pressure(), ncols, triplets, false);
}

void convection_element(const ElementGeometry& geometry, const BasisTable& table, const LocalVector& u_local,
                        const ConvectionForm& form, LocalVector* residual, LocalMatrix* jacobian,
                        ConvectionLinearization linearization) {
  const double omega = form.divergence_weight;
  if (residual) residual->fill(0.0);
  if (jacobian) jacobian->setZero();
  P3Gradients grads;
  std::array<double, kP3LocalDofs> advect;
  for (std::size_t q = 0; q < table.size(); ++q) {
    const double w = 2.0 * geometry.area * table.rule.weights[q];
    const auto& phi = table.p3[q];
    p3_gradients(geometry, table.p3_partials[q], grads);

    Vec2 u(0.0, 0.0);
    Eigen::Matrix2d grad_u = Eigen::Matrix2d::Zero();  // grad_u(c, d) = d_d u_c
    for (int b = 0; b < kP3LocalDofs; ++b) {
      const double ux = u_local[2 * b], uy = u_local[2 * b + 1];
      u.x() += phi[b] * ux;
      u.y() += phi[b] * uy;
      grad_u(0, 0) += ux * grads[b].x();
      grad_u(0, 1) += ux * grads[b].y();
      grad_u(1, 0) += uy * grads[b].x();
      grad_u(1, 1) += uy * grads[b].y();
    }
    const double div_u = grad_u(0, 0) + grad_u(1, 1);

    if (residual) {
      const double gx = u.x() * grad_u(0, 0) + u.y() * grad_u(0, 1) + omega * div_u * u.x();
      const double gy = u.x() * grad_u(1, 0) + u.y() * grad_u(1, 1) + omega * div_u * u.y();
      for (int a = 0; a < kP3LocalDofs; ++a) {
        (*residual)[2 * a] += w * phi[a] * gx;
        (*residual)[2 * a + 1] += w * phi[a] * gy;
      }
    }
    if (!jacobian) continue;

    for (int b = 0; b < kP3LocalDofs; ++b) advect[b] = u.dot(grads[b]) + omega * div_u * phi[b];
    const bool full = linearization == ConvectionLinearization::newton;
    for (int a = 0; a < kP3LocalDofs; ++a) {
      const double wa = w * phi[a];
      for (int b = 0; b < kP3LocalDofs; ++b) {
        const double diag = wa * advect[b];
        if (full) {
          // derivative through the advecting field: phi_b d_d u_c + omega u_c d_d phi_b
          (*jacobian)(2 * a, 2 * b) += diag + wa * (phi[b] * grad_u(0, 0) + omega * u.x() * grads[b].x());
          (*jacobian)(2 * a, 2 * b + 1) += wa * (phi[b] * grad_u(0, 1) + omega * u.x() * grads[b].y());
          (*jacobian)(2 * a + 1, 2 * b) += wa * (phi[b] * grad_u(1, 0) + omega * u.y() * grads[b].x());
          (*jacobian)(2 * a + 1, 2 * b + 1) += diag + wa * (phi[b] * grad_u(1, 1) + omega * u.y() * grads[b].y());
        } else {
          (*jacobian)(2 * a, 2 * b) += diag;
          (*jacobian)(2 * a + 1, 2 * b + 1) += diag;
        }
      }
    }
  }
}

DualVector convection_residual(const TaylorHoodSpace& s, const VelocityVector& u, const ConvectionForm& form) {
  const BasisTable& table = default_table();
  DualVector out{Eigen::VectorXd::Zero(s.n_vel_free())};
  LocalVector local_u, local_r;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, u, t, local_u);
    convection_element(s.geometry(t), table, local_u, form, &local_r, nullptr);
    const auto& dofs = s.local_free_dofs(t);
    for (int i = 0; i < kLocalVelocityDofs; ++i) {
      if (dofs[i] >= 0) out.values[dofs[i]] += local_r[i];
    }
  }
  return out;
}

SparseOperator convection_jacobian(const TaylorHoodSpace& s, const VelocityVector& u, const ConvectionForm& form) {
  const BasisTable& table = default_table();
  Triplets triplets;
  triplets.reserve(static_cast<std::size_t>(s.mesh().num_triangles()) * kLocalVelocityDofs * kLocalVelocityDofs);
  LocalVector local_u;
  LocalMatrix local_j;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, u, t, local_u);
    convection_element(s.geometry(t), table, local_u, form, nullptr, &local_j);
    const auto& dofs = s.local_free_dofs(t);
    for (int i = 0; i < kLocalVelocityDofs; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < kLocalVelocityDofs; ++j) {
        if (dofs[j] >= 0) triplets.emplace_back(dofs[i], dofs[j], local_j(i, j));
      }
    }
  }
  return finalize(s.n_vel_free(), s.n_vel_free(), triplets, false);
}

double max_asymmetry(const SparseOperator& a) {
  const Eigen::SparseMatrix<double, Eigen::RowMajor> at = a.matrix.transpose();
  const Eigen::SparseMatrix<double, Eigen::RowMajor> diff = a.matrix - at;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

}  // namespace snse
