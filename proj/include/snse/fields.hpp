#pragma once

#include <Eigen/Core>

#include "snse/mesh.hpp"
#include "snse/space.hpp"

namespace snse {

enum class Domain { square, disk };

/// A scalar function with its gradient and Hessian at one point.
struct Jet {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

[[nodiscard]] Jet operator*(const Jet& a, const Jet& b);

/// Vanishes with its gradient on the domain boundary; max value 1.
/// Square: 256 x^2(1-x)^2 y^2(1-y)^2. Disk: (1-|x|^2)^2.
[[nodiscard]] Jet boundary_bump(Domain domain, const Vec2& x);
[[nodiscard]] Jet plane_wave(const Vec2& k, double phase, const Vec2& x);  // sin(pi k.x + phase)
[[nodiscard]] Jet affine(double c0, const Vec2& c, const Vec2& x);

/// curl psi = (d_y psi, -d_x psi) and its gradient (rows are components).
[[nodiscard]] inline Vec2 curl(const Jet& psi) { return {psi.grad.y(), -psi.grad.x()}; }
[[nodiscard]] inline Eigen::Matrix2d curl_gradient(const Jet& psi) {
  Eigen::Matrix2d out;
  out.row(0) = psi.hess.row(1);
  out.row(1) = -psi.hess.row(0);
  return out;
}

/// Smooth divergence-free initial velocity with zero trace: amplitude * curl(bump * affine).
[[nodiscard]] VectorField vortex_field(Domain domain, double amplitude);

/// Steady Stokes solution on the unit square: u = curl(x^2(1-x)^2 y^2(1-y)^2),
/// p = x^3 + y^3 - 1/2 (mean zero), f = -Laplace u + grad p.
struct ManufacturedStokes {
  VectorField velocity;
  ScalarField pressure;
  VectorField force;
};
[[nodiscard]] ManufacturedStokes manufactured_stokes_square();

}  // namespace snse
