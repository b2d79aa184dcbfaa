#include "snse/fields.hpp"

#include <cmath>
#include <numbers>

namespace snse {

Jet operator*(const Jet& a, const Jet& b) {
  Jet out;
  out.value = a.value * b.value;
  out.grad = a.grad * b.value + a.value * b.grad;
  out.hess = a.hess * b.value + a.grad * b.grad.transpose() + b.grad * a.grad.transpose() + a.value * b.hess;
  return out;
}

Jet boundary_bump(Domain domain, const Vec2& x) {
  Jet out;
  if (domain == Domain::disk) {
    const double s = 1.0 - x.squaredNorm();
    out.value = s * s;
    out.grad = -4.0 * s * x;
    out.hess = 8.0 * x * x.transpose() - 4.0 * s * Eigen::Matrix2d::Identity();
    return out;
  }
  auto p = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
  auto dp = [](double t) { return 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t); };
  auto ddp = [](double t) { return 2.0 - 12.0 * t + 12.0 * t * t; };
  const double px = p(x.x()), py = p(x.y());
  const double dx = dp(x.x()), dy = dp(x.y());
  out.value = 256.0 * px * py;
  out.grad = 256.0 * Vec2(dx * py, px * dy);
  out.hess << ddp(x.x()) * py, dx * dy, dx * dy, px * ddp(x.y());
  out.hess *= 256.0;
  return out;
}

Jet plane_wave(const Vec2& k, double phase, const Vec2& x) {
  const double pi = std::numbers::pi;
  const double theta = pi * k.dot(x) + phase;
  Jet out;
  out.value = std::sin(theta);
  out.grad = pi * std::cos(theta) * k;
  out.hess = -pi * pi * std::sin(theta) * (k * k.transpose());
  return out;
}

Jet affine(double c0, const Vec2& c, const Vec2& x) {
  Jet out;
  out.value = c0 + c.dot(x);
  out.grad = c;
  return out;
}

VectorField vortex_field(Domain domain, double amplitude) {
  const Vec2 center = domain == Domain::disk ? Vec2(0.0, 0.0) : Vec2(0.5, 0.5);
  const double scale = domain == Domain::disk ? 0.25 : 0.125;
  return [=](const Vec2& x) -> Vec2 {
    const Jet psi = boundary_bump(domain, x) * affine(1.0, Vec2(0.5, 0.25), x - center);
    return amplitude * scale * curl(psi);
  };
}

ManufacturedStokes manufactured_stokes_square() {
  auto p0 = [](double t) { return t * t * (1.0 - t) * (1.0 - t); };
  auto p1 = [](double t) { return 2.0 * t - 6.0 * t * t + 4.0 * t * t * t; };
  auto p2 = [](double t) { return 2.0 - 12.0 * t + 12.0 * t * t; };
  auto p3 = [](double t) { return -12.0 + 24.0 * t; };
  ManufacturedStokes m;
  m.velocity = [=](const Vec2& x) -> Vec2 {
    return {p0(x.x()) * p1(x.y()), -p1(x.x()) * p0(x.y())};
  };
  m.pressure = [](const Vec2& x) { return x.x() * x.x() * x.x() + x.y() * x.y() * x.y() - 0.5; };
  m.force = [=](const Vec2& x) -> Vec2 {
    const double a = x.x(), b = x.y();
    const double lap_u = p2(a) * p1(b) + p0(a) * p3(b);
    const double lap_v = -(p3(a) * p0(b) + p1(a) * p2(b));
    return {-lap_u + 3.0 * a * a, -lap_v + 3.0 * b * b};
  };
  return m;
}

}  // namespace snse
