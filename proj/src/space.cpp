#include "snse/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snse/errors.hpp"

namespace snse {

namespace {

ElementGeometry make_geometry(const Mesh& m, int t) {
  ElementGeometry g;
  const auto& tri = m.triangles()[t];
  for (int k = 0; k < 3; ++k) g.vertices[k] = m.vertices()[tri[k]];
  const Vec2& p0 = g.vertices[0];
  const Vec2& p1 = g.vertices[1];
  const Vec2& p2 = g.vertices[2];
  const double two_area = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
  g.area = 0.5 * two_area;
  g.grad_lambda[0] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / two_area;
  g.grad_lambda[1] = Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / two_area;
  g.grad_lambda[2] = Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / two_area;
  return g;
}

}  // namespace

Barycentric ElementGeometry::barycentric(const Vec2& p) const {
  const Vec2 d = p - vertices[0];
  const double l1 = grad_lambda[1].dot(d);
  const double l2 = grad_lambda[2].dot(d);
  return {1.0 - l1 - l2, l1, l2};
}

BasisTable tabulate(const QuadratureRule& rule) {
  BasisTable table;
  table.rule = rule;
  table.p3.resize(rule.size());
  table.p3_partials.resize(rule.size());
  table.p2.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    p3_values(rule.points[q], table.p3[q]);
    p3_partials(rule.points[q], table.p3_partials[q]);
    p2_values(rule.points[q], table.p2[q]);
  }
  return table;
}

const BasisTable& default_table() {
  static const BasisTable table = tabulate(default_rule());
  return table;
}

void p3_gradients(const ElementGeometry& g, const std::array<std::array<double, 3>, kP3LocalDofs>& partials,
                  P3Gradients& out) {
  for (int a = 0; a < kP3LocalDofs; ++a) {
    out[a] = partials[a][0] * g.grad_lambda[0] + partials[a][1] * g.grad_lambda[1] +
             partials[a][2] * g.grad_lambda[2];
  }
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  geometry_.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) geometry_.push_back(make_geometry(mesh, t));
  lo_ = Vec2(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  hi_ = -lo_;
  for (const auto& v : mesh.vertices()) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()))));
  nx_ = ny_ = side;
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  const Vec2 extent = (hi_ - lo_).cwiseMax(Vec2(1e-300, 1e-300));
  auto cell = [&](double v, double lo, double ext, int n) {
    return std::clamp(static_cast<int>(std::floor((v - lo) / ext * n)), 0, n - 1);
  };
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    Vec2 tlo = geometry_[t].vertices[0], thi = geometry_[t].vertices[0];
    for (const auto& v : geometry_[t].vertices) {
      tlo = tlo.cwiseMin(v);
      thi = thi.cwiseMax(v);
    }
    const double pad = 1e-9 * extent.maxCoeff();
    const int i0 = cell(tlo.x() - pad, lo_.x(), extent.x(), nx_), i1 = cell(thi.x() + pad, lo_.x(), extent.x(), nx_);
    const int j0 = cell(tlo.y() - pad, lo_.y(), extent.y(), ny_), j1 = cell(thi.y() + pad, lo_.y(), extent.y(), ny_);
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(const Vec2& p, double tolerance) const {
  const Vec2 extent = (hi_ - lo_).cwiseMax(Vec2(1e-300, 1e-300));
  const double slack = tolerance * extent.maxCoeff();
  if (p.x() < lo_.x() - slack || p.x() > hi_.x() + slack || p.y() < lo_.y() - slack || p.y() > hi_.y() + slack) {
    return std::nullopt;
  }
  const int i = std::clamp(static_cast<int>(std::floor((p.x() - lo_.x()) / extent.x() * nx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y() - lo_.y()) / extent.y() * ny_)), 0, ny_ - 1);
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    Barycentric l = geometry_[t].barycentric(p);
    if (l[0] >= -tolerance && l[1] >= -tolerance && l[2] >= -tolerance) return Hit{t, l};
  }
  return std::nullopt;
}

TaylorHoodSpace::TaylorHoodSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  const int nv = m.num_vertices(), ne = m.num_edges(), nt = m.num_triangles();
  n_scalar_p3_ = nv + 2 * ne + nt;
  n_pressure_ = nv + ne;

  nodes_.resize(n_scalar_p3_);
  std::vector<bool> scalar_dirichlet(n_scalar_p3_, false);
  for (int v = 0; v < nv; ++v) {
    nodes_[v] = m.vertices()[v];
    scalar_dirichlet[v] = m.boundary_vertex_mask()[v];
  }
  for (int e = 0; e < ne; ++e) {
    const Vec2& a = m.vertices()[m.edges()[e].vertices[0]];
    const Vec2& b = m.vertices()[m.edges()[e].vertices[1]];
    nodes_[nv + 2 * e] = (2.0 * a + b) / 3.0;
    nodes_[nv + 2 * e + 1] = (a + 2.0 * b) / 3.0;
    scalar_dirichlet[nv + 2 * e] = scalar_dirichlet[nv + 2 * e + 1] = m.boundary_edge_mask()[e];
  }
  geometry_.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    geometry_.push_back(make_geometry(m, t));
    nodes_[nv + 2 * ne + t] = (geometry_[t].vertices[0] + geometry_[t].vertices[1] + geometry_[t].vertices[2]) / 3.0;
  }

  velocity_dofs_.resize(nt);
  pressure_dofs_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles()[t];
    auto& vd = velocity_dofs_[t];
    auto& pd = pressure_dofs_[t];
    for (int k = 0; k < 3; ++k) {
      vd[k] = tri[k];
      pd[k] = tri[k];
    }
    for (int k = 0; k < 3; ++k) {
      const int e = m.triangle_edges(t)[k];
      const bool forward = tri[(k + 1) % 3] < tri[(k + 2) % 3];
      vd[3 + 2 * k] = nv + 2 * e + (forward ? 0 : 1);
      vd[4 + 2 * k] = nv + 2 * e + (forward ? 1 : 0);
      pd[3 + k] = nv + e;
    }
    vd[9] = nv + 2 * ne + t;
  }

  free_index_.assign(n_scalar_p3_, -1);
  dirichlet_mask_.assign(2 * n_scalar_p3_, false);
  for (int s = 0; s < n_scalar_p3_; ++s) {
    if (scalar_dirichlet[s]) {
      dirichlet_mask_[2 * s] = dirichlet_mask_[2 * s + 1] = true;
    } else {
      free_index_[s] = n_scalar_free_++;
      free_to_scalar_.push_back(s);
    }
  }

  local_free_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    for (int a = 0; a < kP3LocalDofs; ++a) {
      const int f = free_index_[velocity_dofs_[t][a]];
      local_free_[t][2 * a] = f < 0 ? -1 : 2 * f;
      local_free_[t][2 * a + 1] = f < 0 ? -1 : 2 * f + 1;
    }
  }
  locator_ = std::make_shared<PointLocator>(m);
}

bool TaylorHoodSpace::same_dofs(const TaylorHoodSpace& other) const {
  return mesh_ == other.mesh_ || mesh_->hash() == other.mesh_->hash();
}

std::shared_ptr<const TaylorHoodSpace> build_space(std::shared_ptr<const Mesh> mesh) {
  const ValidationReport report = validate(*mesh);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw InvalidMesh("build_space: mesh is not admissible (" + v.kind + ": " + v.detail + ")");
  }
  return std::make_shared<const TaylorHoodSpace>(std::move(mesh));
}

std::shared_ptr<const TaylorHoodSpace> build_space(const Mesh& mesh) {
  return build_space(std::make_shared<const Mesh>(mesh));
}

VelocityVector zero_velocity(const TaylorHoodSpace& s) {
  return {Eigen::VectorXd::Zero(s.n_vel_free())};
}

VelocityVector interpolate_velocity(const TaylorHoodSpace& s, const VectorField& g) {
  VelocityVector v = zero_velocity(s);
  for (int f = 0; f < s.n_scalar_free(); ++f) {
    const Vec2 value = g(s.scalar_node(s.scalar_of_free(f)));
    v.coefficients[2 * f] = value.x();
    v.coefficients[2 * f + 1] = value.y();
  }
  return v;
}

void gather_local(const TaylorHoodSpace& s, const VelocityVector& v, int t,
                  std::array<double, 2 * kP3LocalDofs>& out) {
  const auto& dofs = s.local_free_dofs(t);
  for (int i = 0; i < 2 * kP3LocalDofs; ++i) out[i] = dofs[i] < 0 ? 0.0 : v.coefficients[dofs[i]];
}

Vec2 eval_velocity_in(const TaylorHoodSpace& s, const VelocityVector& v, int t, const Barycentric& l) {
  std::array<double, 2 * kP3LocalDofs> local;
  gather_local(s, v, t, local);
  std::array<double, kP3LocalDofs> phi;
  p3_values(l, phi);
  Vec2 out(0.0, 0.0);
  for (int a = 0; a < kP3LocalDofs; ++a) {
    out.x() += phi[a] * local[2 * a];
    out.y() += phi[a] * local[2 * a + 1];
  }
  return out;
}

Eigen::Matrix2d eval_gradient_in(const TaylorHoodSpace& s, const VelocityVector& v, int t, const Barycentric& l) {
  std::array<double, 2 * kP3LocalDofs> local;
  gather_local(s, v, t, local);
  std::array<std::array<double, 3>, kP3LocalDofs> partials;
  p3_partials(l, partials);
  P3Gradients grads;
  p3_gradients(s.geometry(t), partials, grads);
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  for (int a = 0; a < kP3LocalDofs; ++a) {
    out.row(0) += local[2 * a] * grads[a].transpose();
    out.row(1) += local[2 * a + 1] * grads[a].transpose();
  }
  return out;
}

Vec2 eval_velocity(const TaylorHoodSpace& s, const VelocityVector& v, const Vec2& p) {
  const auto hit = s.locator().locate(p);
  if (!hit) throw PointOutsideDomain("eval_velocity: point outside the meshed domain");
  return eval_velocity_in(s, v, hit->triangle, hit->lambda);
}

double l2_norm(const TaylorHoodSpace& s, const VelocityVector& v) {
  const BasisTable& table = default_table();
  std::array<double, 2 * kP3LocalDofs> local;
  double sum = 0.0;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, v, t, local);
    const double area = s.geometry(t).area;
    for (std::size_t q = 0; q < table.size(); ++q) {
      double ux = 0.0, uy = 0.0;
      for (int a = 0; a < kP3LocalDofs; ++a) {
        ux += table.p3[q][a] * local[2 * a];
        uy += table.p3[q][a] * local[2 * a + 1];
      }
      sum += 2.0 * area * table.rule.weights[q] * (ux * ux + uy * uy);
    }
  }
  return std::sqrt(sum);
}

double h1_seminorm(const TaylorHoodSpace& s, const VelocityVector& v) {
  const BasisTable& table = default_table();
  std::array<double, 2 * kP3LocalDofs> local;
  P3Gradients grads;
  double sum = 0.0;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, v, t, local);
    const ElementGeometry& g = s.geometry(t);
    for (std::size_t q = 0; q < table.size(); ++q) {
      p3_gradients(g, table.p3_partials[q], grads);
      Vec2 gx(0.0, 0.0), gy(0.0, 0.0);
      for (int a = 0; a < kP3LocalDofs; ++a) {
        gx += local[2 * a] * grads[a];
        gy += local[2 * a + 1] * grads[a];
      }
      sum += 2.0 * g.area * table.rule.weights[q] * (gx.squaredNorm() + gy.squaredNorm());
    }
  }
  return std::sqrt(sum);
}

double linf_norm_sampled(const TaylorHoodSpace& s, const VelocityVector& v) {
  double out = 0.0;
  for (int f = 0; f < s.n_scalar_free(); ++f) {
    out = std::max(out, std::hypot(v.coefficients[2 * f], v.coefficients[2 * f + 1]));
  }
  const BasisTable& table = default_table();
  std::array<double, 2 * kP3LocalDofs> local;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, v, t, local);
    for (std::size_t q = 0; q < table.size(); ++q) {
      double ux = 0.0, uy = 0.0;
      for (int a = 0; a < kP3LocalDofs; ++a) {
        ux += table.p3[q][a] * local[2 * a];
        uy += table.p3[q][a] * local[2 * a + 1];
      }
      out = std::max(out, std::hypot(ux, uy));
    }
  }
  return out;
}

double l2_error(const TaylorHoodSpace& s, const VelocityVector& v, const VectorField& g) {
  const BasisTable& table = default_table();
  std::array<double, 2 * kP3LocalDofs> local;
  double sum = 0.0;
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    gather_local(s, v, t, local);
    const ElementGeometry& geo = s.geometry(t);
    for (std::size_t q = 0; q < table.size(); ++q) {
      Vec2 u(0.0, 0.0);
      for (int a = 0; a < kP3LocalDofs; ++a) {
        u.x() += table.p3[q][a] * local[2 * a];
        u.y() += table.p3[q][a] * local[2 * a + 1];
      }
      sum += 2.0 * geo.area * table.rule.weights[q] * (u - g(geo.map(table.rule.points[q]))).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

DualVector load_vector(const TaylorHoodSpace& s, const VectorField& g) {
  const BasisTable& table = default_table();
  DualVector out{Eigen::VectorXd::Zero(s.n_vel_free())};
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    const ElementGeometry& geo = s.geometry(t);
    const auto& dofs = s.local_free_dofs(t);
    for (std::size_t q = 0; q < table.size(); ++q) {
      const Vec2 value = g(geo.map(table.rule.points[q]));
      const double w = 2.0 * geo.area * table.rule.weights[q];
      for (int a = 0; a < kP3LocalDofs; ++a) {
        if (dofs[2 * a] < 0) continue;
        out.values[dofs[2 * a]] += w * table.p3[q][a] * value.x();
        out.values[dofs[2 * a + 1]] += w * table.p3[q][a] * value.y();
      }
    }
  }
  return out;
}

Eigen::VectorXd pressure_mean_weights(const TaylorHoodSpace& s) {
  const BasisTable& table = default_table();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s.n_pressure());
  for (int t = 0; t < s.mesh().num_triangles(); ++t) {
    const double area = s.geometry(t).area;
    const auto& dofs = s.pressure_dofs(t);
    for (std::size_t q = 0; q < table.size(); ++q) {
      for (int a = 0; a < kP2LocalDofs; ++a) out[dofs[a]] += 2.0 * area * table.rule.weights[q] * table.p2[q][a];
    }
  }
  return out;
}

}  // namespace snse
