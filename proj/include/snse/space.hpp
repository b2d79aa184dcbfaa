#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "snse/lagrange.hpp"
#include "snse/mesh.hpp"
#include "snse/quadrature.hpp"

namespace snse {

/// Coefficients over the free (non-Dirichlet) velocity dofs, interleaved as 2*free_scalar + component.
struct VelocityVector {
  Eigen::VectorXd coefficients;
};

/// Coefficients over the P2 pressure dofs.
struct PressureVector {
  Eigen::VectorXd coefficients;
};

/// A functional on the free velocity dofs, e.g. the load <f, v_i>.
struct DualVector {
  Eigen::VectorXd values;
};

using VectorField = std::function<Vec2(const Vec2&)>;
using ScalarField = std::function<double(const Vec2&)>;

struct ElementGeometry {
  std::array<Vec2, 3> vertices;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;

  [[nodiscard]] Vec2 map(const Barycentric& l) const {
    return l[0] * vertices[0] + l[1] * vertices[1] + l[2] * vertices[2];
  }
  [[nodiscard]] Barycentric barycentric(const Vec2& p) const;
};

/// Basis values tabulated at the points of a reference quadrature rule.
struct BasisTable {
  QuadratureRule rule;
  std::vector<std::array<double, kP3LocalDofs>> p3;
  std::vector<std::array<std::array<double, 3>, kP3LocalDofs>> p3_partials;
  std::vector<std::array<double, kP2LocalDofs>> p2;

  [[nodiscard]] std::size_t size() const { return rule.size(); }
};

[[nodiscard]] BasisTable tabulate(const QuadratureRule& rule);
[[nodiscard]] const BasisTable& default_table();

/// Physical gradients of the ten P3 basis functions on an element.
using P3Gradients = std::array<Vec2, kP3LocalDofs>;
void p3_gradients(const ElementGeometry& g, const std::array<std::array<double, 3>, kP3LocalDofs>& partials,
                  P3Gradients& out);

/// Uniform bucket grid for locating the triangle that contains a point.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);

  struct Hit {
    int triangle;
    Barycentric lambda;
  };

  /// Lowest-index triangle whose barycentric coordinates are all >= -tolerance.
  [[nodiscard]] std::optional<Hit> locate(const Vec2& p, double tolerance = 1e-12) const;

 private:
  const Mesh* mesh_;
  std::vector<ElementGeometry> geometry_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// P3 vector velocity / P2 scalar pressure Taylor-Hood pair over a mesh.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(std::shared_ptr<const Mesh> mesh);

  [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
  [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  [[nodiscard]] double h() const { return mesh_->h(); }

  [[nodiscard]] int n_scalar_p3() const { return n_scalar_p3_; }
  [[nodiscard]] int n_scalar_free() const { return n_scalar_free_; }
  [[nodiscard]] int n_vel_total() const { return 2 * n_scalar_p3_; }
  [[nodiscard]] int n_vel_free() const { return 2 * n_scalar_free_; }
  [[nodiscard]] int n_pressure() const { return n_pressure_; }

  [[nodiscard]] const std::array<int, kP3LocalDofs>& scalar_dofs(int t) const { return velocity_dofs_[t]; }
  [[nodiscard]] const std::array<int, kP2LocalDofs>& pressure_dofs(int t) const { return pressure_dofs_[t]; }
  /// Free velocity index of local (basis a, component c) at 2*a+c, or -1 when Dirichlet.
  [[nodiscard]] const std::array<int, 2 * kP3LocalDofs>& local_free_dofs(int t) const { return local_free_[t]; }

  /// -1 for Dirichlet dofs.
  [[nodiscard]] int free_scalar_index(int scalar_dof) const { return free_index_[scalar_dof]; }
  [[nodiscard]] int scalar_of_free(int free_scalar) const { return free_to_scalar_[free_scalar]; }
  /// Indexed by 2*scalar_dof + component.
  [[nodiscard]] const std::vector<bool>& dirichlet_mask() const { return dirichlet_mask_; }
  [[nodiscard]] const Vec2& scalar_node(int scalar_dof) const { return nodes_[scalar_dof]; }

  [[nodiscard]] const ElementGeometry& geometry(int t) const { return geometry_[t]; }
  [[nodiscard]] const PointLocator& locator() const { return *locator_; }

  [[nodiscard]] bool same_dofs(const TaylorHoodSpace& other) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int n_scalar_p3_ = 0;
  int n_scalar_free_ = 0;
  int n_pressure_ = 0;
  std::vector<std::array<int, kP3LocalDofs>> velocity_dofs_;
  std::vector<std::array<int, kP2LocalDofs>> pressure_dofs_;
  std::vector<std::array<int, 2 * kP3LocalDofs>> local_free_;
  std::vector<int> free_index_;
  std::vector<int> free_to_scalar_;
  std::vector<bool> dirichlet_mask_;
  std::vector<Vec2> nodes_;
  std::vector<ElementGeometry> geometry_;
  std::shared_ptr<const PointLocator> locator_;
};

/// Validates the mesh and builds the Taylor-Hood dof maps; throws InvalidMesh.
[[nodiscard]] std::shared_ptr<const TaylorHoodSpace> build_space(std::shared_ptr<const Mesh> mesh);
[[nodiscard]] std::shared_ptr<const TaylorHoodSpace> build_space(const Mesh& mesh);

[[nodiscard]] VelocityVector zero_velocity(const TaylorHoodSpace& s);

/// Nodal P3 interpolant; Dirichlet dofs are dropped.
[[nodiscard]] VelocityVector interpolate_velocity(const TaylorHoodSpace& s, const VectorField& g);

[[nodiscard]] Vec2 eval_velocity(const TaylorHoodSpace& s, const VelocityVector& v, const Vec2& p);
[[nodiscard]] Vec2 eval_velocity_in(const TaylorHoodSpace& s, const VelocityVector& v, int t, const Barycentric& l);
/// Rows are components, columns are derivative directions.
[[nodiscard]] Eigen::Matrix2d eval_gradient_in(const TaylorHoodSpace& s, const VelocityVector& v, int t,
                                               const Barycentric& l);

/// Element-local coefficients (2*a + c), zero at Dirichlet dofs.
void gather_local(const TaylorHoodSpace& s, const VelocityVector& v, int t, std::array<double, 2 * kP3LocalDofs>& out);

[[nodiscard]] double l2_norm(const TaylorHoodSpace& s, const VelocityVector& v);
[[nodiscard]] double h1_seminorm(const TaylorHoodSpace& s, const VelocityVector& v);
/// Max pointwise magnitude over P3 nodes and default quadrature points.
[[nodiscard]] double linf_norm_sampled(const TaylorHoodSpace& s, const VelocityVector& v);

/// ||v - g|| in L2 over the mesh, default quadrature.
[[nodiscard]] double l2_error(const TaylorHoodSpace& s, const VelocityVector& v, const VectorField& g);

/// <g, phi_i> for every free velocity basis function.
[[nodiscard]] DualVector load_vector(const TaylorHoodSpace& s, const VectorField& g);

/// Integral of every P2 basis function; weights.dot(p) is the integral of p.
[[nodiscard]] Eigen::VectorXd pressure_mean_weights(const TaylorHoodSpace& s);

}  // namespace snse
