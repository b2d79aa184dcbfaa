#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace snse {

using Vec2 = Eigen::Vector2d;

/// An edge stored as a sorted vertex pair with its (one or two) adjacent triangles.
struct Edge {
  std::array<int, 2> vertices;
  std::array<int, 2> triangles{-1, -1};  // triangles[1] == -1 on the boundary
  int triangle_count = 0;
};

struct Violation {
  std::string kind;
  int index = -1;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] bool has(const std::string& kind) const;
};

struct ValidationOptions {
  double max_quasi_uniformity_ratio = 20.0;
  double min_relative_area = 1e-12;
};

/// Conforming triangulation with derived edge connectivity.
///
/// Construction never throws on geometrically invalid input: invalid meshes
/// are representable so that validate() can report what is wrong with them.
/// Local edge k of a triangle joins local vertices (k+1)%3 and (k+2)%3.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

  [[nodiscard]] const std::vector<Vec2>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
  [[nodiscard]] const std::vector<bool>& boundary_vertex_mask() const { return boundary_vertex_; }
  [[nodiscard]] const std::vector<bool>& boundary_edge_mask() const { return boundary_edge_; }

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles_.size()); }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }

  /// Maximum element diameter (longest edge).
  [[nodiscard]] double h() const { return h_; }
  /// h divided by the smallest inradius.
  [[nodiscard]] double quasi_uniformity_ratio() const { return quasi_uniformity_ratio_; }

  [[nodiscard]] double signed_area(int t) const;
  [[nodiscard]] double total_area() const;

  /// FNV-1a over coordinates and connectivity; identifies a mesh in trajectory files.
  [[nodiscard]] std::uint64_t hash() const;
  [[nodiscard]] std::string hash_hex() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> boundary_edge_;
  double h_ = 0.0;
  double quasi_uniformity_ratio_ = 0.0;
  bool non_manifold_ = false;

  friend ValidationReport validate(const Mesh&, const ValidationOptions&);
};

/// [0,1]^2 with every one of the n^2 cells cut into four triangles around its centre.
[[nodiscard]] Mesh build_unit_square_mesh(int n);

/// Regular n-gon inscribed in the unit circle, triangulated by concentric rings.
[[nodiscard]] Mesh build_polygon_disk_mesh(int n);

/// Red refinement: every triangle is split into four through its edge midpoints.
[[nodiscard]] Mesh refine_uniform(const Mesh& m);

[[nodiscard]] Mesh refine_uniform(const Mesh& m, int times);

[[nodiscard]] ValidationReport validate(const Mesh& m, const ValidationOptions& options = {});

/// Line-oriented text format: "vertices N", N coordinate rows, "triangles M", M index rows.
void write_mesh(std::ostream& os, const Mesh& m);
[[nodiscard]] Mesh read_mesh(std::istream& is);

}  // namespace snse
