#include "snse/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "snse/errors.hpp"

namespace snse {

bool ValidationReport::has(const std::string& kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind; });
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (const auto& tri : triangles_) {
    for (int v : tri) {
      if (v < 0 || v >= num_vertices()) {
        throw InvalidMesh("triangle references vertex " + std::to_string(v) + " out of range");
      }
    }
  }

  // Canonical edge enumeration: sorted vertex pairs in lexicographic order.
  std::map<std::pair<int, int>, std::vector<int>> adjacency;
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3];
      int b = tri[(k + 2) % 3];
      adjacency[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  std::map<std::pair<int, int>, int> edge_index;
  edges_.reserve(adjacency.size());
  for (const auto& [key, tris] : adjacency) {
    Edge e;
    e.vertices = {key.first, key.second};
    e.triangle_count = static_cast<int>(tris.size());
    if (tris.size() > 2) non_manifold_ = true;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, tris.size()); ++i) e.triangles[i] = tris[i];
    edge_index[key] = static_cast<int>(edges_.size());
    edges_.push_back(e);
  }

  triangle_edges_.resize(triangles_.size());
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3];
      int b = tri[(k + 2) % 3];
      triangle_edges_[t][k] = edge_index.at({std::min(a, b), std::max(a, b)});
    }
  }

  boundary_vertex_.assign(vertices_.size(), false);
  boundary_edge_.assign(edges_.size(), false);
  for (int e = 0; e < num_edges(); ++e) {
    if (edges_[e].triangle_count == 1) {
      boundary_edge_[e] = true;
      boundary_vertex_[edges_[e].vertices[0]] = true;
      boundary_vertex_[edges_[e].vertices[1]] = true;
    }
  }

  double min_inradius = std::numeric_limits<double>::infinity();
  for (int t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    double perimeter = 0.0;
    for (int k = 0; k < 3; ++k) {
      double len = (vertices_[tri[(k + 1) % 3]] - vertices_[tri[(k + 2) % 3]]).norm();
      h_ = std::max(h_, len);
      perimeter += len;
    }
    double inradius = 2.0 * std::abs(signed_area(t)) / perimeter;
    min_inradius = std::min(min_inradius, inradius);
  }
  quasi_uniformity_ratio_ = num_triangles() > 0 ? h_ / min_inradius : 0.0;
}

double Mesh::signed_area(int t) const {
  const auto& tri = triangles_[t];
  const Vec2& a = vertices_[tri[0]];
  const Vec2& b = vertices_[tri[1]];
  const Vec2& c = vertices_[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t) sum += signed_area(t);
  return sum;
}

std::uint64_t Mesh::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& v : vertices_) {
    double xy[2] = {v.x(), v.y()};
    mix(xy, sizeof xy);
  }
  for (const auto& tri : triangles_) {
    std::int32_t idx[3] = {tri[0], tri[1], tri[2]};
    mix(idx, sizeof idx);
  }
  return h;
}

std::string Mesh::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

Mesh build_unit_square_mesh(int n) {
  if (n < 1) throw InvalidArgument("build_unit_square_mesh: n must be >= 1");
  std::vector<Vec2> vertices;
  vertices.reserve((n + 1) * (n + 1) + n * n);
  const double step = 1.0 / n;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) vertices.emplace_back(i * step, j * step);
  }
  auto corner = [n](int i, int j) { return j * (n + 1) + i; };
  const int center0 = static_cast<int>(vertices.size());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) vertices.emplace_back((i + 0.5) * step, (j + 0.5) * step);
  }

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      int bl = corner(i, j), br = corner(i + 1, j), tr = corner(i + 1, j + 1), tl = corner(i, j + 1);
      int c = center0 + j * n + i;
      triangles.push_back({bl, br, c});
      triangles.push_back({br, tr, c});
      triangles.push_back({tr, tl, c});
      triangles.push_back({tl, bl, c});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh build_polygon_disk_mesh(int n) {
  if (n < 8) throw InvalidArgument("build_polygon_disk_mesh: n must be >= 8");
  const int rings = std::max(1, n / 8);
  std::vector<int> ring_size(rings + 1);
  ring_size[0] = 1;
  for (int k = 1; k <= rings; ++k) {
    ring_size[k] = static_cast<int>(std::lround(static_cast<double>(n) * k / rings));
  }

  std::vector<Vec2> vertices;
  std::vector<int> ring_start(rings + 1);
  vertices.emplace_back(0.0, 0.0);
  ring_start[0] = 0;
  for (int k = 1; k <= rings; ++k) {
    ring_start[k] = static_cast<int>(vertices.size());
    const double r = static_cast<double>(k) / rings;
    for (int i = 0; i < ring_size[k]; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / ring_size[k];
      vertices.emplace_back(r * std::cos(theta), r * std::sin(theta));
    }
  }

  // Stitch consecutive rings by advancing along whichever ring has the next
  // smaller angle; every triangle keeps a vertex on the inner ring.
  std::vector<std::array<int, 3>> triangles;
  for (int k = 1; k <= rings; ++k) {
    const int a = ring_size[k - 1];
    const int b = ring_size[k];
    auto inner = [&](int i) { return ring_start[k - 1] + (i % a); };
    auto outer = [&](int j) { return ring_start[k] + (j % b); };
    int i = a == 1 ? 1 : 0, j = 0;
    while (i < a || j < b) {
      const double next_outer = j < b ? static_cast<double>(j + 1) / b : 2.0;
      const double next_inner = (a > 1 && i < a) ? static_cast<double>(i + 1) / a : 2.0;
      if (next_outer <= next_inner) {
        triangles.push_back({inner(i), outer(j), outer(j + 1)});
        ++j;
      } else {
        triangles.push_back({inner(i), outer(j), inner(i + 1)});
        ++i;
      }
    }
  }

  Mesh mesh(std::move(vertices), std::move(triangles));
  const double reference_area = 0.5 * std::sin(2.0 * std::numbers::pi / n) / rings;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.signed_area(t) <= 1e-6 * reference_area) {
      throw InvalidMesh("build_polygon_disk_mesh: degenerate triangle for n=" + std::to_string(n));
    }
  }
  return mesh;
}

Mesh refine_uniform(const Mesh& m) {
  std::vector<Vec2> vertices = m.vertices();
  const int v0 = m.num_vertices();
  vertices.reserve(v0 + m.num_edges());
  for (const auto& e : m.edges()) {
    vertices.push_back(0.5 * (m.vertices()[e.vertices[0]] + m.vertices()[e.vertices[1]]));
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    const auto& te = m.triangle_edges(t);
    // midpoint opposite local vertex k
    const int m0 = v0 + te[0], m1 = v0 + te[1], m2 = v0 + te[2];
    triangles.push_back({tri[0], m2, m1});
    triangles.push_back({m2, tri[1], m0});
    triangles.push_back({m1, m0, tri[2]});
    triangles.push_back({m0, m1, m2});
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh refine_uniform(const Mesh& m, int times) {
  Mesh out = m;
  for (int i = 0; i < times; ++i) out = refine_uniform(out);
  return out;
}

ValidationReport validate(const Mesh& m, const ValidationOptions& options) {
  ValidationReport report;
  const double mean_area =
      m.num_triangles() > 0 ? std::abs(m.total_area()) / m.num_triangles() : 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double area = m.signed_area(t);
    if (area < 0.0) {
      report.violations.push_back({"orientation", t, "clockwise triangle"});
    } else if (area <= options.min_relative_area * mean_area) {
      report.violations.push_back({"degenerate", t, "near-zero area"});
    }
    const auto& tri = m.triangles()[t];
    if (m.boundary_vertex_mask()[tri[0]] && m.boundary_vertex_mask()[tri[1]] &&
        m.boundary_vertex_mask()[tri[2]]) {
      report.violations.push_back({"interior-vertex condition", t, "all vertices on the boundary"});
    }
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    const int count = m.edges()[e].triangle_count;
    if (count > 2) {
      report.violations.push_back(
          {"edge consistency", e, std::to_string(count) + " triangles share one edge"});
    }
  }
  // A consistently oriented manifold uses every interior edge once in each direction.
  if (!m.non_manifold_) {
    for (int e = 0; e < m.num_edges(); ++e) {
      const auto& edge = m.edges()[e];
      if (edge.triangle_count != 2) continue;
      auto direction = [&](int t) {
        const auto& tri = m.triangles()[t];
        for (int k = 0; k < 3; ++k) {
          if (tri[k] == edge.vertices[0] && tri[(k + 1) % 3] == edge.vertices[1]) return 1;
          if (tri[k] == edge.vertices[1] && tri[(k + 1) % 3] == edge.vertices[0]) return -1;
        }
        return 0;
      };
      if (direction(edge.triangles[0]) == direction(edge.triangles[1])) {
        report.violations.push_back({"edge consistency", e, "adjacent triangles disagree in orientation"});
      }
    }
  }
  if (m.num_triangles() > 0 && !(m.quasi_uniformity_ratio() <= options.max_quasi_uniformity_ratio)) {
    std::ostringstream msg;
    msg << "ratio " << m.quasi_uniformity_ratio() << " exceeds " << options.max_quasi_uniformity_ratio;
    report.violations.push_back({"quasi-uniformity", -1, msg.str()});
  }
  if (m.num_triangles() == 0) report.violations.push_back({"empty", -1, "no triangles"});
  return report;
}

void write_mesh(std::ostream& os, const Mesh& m) {
  char buf[96];
  os << "vertices " << m.num_vertices() << '\n';
  for (const auto& v : m.vertices()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    os << buf;
  }
  os << "triangles " << m.num_triangles() << '\n';
  for (const auto& t : m.triangles()) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& is) {
  std::string word;
  long count = 0;
  if (!(is >> word >> count) || word != "vertices" || count < 0) {
    throw IoError("read_mesh: expected 'vertices N' header");
  }
  std::vector<Vec2> vertices(static_cast<std::size_t>(count));
  for (auto& v : vertices) {
    if (!(is >> v.x() >> v.y())) throw IoError("read_mesh: truncated vertex block");
  }
  if (!(is >> word >> count) || word != "triangles" || count < 0) {
    throw IoError("read_mesh: expected 'triangles M' header");
  }
  std::vector<std::array<int, 3>> triangles(static_cast<std::size_t>(count));
  for (auto& t : triangles) {
    if (!(is >> t[0] >> t[1] >> t[2])) throw IoError("read_mesh: truncated triangle block");
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

}  // namespace snse
