#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <map>
#include <sstream>

#include "snse/errors.hpp"
#include "snse/mesh.hpp"

using namespace snse;

namespace {

// Brute-force edge count and boundary classification straight from the triangle list.
struct Enumeration {
  int edges = 0;
  int boundary_edges = 0;
};

Enumeration enumerate(const Mesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  Enumeration e;
  e.edges = static_cast<int>(count.size());
  for (const auto& [key, c] : count) e.boundary_edges += c == 1;
  return e;
}

}  // namespace

TEST_CASE("unit square cross split n=1") {
  const Mesh m = build_unit_square_mesh(1);
  CHECK(m.num_vertices() == 5);
  CHECK(m.num_triangles() == 4);
  CHECK(m.num_edges() == 8);
  // Longest edge is the cell side; the half diagonals have length sqrt(2)/2.
  CHECK(m.h() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(validate(m).ok());
}

TEST_CASE("unit square n=2 has 16 triangles") { CHECK(build_unit_square_mesh(2).num_triangles() == 16); }

TEST_CASE("unit square n=4 satisfies Euler's formula") {
  const Mesh m = build_unit_square_mesh(4);
  const Enumeration e = enumerate(m);
  CHECK(e.edges == m.num_edges());
  CHECK(m.num_vertices() - e.edges + m.num_triangles() == 1);
  int boundary = 0;
  for (bool b : m.boundary_edge_mask()) boundary += b;
  CHECK(boundary == e.boundary_edges);
  CHECK(boundary == 16);
}

TEST_CASE("edge adjacency counts") {
  const Mesh m = refine_uniform(build_polygon_disk_mesh(8), 1);
  for (int e = 0; e < m.num_edges(); ++e) {
    const Edge& edge = m.edges()[e];
    CHECK(edge.vertices[0] < edge.vertices[1]);
    if (m.boundary_edge_mask()[e]) {
      CHECK(edge.triangle_count == 1);
      CHECK(edge.triangles[1] == -1);
    } else {
      CHECK(edge.triangle_count == 2);
    }
  }
  for (int e = 1; e < m.num_edges(); ++e) CHECK(m.edges()[e - 1].vertices < m.edges()[e].vertices);
}

TEST_CASE("polygon disk n=8") {
  const Mesh m = build_polygon_disk_mesh(8);
  for (int v = 0; v < m.num_vertices(); ++v) {
    CHECK(m.vertices()[v].norm() <= 1.0 + 1e-14);
    if (m.boundary_vertex_mask()[v]) CHECK(m.vertices()[v].norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
  CHECK(validate(m).ok());
}

TEST_CASE("polygon disk h decreases with n") {
  auto diameter = [](const Mesh& m) {
    double h = 0.0;
    for (const auto& t : m.triangles()) {
      for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) h = std::max(h, (m.vertices()[t[a]] - m.vertices()[t[b]]).norm());
      }
    }
    return h;
  };
  const Mesh m8 = build_polygon_disk_mesh(8), m16 = build_polygon_disk_mesh(16);
  CHECK(m8.h() == doctest::Approx(diameter(m8)).epsilon(1e-15));
  CHECK(m16.h() == doctest::Approx(diameter(m16)).epsilon(1e-15));
  CHECK(m16.h() < m8.h());
}

TEST_CASE("polygon disk rejects small n") { CHECK_THROWS_AS((void)build_polygon_disk_mesh(5), InvalidArgument); }

TEST_CASE("refinement splits every triangle into four") {
  const Mesh m = build_unit_square_mesh(1);
  const Mesh r = refine_uniform(m);
  CHECK(r.num_triangles() == 16);
  for (const Mesh& base : {build_unit_square_mesh(1), build_unit_square_mesh(3), build_polygon_disk_mesh(8),
                           build_polygon_disk_mesh(12)}) {
    const Mesh fine = refine_uniform(base);
    const double ratio = fine.h() / base.h();
    CHECK(ratio >= 0.49);
    CHECK(ratio <= 0.51);
    CHECK(fine.quasi_uniformity_ratio() <= base.quasi_uniformity_ratio() * (1.0 + 1e-12));
  }
}

TEST_CASE("refined n=1 square matches the n=4 square counts") {
  const Mesh r = refine_uniform(build_unit_square_mesh(1), 2);
  const Mesh d = build_unit_square_mesh(4);
  CHECK(r.num_vertices() == 41);
  CHECK(r.num_edges() == 104);
  CHECK(r.num_triangles() == 64);
  CHECK(r.num_vertices() == d.num_vertices());
  CHECK(r.num_edges() == d.num_edges());
  CHECK(r.num_triangles() == d.num_triangles());
  CHECK(enumerate(r).boundary_edges == enumerate(d).boundary_edges);
}

TEST_CASE("validate reports violations") {
  SUBCASE("lone triangle has only boundary vertices") {
    const Mesh m({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 2}});
    const ValidationReport r = validate(m);
    CHECK(r.has("interior-vertex condition"));
  }
  SUBCASE("flipped triangle") {
    Mesh base = build_unit_square_mesh(1);
    auto tris = base.triangles();
    std::swap(tris[0][1], tris[0][2]);
    const Mesh m(base.vertices(), tris);
    const ValidationReport r = validate(m);
    CHECK(r.has("orientation"));
    CHECK(!r.ok());
  }
  SUBCASE("valid mesh") { CHECK(validate(build_polygon_disk_mesh(10)).violations.empty()); }
  SUBCASE("out of range index") {
    CHECK_THROWS_AS(Mesh({Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)}, {{0, 1, 3}}), InvalidMesh);
  }
}

TEST_CASE("validate holds across refinement depths") {
  for (int n = 1; n <= 3; ++n) {
    Mesh m = build_unit_square_mesh(n);
    for (int d = 0; d <= 4; ++d) {
      CHECK(validate(m).ok());
      if (d < 4) m = refine_uniform(m);
    }
  }
  Mesh disk = build_polygon_disk_mesh(8);
  for (int d = 0; d <= 3; ++d) {
    CHECK(validate(disk).ok());
    disk = refine_uniform(disk);
  }
}

TEST_CASE("areas sum to the domain area") {
  for (int n : {1, 2, 5}) {
    CHECK(std::abs(refine_uniform(build_unit_square_mesh(n), 2).total_area() - 1.0) <= 1e-12);
  }
  for (int n : {8, 12, 32}) {
    const double exact = n * std::sin(2.0 * std::numbers::pi / n) / 2.0;
    for (int d = 0; d <= 2; ++d) {
      const double area = refine_uniform(build_polygon_disk_mesh(n), d).total_area();
      CHECK(std::abs(area - exact) <= 1e-12 * exact);
    }
  }
}

TEST_CASE("quasi-uniformity ratio stays bounded") {
  for (const Mesh& base : {build_unit_square_mesh(2), build_polygon_disk_mesh(8)}) {
    const double r0 = base.quasi_uniformity_ratio();
    Mesh m = base;
    for (int d = 1; d <= 3; ++d) {
      m = refine_uniform(m);
      CHECK(m.quasi_uniformity_ratio() <= r0 * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("text format matches the golden file and round trips") {
  const Mesh m = build_unit_square_mesh(1);
  std::ostringstream os;
  write_mesh(os, m);
  std::ifstream golden(SNSE_TEST_DATA "/square1.mesh");
  REQUIRE(golden.good());
  std::stringstream expected;
  expected << golden.rdbuf();
  CHECK(os.str() == expected.str());

  const Mesh disk = refine_uniform(build_polygon_disk_mesh(9), 1);
  std::stringstream ss;
  write_mesh(ss, disk);
  const Mesh back = read_mesh(ss);
  CHECK(back.hash() == disk.hash());
  CHECK(back.num_edges() == disk.num_edges());

  std::istringstream bad("vertices 2\n0 0\n");
  CHECK_THROWS_AS((void)read_mesh(bad), IoError);
}

TEST_CASE("mesh hash distinguishes meshes") {
  CHECK(build_unit_square_mesh(2).hash() == build_unit_square_mesh(2).hash());
  CHECK(build_unit_square_mesh(2).hash() != build_unit_square_mesh(3).hash());
  CHECK(build_unit_square_mesh(2).hash_hex().size() == 16);
}
