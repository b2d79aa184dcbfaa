#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "snse/assembly.hpp"
#include "snse/noise.hpp"

using namespace snse;

namespace {

double max_abs(const SparseOperator& a) {
  double m = 0.0;
  for (int r = 0; r < a.matrix.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a.matrix, r); it; ++it) {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

// Exact P3 mass entries on the reference triangle (area 1/2), local rows 0, 3 and 9.
const double kMassRow0[10] = {19.0 / 3360, 11.0 / 13440, 11.0 / 13440, 9.0 / 4480, 9.0 / 4480,
                              0.0,         3.0 / 2240,   3.0 / 2240,   0.0,        3.0 / 1120};
const double kMassRow3[10] = {9.0 / 4480, 3.0 / 2240, 0.0,        9.0 / 224,  -9.0 / 640,
                              -9.0 / 896, -9.0 / 2240, -9.0 / 896, 9.0 / 448, 27.0 / 2240};
const double kMassRow9[10] = {3.0 / 1120,  3.0 / 1120,  3.0 / 1120,  27.0 / 2240, 27.0 / 2240,
                              27.0 / 2240, 27.0 / 2240, 27.0 / 2240, 27.0 / 2240, 81.0 / 560};

}  // namespace

TEST_CASE("reference element mass matrix matches exact rational integrals") {
  const BasisTable& table = default_table();
  double local[10][10] = {};
  for (std::size_t q = 0; q < table.size(); ++q) {
    for (int i = 0; i < 10; ++i) {
      for (int j = 0; j < 10; ++j) local[i][j] += table.rule.weights[q] * table.p3[q][i] * table.p3[q][j];
    }
  }
  for (int j = 0; j < 10; ++j) {
    CHECK(local[0][j] == doctest::Approx(kMassRow0[j]).epsilon(1e-13).scale(1e-3));
    CHECK(local[3][j] == doctest::Approx(kMassRow3[j]).epsilon(1e-13).scale(1e-3));
    CHECK(local[9][j] == doctest::Approx(kMassRow9[j]).epsilon(1e-13).scale(1e-3));
  }
}

TEST_CASE("assembled bubble rows match exact integrals scaled by area") {
  const auto s = build_space(build_unit_square_mesh(1));
  const SparseOperator m = assemble_mass(*s);
  for (int t = 0; t < s->mesh().num_triangles(); ++t) {
    const double scale = 2.0 * s->mesh().signed_area(t);
    const auto& f = s->local_free_dofs(t);
    REQUIRE(f[2 * 9] >= 0);
    for (int j = 0; j < 10; ++j) {
      for (int c = 0; c < 2; ++c) {
        if (f[2 * j + c] < 0) continue;
        CHECK(m.matrix.coeff(f[2 * 9 + c], f[2 * j + c]) == doctest::Approx(scale * kMassRow9[j]).epsilon(1e-13));
        CHECK(m.matrix.coeff(f[2 * 9 + c], f[2 * j + 1 - c]) == 0.0);
      }
    }
  }
}

TEST_CASE("mass and stiffness are symmetric and definite") {
  const auto s = build_space(refine_uniform(build_polygon_disk_mesh(8)));
  const SparseOperator m = assemble_mass(*s), k = assemble_stiffness(*s);
  CHECK(m.symmetric);
  CHECK(k.symmetric);
  CHECK(max_asymmetry(m) <= 1e-12 * max_abs(m));
  CHECK(max_asymmetry(k) <= 1e-12 * max_abs(k));

  const VelocityVector c = interpolate_velocity(*s, [](const Vec2&) { return Vec2(1.0, 0.0); });
  CHECK(c.coefficients.dot(m.matrix * c.coefficients) == doctest::Approx(std::pow(l2_norm(*s, c), 2)).epsilon(1e-12));
  CHECK(c.coefficients.dot(k.matrix * c.coefficients) ==
        doctest::Approx(std::pow(h1_seminorm(*s, c), 2)).epsilon(1e-12));
  for (std::uint32_t i = 0; i < 5; ++i) {
    const VelocityVector v = gaussian_velocity(*s, 50, i);
    CHECK(v.coefficients.dot(m.matrix * v.coefficients) > 0.0);
    CHECK(v.coefficients.dot(k.matrix * v.coefficients) > 0.0);
  }
}

TEST_CASE("smallest eigenvalue of (K, M) decreases to the Dirichlet eigenvalue") {
  const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 2, 3}) {
    const auto s = build_space(build_unit_square_mesh(n));
    const Eigen::MatrixXd m(assemble_mass(*s).matrix), k(assemble_stiffness(*s).matrix);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, m, Eigen::EigenvaluesOnly);
    const double lambda = eig.eigenvalues()[0];
    CHECK(lambda >= exact * (1.0 - 1e-10));
    CHECK(lambda < prev);
    prev = lambda;
  }
  CHECK(prev <= exact * 1.01);
}

TEST_CASE("inverse estimate constant is stable across refinement") {
  std::vector<double> c;
  for (int n : {2, 4, 6}) {
    const auto s = build_space(build_unit_square_mesh(n));
    const Eigen::MatrixXd m(assemble_mass(*s).matrix), k(assemble_stiffness(*s).matrix);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, m, Eigen::EigenvaluesOnly);
    c.push_back(eig.eigenvalues().maxCoeff() * s->h() * s->h());
  }
  for (double v : c) {
    CHECK(v <= 1.5 * c.front());
    CHECK(v >= c.front() / 1.5);
  }
}

TEST_CASE("divergence operator") {
  const auto s = build_space(refine_uniform(build_polygon_disk_mesh(8)));
  const SparseOperator b = assemble_divergence(*s);
  CHECK(b.rows() == s->n_pressure());
  CHECK(b.cols() == s->n_vel_free());
  CHECK((b.matrix * Eigen::VectorXd::Zero(s->n_vel_free())).norm() == 0.0);

  // the P2 basis is a partition of unity, so the all-ones vector represents q = 1
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s->n_pressure());
  for (std::uint32_t i = 0; i < 5; ++i) {
    const VelocityVector v = gaussian_velocity(*s, 60, i);
    const Eigen::VectorXd bv = b.matrix * v.coefficients;
    CHECK(std::abs(ones.dot(bv)) <= 1e-12 * (1.0 + bv.norm()));
  }

  // curl of a quartic stream function is a cubic, reproduced exactly; boundary dofs kept
  auto field = [](const Vec2& p) {
    const double x = p.x(), y = p.y();
    // psi = x^4 + x y^3 - 2 x^2 y^2 + 3 x^3 y
    return Vec2(3 * x * y * y - 4 * x * x * y + 3 * x * x * x, -(4 * x * x * x + y * y * y - 4 * x * y * y + 9 * x * x * y));
  };
  const SparseOperator b_all = assemble_divergence(*s, VelocityColumns::all);
  CHECK(b_all.cols() == s->n_vel_total());
  Eigen::VectorXd full(s->n_vel_total());
  for (int d = 0; d < s->n_scalar_p3(); ++d) {
    const Vec2 g = field(s->scalar_node(d));
    full[2 * d] = g.x();
    full[2 * d + 1] = g.y();
  }
  CHECK((b_all.matrix * full).norm() <= 1e-10 * full.norm());
  full.setConstant(0.0);
  full[7] = 1.0;
  CHECK((b_all.matrix * full).norm() > 1e-6);
}

TEST_CASE("convection residual") {
  for (int level = 0; level < 2; ++level) {
    const auto s = build_space(refine_uniform(build_polygon_disk_mesh(8), level));
    CHECK(convection_residual(*s, zero_velocity(*s)).values.norm() == 0.0);
    for (std::uint32_t i = 0; i < 10; ++i) {
      const VelocityVector u = gaussian_velocity(*s, 70 + level, i);
      const double norm = l2_norm(*s, u);
      const DualVector n = convection_residual(*s, u);
      CHECK(std::abs(n.values.dot(u.coefficients)) <= 1e-11 * (1.0 + norm * norm * norm));
      const VelocityVector scaled{-1.7 * u.coefficients};
      CHECK((convection_residual(*s, scaled).values - 1.7 * 1.7 * n.values).norm() <= 1e-12 * 2.89 * n.values.norm());
    }
  }
}

TEST_CASE("convection element matches a higher order quadrature oracle") {
  const auto s = build_space(refine_uniform(build_polygon_disk_mesh(8)));
  const BasisTable fine = tabulate(triangle_rule(20));
  const VelocityVector u = gaussian_velocity(*s, 80);
  LocalVector local_u, a, b;
  LocalMatrix ja, jb;
  for (int t = 0; t < s->mesh().num_triangles(); ++t) {
    gather_local(*s, u, t, local_u);
    convection_element(s->geometry(t), default_table(), local_u, {}, &a, &ja);
    convection_element(s->geometry(t), fine, local_u, {}, &b, &jb);
    double scale = 0.0, diff = 0.0;
    for (int i = 0; i < kLocalVelocityDofs; ++i) {
      scale = std::max(scale, std::abs(b[i]));
      diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    CHECK(diff <= 1e-12 * scale);
    CHECK((ja - jb).cwiseAbs().maxCoeff() <= 1e-12 * jb.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("convection jacobian") {
  const auto s = build_space(refine_uniform(build_polygon_disk_mesh(8)));
  CHECK(max_abs(convection_jacobian(*s, zero_velocity(*s))) == 0.0);

  const VelocityVector u = gaussian_velocity(*s, 90), w = gaussian_velocity(*s, 91);
  const SparseOperator j = convection_jacobian(*s, u);
  const DualVector n = convection_residual(*s, u);
  // Euler's identity for a quadratic form
  CHECK((j.matrix * u.coefficients - 2.0 * n.values).norm() <= 1e-12 * n.values.norm());

  auto remainder = [&](double eps) {
    const VelocityVector shifted{u.coefficients + eps * w.coefficients};
    return (convection_residual(*s, shifted).values - n.values - eps * (j.matrix * w.coefficients)).norm();
  };
  for (double eps : {1e-2, 1e-3}) {
    const double ratio = remainder(eps) / remainder(eps / 2);
    CHECK(ratio == doctest::Approx(4.0).epsilon(1e-3));
  }

  const SparseOperator oseen_like = convection_jacobian(*s, u, ConvectionForm{0.5});
  CHECK(max_abs(oseen_like) > 0.0);
}

TEST_CASE("assembly is deterministic") {
  const auto s = build_space(refine_uniform(build_polygon_disk_mesh(8)));
  const SparseOperator a = assemble_stiffness(*s), b = assemble_stiffness(*s);
  REQUIRE(a.matrix.nonZeros() == b.matrix.nonZeros());
  CHECK(std::equal(a.matrix.valuePtr(), a.matrix.valuePtr() + a.matrix.nonZeros(), b.matrix.valuePtr()));
  const VelocityVector u = gaussian_velocity(*s, 100);
  CHECK(convection_residual(*s, u).values == convection_residual(*s, u).values);
}
