#pragma once

#include <array>
#include <vector>

namespace snse {

/// Quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
/// Points are barycentric (l0, l1, l2) with x = l1, y = l2; weights sum to 1/2.
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0,1].
[[nodiscard]] std::pair<std::vector<double>, std::vector<double>> gauss_legendre_01(int n);

/// Collapsed (Duffy) Gauss-Legendre product rule exact for polynomials of total degree <= degree.
[[nodiscard]] QuadratureRule triangle_rule(int degree);

inline constexpr int kDefaultQuadratureDegree = 10;

/// Shared instance of triangle_rule(kDefaultQuadratureDegree).
[[nodiscard]] const QuadratureRule& default_rule();

}  // namespace snse
