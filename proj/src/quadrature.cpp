#include "snse/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "snse/errors.hpp"

namespace snse {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre_01(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre_01: n must be >= 1");
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2) scaled to [0,1]
  }
  return {nodes, weights};
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw InvalidArgument("triangle_rule: degree must be >= 0");
  // x^a y^b maps to xi^a (1-xi)^(b+1) eta^b, so n points per direction cover a+b <= 2n-2.
  const int n = (degree + 3) / 2;
  auto [xs, ws] = gauss_legendre_01(n);
  QuadratureRule rule;
  rule.degree = 2 * n - 2;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = xs[i];
      const double y = xs[j] * (1.0 - xs[i]);
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(ws[i] * ws[j] * (1.0 - xs[i]));
    }
  }
  return rule;
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule = triangle_rule(kDefaultQuadratureDegree);
  return rule;
}

}  // namespace snse
