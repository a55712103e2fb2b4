#pragma once

#include <cmath>
#include <vector>

#include "dgqmc/errors.hpp"

namespace dgqmc {

/// Gauss-Legendre rule on [0,1], exact for polynomials of degree 2n-1.
struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;  // sum to 1
};

inline QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw validation_error("gauss_legendre: need at least one point");
  QuadratureRule1D rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n with the Chebyshev initial guess.
    double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const std::size_t idx = static_cast<std::size_t>(n - 1 - i);  // ascending points
    rule.points[idx] = 0.5 * (1.0 + x);
    rule.weights[idx] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// Quadrature on the reference triangle {x,y >= 0, x+y <= 1}; weights sum to
/// the reference area 1/2. Built by collapsing a tensor Gauss-Legendre rule
/// through x = u(1-v), y = v, which is exact for total degree
/// <= min(2n-1, 2n-2) = 2n-2.
struct TriangleRule {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

inline TriangleRule triangle_rule(int degree) {
  if (degree < 0) throw validation_error("triangle_rule: negative degree");
  const int n = degree / 2 + 1;  // 2n-2 >= degree
  const QuadratureRule1D gl = gauss_legendre(n);
  TriangleRule rule;
  rule.x.reserve(static_cast<std::size_t>(n) * n);
  rule.y.reserve(static_cast<std::size_t>(n) * n);
  rule.weights.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    const double v = gl.points[static_cast<std::size_t>(j)];
    const double wv = gl.weights[static_cast<std::size_t>(j)] * (1.0 - v);
    for (int i = 0; i < n; ++i) {
      const double u = gl.points[static_cast<std::size_t>(i)];
      rule.x.push_back(u * (1.0 - v));
      rule.y.push_back(v);
      rule.weights.push_back(gl.weights[static_cast<std::size_t>(i)] * wv);
    }
  }
  return rule;
}

}  // namespace dgqmc
