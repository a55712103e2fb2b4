#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dgqmc/quadrature.hpp"

using namespace dgqmc;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Closed form on the reference triangle: int x^a y^b = a! b! / (a+b+2)!
double monomial_integral(int a, int b) {
  return factorial(a) * factorial(b) / factorial(a + b + 2);
}

}  // namespace

TEST_CASE("gauss legendre integrates monomials exactly") {
  for (int n = 1; n <= 8; ++n) {
    const QuadratureRule1D rule = gauss_legendre(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == Catch::Approx(1.0).epsilon(1e-14));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.points.size(); ++i)
        acc += rule.weights[i] * std::pow(rule.points[i], p);
      CHECK(acc == Catch::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("triangle rule integrates monomials exactly up to its degree") {
  for (int degree : {2, 4, 6, 8, 12}) {
    const TriangleRule rule = triangle_rule(degree);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
          acc += rule.weights[q] * std::pow(rule.x[q], a) * std::pow(rule.y[q], b);
        CHECK(acc == Catch::Approx(monomial_integral(a, b)).epsilon(1e-12).margin(1e-15));
      }
  }
}

TEST_CASE("triangle rule weights are positive and sum to the area") {
  const TriangleRule rule = triangle_rule(6);
  double wsum = 0.0;
  for (double w : rule.weights) {
    CHECK(w > 0.0);
    wsum += w;
  }
  CHECK(wsum == Catch::Approx(0.5).epsilon(1e-14));
}
