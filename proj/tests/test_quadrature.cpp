#include <cmath>

#include "doctest.h"
#include "lipsmooth/quadrature.hpp"

using namespace lipsmooth;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  auto poly = [](double x) { return 3 * x * x * x * x * x - x * x * x + 2 * x * x - 7; };
  double exact = 2.0 * (2.0 / 3.0) - 14.0;  // odd terms vanish on [-1,1]
  CHECK(std::abs(gauss_integrate(poly, -1, 1, 3) - exact) < 1e-13);
  CHECK(std::abs(gauss_integrate(poly, -1, 1, 32) - exact) < 1e-12);
}

TEST_CASE("gauss nodes and weights are symmetric with unit mass") {
  const GaussRule& rule = gauss_legendre(32);
  double mass = 0;
  for (int i = 0; i < 32; ++i) {
    mass += rule.weights[i];
    CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[31 - i]).epsilon(1e-15));
  }
  CHECK(mass == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive simpson hits tight tolerances") {
  double v = adaptive_integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 1e-13);
  CHECK(std::abs(v - 2.0) < 1e-12);
  // smooth compactly supported bump: the 1d mollifier mass
  double b = adaptive_integrate(
      [](double t) {
        double s = 1 - t * t;
        return s > 0 ? std::exp(-1.0 / s) : 0.0;
      },
      -1.0, 1.0, 1e-14);
  CHECK(b == doctest::Approx(0.443993816168079438).epsilon(1e-12));
}

TEST_CASE("cubic spline reproduces smooth functions and derivatives") {
  const int n = 201;
  double x0 = -1.0, h = 2.0 / (n - 1);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sin(2.0 * (x0 + h * i));
  CubicSpline sp(x0, h, v);
  for (double x : {-0.73, -0.2, 0.0, 0.41, 0.9}) {
    CHECK(sp.value(x) == doctest::Approx(std::sin(2 * x)).epsilon(1e-7));
    CHECK(sp.deriv(x) == doctest::Approx(2 * std::cos(2 * x)).epsilon(1e-4));
    CHECK(sp.deriv2(x) == doctest::Approx(-4 * std::sin(2 * x)).epsilon(5e-3));
  }
}
