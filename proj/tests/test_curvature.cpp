#include <cmath>

#include "doctest.h"
#include "lipsmooth/curvature.hpp"
#include "lipsmooth/shapes.hpp"

using namespace lipsmooth;

TEST_CASE("fundamental forms: closed forms and eigenvalue range") {
  // zero gradient: both identity
  FundamentalForms f0 = forms(VecC{0, 0}, 2);
  CHECK(f0.g[0][0] == 1.0);
  CHECK(f0.g_inv[1][1] == 1.0);
  CHECK(f0.g[0][1] == 0.0);
  // 1d slope 1: g = 2, inverse 1/2
  FundamentalForms f1 = forms(VecC{1, 0}, 1);
  CHECK(f1.g[0][0] == doctest::Approx(2.0));
  CHECK(f1.g_inv[0][0] == doctest::Approx(0.5));
  // random gradients: g g_inv = I and eigenvalues of g_inv in [1/(1+L^2), 1]
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    VecC g{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    FundamentalForms f = forms(g, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double prod = f.g[a][0] * f.g_inv[0][b] + f.g[a][1] * f.g_inv[1][b];
        CHECK(std::abs(prod - (a == b ? 1.0 : 0.0)) < 1e-10);
      }
    // eigensolve oracle for the symmetric 2x2 inverse
    double tr = f.g_inv[0][0] + f.g_inv[1][1];
    double det = f.g_inv[0][0] * f.g_inv[1][1] - f.g_inv[0][1] * f.g_inv[1][0];
    double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    double lo = tr / 2 - disc, hi = tr / 2 + disc;
    double g2 = dotc(g, g);
    CHECK(lo >= 1.0 / (1.0 + g2) - 1e-12);
    CHECK(hi <= 1.0 + 1e-12);
  }
}

TEST_CASE("weak curvature of circle and sphere charts (analytic derivatives)") {
  // circle of radius rho: |B| = 1/rho at the chart center and everywhere
  for (double rho : {1.0, 2.0, 3.2}) {
    auto grad = [rho](double t) { return VecC{-t / std::sqrt(rho * rho - t * t), 0}; };
    auto hess = [rho](double t) {
      MatC h{};
      double s = rho * rho - t * t;
      h[0][0] = -rho * rho / (s * std::sqrt(s));
      return h;
    };
    for (double t : {0.0, 0.2, -0.35}) {
      CurvatureField c = weak_curvature(grad(t), hess(t), 1);
      CHECK(c.norm_B == doctest::Approx(1.0 / rho).epsilon(1e-8));
    }
  }
  // sphere of radius rho: |B| = sqrt(2)/rho
  for (double rho : {1.0, 1.7}) {
    auto gradf = [rho](const VecC& y) {
      double s = std::sqrt(rho * rho - y[0] * y[0] - y[1] * y[1]);
      return VecC{-y[0] / s, -y[1] / s};
    };
    auto hessf = [rho](const VecC& y) {
      double s2 = rho * rho - y[0] * y[0] - y[1] * y[1];
      double s = std::sqrt(s2);
      MatC h{};
      h[0][0] = -(s2 + y[0] * y[0]) / (s2 * s);
      h[1][1] = -(s2 + y[1] * y[1]) / (s2 * s);
      h[0][1] = h[1][0] = -(y[0] * y[1]) / (s2 * s);
      return h;
    };
    for (VecC y : {VecC{0, 0}, VecC{0.2, -0.1}}) {
      CurvatureField c = weak_curvature(gradf(y), hessf(y), 2);
      CHECK(c.norm_B == doctest::Approx(std::sqrt(2.0) / rho).epsilon(1e-8));
    }
  }
  // affine charts are flat
  MatC zero{};
  CHECK(weak_curvature(VecC{0.4, -0.7}, zero, 2).norm_B == 0.0);
}

TEST_CASE("trace formula and the BBB sandwich agree pointwise") {
  Rng rng(17);
  for (int t = 0; t < 300; ++t) {
    int d = t % 2 + 1;
    double L = 1.3;
    VecC g{rng.uniform(-L, L), d == 2 ? rng.uniform(-L, L) : 0.0};
    if (normc(g) > L) continue;
    MatC h{};
    h[0][0] = rng.uniform(-2, 2);
    if (d == 2) {
      h[1][1] = rng.uniform(-2, 2);
      h[0][1] = h[1][0] = rng.uniform(-2, 2);
    }
    CurvatureField c = weak_curvature(g, h, d);
    double hn = frobenius(h, d);
    CHECK(c.norm_B <= hn + 1e-12);
    CHECK(c.norm_B >= hn / std::pow(1.0 + L * L, 1.5) - 1e-12);
    // |B|^2 equals trace((g^{-1} H)^2) / (1+|grad|^2) by direct evaluation
    FundamentalForms f = forms(g, d);
    double tr = 0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double ab = 0, ba = 0;
        for (int k = 0; k < d; ++k) {
          ab += f.g_inv[a][k] * h[k][b];
        }
        for (int k = 0; k < d; ++k) ba += f.g_inv[b][k] * h[k][a];
        tr += ab * ba;
      }
    double direct = std::sqrt(std::max(0.0, tr)) / std::sqrt(1 + dotc(g, g));
    CHECK(c.norm_B == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("curvature integral over the full circle is 2 pi for any radius") {
  DomainAtlas atlas = make_shape("disk");
  BumpFamily bumps = BumpFamily::build(atlas);
  double total = boundary_curvature_integral(atlas, bumps, 1.0, 96);
  CHECK(total == doctest::Approx(2.0 * M_PI).epsilon(5e-3));
  // q = 2 picks up the radius: integral = 2 pi / rho
  double q2 = boundary_curvature_integral(atlas, bumps, 2.0, 96);
  CHECK(q2 == doctest::Approx(2.0 * M_PI / 3.2).epsilon(5e-3));
  // affine window integrates to zero
  LipschitzChart flat;
  flat.frame.dim = 2;
  flat.radius = 0.5;
  flat.lipschitz = 0.3;
  flat.fn.value = [](const VecC& y) { return 0.25 * y[0]; };
  flat.fn.grad = [](const VecC&) { return VecC{0.25, 0}; };
  flat.fn.hess = [](const VecC&) { return MatC{}; };
  CHECK(curvature_integral(flat, 1.0, 0.4, 64) == 0.0);
  CHECK_THROWS_AS(curvature_integral(flat, 1.0, 0.7, 16), Error);
}

TEST_CASE("curvature integral over the sphere is sqrt(2) times the area") {
  // |B| = sqrt(2)/rho constant; integral = sqrt(2) 4 pi rho for any rho
  DomainAtlas atlas = make_shape("sphere");
  BumpFamily bumps = BumpFamily::build(atlas);
  double total = boundary_curvature_integral(atlas, bumps, 1.0, 33);
  CHECK(total == doctest::Approx(std::sqrt(2.0) * 4.0 * M_PI).epsilon(0.02));
}
