#include <cmath>

#include "doctest.h"
#include "lipsmooth/domfile.hpp"
#include "lipsmooth/mollify.hpp"
#include "lipsmooth/partition.hpp"
#include "lipsmooth/quadrature.hpp"
#include "lipsmooth/shapes.hpp"

using namespace lipsmooth;

TEST_CASE("radial profile: plateau, support, and the mid-rim oracle") {
  double R = 0.64;
  RadialProfile prof = bump_profile(2, R / 32, 3 * R / 16);
  CHECK(prof.value(0.0) == 1.0);
  CHECK(prof.value(3 * R / 16 - R / 32) == 1.0);          // plateau edge
  CHECK(prof.value(3 * R / 16 + R / 32) == 0.0);          // support edge
  CHECK(prof.value(3 * R / 16 + R / 16) == 0.0);
  // independent 2D tensor quadrature of the convolution at the rim radius
  double s0 = 3 * R / 16;
  const MollifierKernel& ker = kernel(2);
  double t = R / 32, b = 3 * R / 16;
  auto inner = [&](double y1) {
    return adaptive_integrate(
        [&](double y2) {
          double r = std::hypot(y1, y2);
          double rho = ker.rho_radial(r / t) / (t * t);
          double dx = s0 - y1;
          return (dx * dx + y2 * y2 <= b * b) ? rho : 0.0;
        },
        -t, t, 1e-10);
  };
  double oracle = adaptive_integrate(inner, -t, t, 1e-9);
  CHECK(prof.value(s0) == doctest::Approx(oracle).epsilon(1e-5));
  // near one half for the symmetric kernel against a gently curved rim
  CHECK(prof.value(s0) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("boundary bumps: plateau on B_{R/8}, zero beyond 7R/32") {
  DomainAtlas atlas = make_shape("disk");
  BumpFamily bumps = BumpFamily::build(atlas);
  double R = atlas.R();
  for (int i : {0, 7, 31}) {
    VecN c = atlas.centers[i];
    CHECK(bumps.eta(i + 1, c) == 1.0);
    VecN near = c;
    near[0] += R / 8 * 0.99;
    CHECK(bumps.eta(i + 1, near) == doctest::Approx(1.0).epsilon(1e-12));
    VecN far = c;
    far[0] += 7 * R / 32 * 1.001;
    CHECK(bumps.eta(i + 1, far) == 0.0);
  }
}

TEST_CASE("interior bump: plateau deep inside, zero near the boundary") {
  DomainAtlas atlas = make_shape("disk");
  BumpFamily bumps = BumpFamily::build(atlas);
  CHECK(bumps.eta0(VecN{0, 0, 0}) == 1.0);  // center, d = 3.2
  // boundary point and the R/64-shell around it
  VecN b = atlas.boundary_samples[3];
  CHECK(bumps.eta0(b) == 0.0);
  VecN inward = scale(b, 1.0 - (atlas.R() / 64) / norm(b));
  CHECK(bumps.eta0(inward) == 0.0);  // d = R/64 < R/32
  // deep point: xi_0 = 1 (only the interior bump alive)
  CHECK(bumps.xi(0, VecN{0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("partition of unity sums to one across W") {
  DomainAtlas atlas = make_shape("disk");
  BumpFamily bumps = BumpFamily::build(atlas);
  Rng rng(0xabc);
  int tested = 0;
  for (int t = 0; t < 20000 && tested < 2000; ++t) {
    VecN x{rng.uniform(-3.6, 3.6), rng.uniform(-3.6, 3.6), 0};
    double S = bumps.sum_eta(x);
    if (S < 1e-9) continue;
    ++tested;
    double total = bumps.eta0(x) / S;
    std::vector<int> act;
    atlas.active_charts(x, act);
    for (int i : act) total += bumps.eta(i + 1, x) / S;
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
  CHECK(tested >= 2000);
}

TEST_CASE("two symmetric bumps split the unit evenly") {
  // a custom two-chart atlas; on the perpendicular bisector of the two
  // centers, inside both plateaus, each xi is exactly one half
  std::string text =
      "dim 2\nlipschitz 1.0\nradius 0.5\ndiameter 4.0\n"
      "chart\n base -0.02 0\n rot 1 0 0 1\n expr 0 * y1\n"
      "chart\n base 0.02 0\n rot 1 0 0 1\n expr 0 * y1\n";
  DomainAtlas atlas = parse_domain_text(text);
  // synthetic sdf: distance to the x-axis boundary (domain below)
  atlas.sdf = [](const VecN& x) { return -x[1]; };
  atlas.sdf_smooth_in_shell = true;
  BumpFamily bumps = BumpFamily::build(atlas);
  VecN mid{0, -0.003, 0};
  CHECK(bumps.eta(1, mid) == 1.0);
  CHECK(bumps.eta(2, mid) == 1.0);
  CHECK(bumps.eta0(mid) == 0.0);
  CHECK(bumps.xi(1, mid) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bumps.xi(2, mid) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(bumps.xi(1, VecN{5, 5, 0}), Error);
}

TEST_CASE("xi derivative bounds hold with the pinned constants") {
  for (const char* shape : {"disk", "square"}) {
    DomainAtlas atlas = make_shape(shape);
    BumpFamily bumps = BumpFamily::build(atlas);
    auto rep = bumps.measure_derivative_bounds(8);
    CHECK(rep.samples > 0);
    CHECK(rep.sup_grad_scaled <= 64.0);
    CHECK(rep.sup_hess_scaled <= 4096.0);
  }
}

TEST_CASE("smoothness proxy: second differences at spacing R/256") {
  for (const char* shape : {"disk", "square"}) {
    DomainAtlas atlas = make_shape(shape);
    BumpFamily bumps = BumpFamily::build(atlas);
    double R = atlas.R();
    double h = R / 256;
    double bound = 4096.0 / (R * R);
    Rng rng(0x51e9);
    // sample xi_0 and one boundary xi near the boundary and across the
    // interior transition shell
    for (int t = 0; t < 300; ++t) {
      const VecN b = atlas.boundary_samples[static_cast<std::size_t>(
          rng.uniform() * static_cast<double>(atlas.boundary_samples.size()))];
      double depth = rng.uniform(0.0, R / 12);
      VecN inward = scale(b, 1.0 - depth / norm(b));
      for (int idx : {0, 1}) {
        for (int axis = 0; axis < 2; ++axis) {
          VecN xp = inward, xm = inward;
          xp[axis] += h;
          xm[axis] -= h;
          double s0 = bumps.sum_eta(inward);
          if (s0 < 0.5) continue;
          double d2 =
              (bumps.xi(idx, xp) - 2 * bumps.xi(idx, inward) + bumps.xi(idx, xm)) / (h * h);
          CHECK(std::abs(d2) <= bound);
        }
      }
    }
  }
}

TEST_CASE("build_bumps rejects domains thinner than the erosion") {
  std::string text =
      "dim 2\nlipschitz 1.0\nradius 0.5\ndiameter 4.0\n"
      "chart\n base 0 0\n rot 1 0 0 1\n expr 0 * y1\n";
  DomainAtlas atlas = parse_domain_text(text);
  atlas.sdf = [](const VecN&) { return 1e-4; };  // thinner than R/16 everywhere
  atlas.sdf_smooth_in_shell = true;
  CHECK_THROWS_AS(BumpFamily::build(atlas), Error);
}
