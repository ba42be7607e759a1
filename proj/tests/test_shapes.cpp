#include <cmath>

#include "doctest.h"
#include "lipsmooth/shapes.hpp"

using namespace lipsmooth;

TEST_CASE("shape spec parsing") {
  ShapeSpec s = parse_shape_spec("disk:radius=1.5,lip=0.3");
  CHECK(s.params.at("radius") == 1.5);
  CHECK(s.params.at("lip") == 0.3);
  CHECK_THROWS_AS(parse_shape_spec("blob"), Error);
  CHECK_THROWS_AS(parse_shape_spec("disk:radius"), Error);
  CHECK_THROWS_AS(parse_shape_spec("disk:bogus=1"), Error);
}

TEST_CASE("disk atlas satisfies every invariant with the analytic constant") {
  DomainAtlas atlas = make_shape("disk");
  atlas.validate();
  // chart slope reaches L exactly at the window rim
  const LipschitzChart& ch = atlas.charts[0];
  double slope = std::abs(ch.grad(VecC{atlas.R() * 0.999, 0})[0]);
  CHECK(slope <= atlas.L() * (1 + 1e-6));
  CHECK(slope >= atlas.L() * 0.99);
  // |phi| <= L |y'| at the rim (analytic circle chart)
  CHECK(std::abs(ch.eval(VecC{atlas.R(), 0})) <= atlas.L() * atlas.R());
  // every chart center lies on the circle
  for (const VecN& c : atlas.centers)
    CHECK(norm(c) == doctest::Approx(3.2).epsilon(1e-12));
}

TEST_CASE("square atlas: edge charts flat, corner charts 45-degree graphs") {
  DomainAtlas atlas = make_shape("square");
  atlas.validate();
  CHECK(atlas.L() == 1.0);
  int corners = 0, edges = 0;
  for (int i = 0; i < atlas.size(); ++i) {
    const MatN& rot = atlas.charts[i].frame.rotation;
    bool diag = std::abs(std::abs(rot[1][0]) - std::sqrt(0.5)) < 1e-9;
    if (diag) {
      ++corners;
      // graph is a tent: slope magnitude 1 everywhere with at most one kink
      const int nn = 33;
      double h = 2 * atlas.R() * 0.98 / (nn - 1);
      int kinks = 0;
      double prev = atlas.charts[i].eval(VecC{-atlas.R() * 0.98, 0});
      double prev_slope = 0;
      for (int k = 1; k < nn; ++k) {
        double v = atlas.charts[i].eval(VecC{-atlas.R() * 0.98 + h * k, 0});
        double slope = (v - prev) / h;
        if (k > 1 && std::abs(slope - prev_slope) > 0.5) ++kinks;
        if (k > 1 && std::abs(slope - prev_slope) < 0.5)
          CHECK(std::abs(std::abs(slope) - 1.0) < 1e-9);
        prev = v;
        prev_slope = slope;
      }
      CHECK(kinks <= 1);
    } else {
      ++edges;
      CHECK(atlas.charts[i].eval(VecC{atlas.R() / 3, 0}) == 0.0);
    }
  }
  CHECK(corners > 0);
  CHECK(edges > 0);
}

TEST_CASE("regular polygon and star atlases validate") {
  DomainAtlas poly = make_shape("regular_polygon");
  poly.validate();
  CHECK(poly.L() == doctest::Approx(std::tan(M_PI / 6)).epsilon(1e-12));

  DomainAtlas star = make_shape("star");
  star.validate();
  // star sdf: positive inside, negative outside
  CHECK(star.sdf(VecN{0, 0, 0}) > 0);
  CHECK(star.sdf(VecN{10, 0, 0}) < 0);
}

TEST_CASE("star with spikes beyond the requested constant is rejected") {
  CHECK_THROWS_AS(make_shape("star:amp=0.3,lip=0.3"), Error);
}

TEST_CASE("sphere atlas (n=3) validates and has the analytic chart") {
  DomainAtlas atlas = make_shape("sphere");
  atlas.validate(16);
  CHECK(atlas.dim == 3);
  const LipschitzChart& ch = atlas.charts[0];
  // phi(0') = 0 and |B|-ready analytic derivatives at the pole
  CHECK(std::abs(ch.eval(VecC{0, 0})) < 1e-14);
  MatC h = ch.hess(VecC{0, 0});
  CHECK(h[0][0] == doctest::Approx(-1.0).epsilon(1e-12));  // radius 1 sphere
  CHECK(h[1][1] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(h[0][1]) < 1e-12);
}

TEST_CASE("cube and cylinder atlases validate at smoke scale") {
  DomainAtlas cube = make_shape("cube");
  cube.validate(8);
  CHECK(cube.dim == 3);
  CHECK(cube.L() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(cube.sdf(VecN{0, 0, 0}) == doctest::Approx(0.5).epsilon(1e-12));

  DomainAtlas cyl = make_shape("cylinder");
  cyl.validate(8);
  CHECK(cyl.sdf(VecN{0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cyl.sdf(VecN{1.5, 0, 0}) == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("unknown shapes and invalid parameters are rejected") {
  CHECK_THROWS_AS(make_shape("pentagon"), Error);
  CHECK_THROWS_AS(make_shape("disk:radius=4,lip=2"), Error);  // derived R >= 1
  CHECK_THROWS_AS(make_shape("regular_polygon:sides=2"), Error);
  CHECK_THROWS_AS(make_shape("square:chart_radius=2"), Error);
}
