#include <cmath>

#include "doctest.h"
#include "lipsmooth/geom.hpp"
#include "lipsmooth/shapes.hpp"

using namespace lipsmooth;

namespace {

ReferenceFrame rotation2(double theta, VecN base = {}) {
  ReferenceFrame fr;
  fr.dim = 2;
  fr.rotation = identityN();
  fr.rotation[0][0] = std::cos(theta);
  fr.rotation[0][1] = std::sin(theta);
  fr.rotation[1][0] = -std::sin(theta);
  fr.rotation[1][1] = std::cos(theta);
  fr.base = base;
  return fr;
}

LipschitzChart make_chart(double L, double R, std::function<double(const VecC&)> f) {
  LipschitzChart ch;
  ch.frame.dim = 2;
  ch.radius = R;
  ch.lipschitz = L;
  ch.fn.value = std::move(f);
  return ch;
}

}  // namespace

TEST_CASE("reference frames are orthogonal and invert") {
  ReferenceFrame fr = rotation2(0.7, VecN{1.5, -2.0, 0});
  CHECK(fr.orthogonality_defect() < 1e-15);
  Rng rng(11);
  for (int t = 0; t < 32; ++t) {
    VecN x{rng.uniform(-3, 3), rng.uniform(-3, 3), 0};
    VecN back = fr.inverse(fr.forward(x));
    CHECK(dist(back, x) < 1e-12);
  }
}

TEST_CASE("lipschitz characteristic validates its fields") {
  LipschitzCharacteristic c = LipschitzCharacteristic::make(0.5, 0.25, 2.0);
  CHECK(c.ell == doctest::Approx(0.375).epsilon(1e-15));
  CHECK_THROWS_AS(LipschitzCharacteristic::make(0.0, 0.25, 2.0), Error);
  CHECK_THROWS_AS(LipschitzCharacteristic::make(0.5, 1.5, 2.0), Error);
  CHECK_THROWS_AS(LipschitzCharacteristic::make(0.5, 0.25, 0.0), Error);
}

TEST_CASE("transversality margin on the reference examples") {
  // flat chart, vertical direction: margin 1
  LipschitzChart flat = make_chart(0.3, 0.5, [](const VecC&) { return 0.0; });
  CHECK(transversality_margin(flat, VecN{0, 1, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  // slope-1 line: nu = (-1,1)/sqrt 2
  LipschitzChart line = make_chart(1.0, 0.5, [](const VecC& y) { return y[0]; });
  CHECK(transversality_margin(line, VecN{0, 1, 0}) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  // own-frame margin of any L-chart is at least 1/sqrt(1+L^2)
  LipschitzChart corner = make_chart(1.0, 0.5, [](const VecC& y) { return -std::abs(y[0]); });
  CHECK(transversality_margin(corner, VecN{0, 1, 0}) >=
        1.0 / std::sqrt(2.0) - 1e-9);
  CHECK_THROWS_AS(transversality_margin(flat, VecN{0, 0, 0}), Error);
  CHECK_THROWS_AS(transversality_margin(flat, VecN{0, 1, 0}, 2), Error);
}

TEST_CASE("regraph: identity isometry reproduces the flat chart") {
  LipschitzChart flat = make_chart(0.3, 0.5, [](const VecC&) { return 0.0; });
  ReferenceFrame id;
  id.dim = 2;
  LipschitzChart out = regraph(flat, id, VecC{-0.3, 0}, VecC{0.3, 0}, 65);
  for (double t : {-0.25, 0.0, 0.2})
    CHECK(std::abs(out.fn.value(VecC{t, 0})) < 1e-12);
}

TEST_CASE("regraph: 45-degree rotation of the corner graph") {
  // rotating y = |t| so that one arm turns vertical; the reachable window is
  // one-sided and the regraphed chart is flat there with constant <= 1
  LipschitzChart corner = make_chart(1.0, 0.8, [](const VecC& y) { return std::abs(y[0]); });
  ReferenceFrame iso = rotation2(-M_PI / 4.0);
  LipschitzChart out = regraph(corner, iso, VecC{0.05, 0}, VecC{0.6, 0}, 65);
  for (double t : {0.06, 0.2, 0.5})
    CHECK(std::abs(out.fn.value(VecC{t, 0})) < 1e-10);
  CHECK(out.lipschitz <= 1.0 + 1e-9);
}

TEST_CASE("regraph: circle chart in a rotated frame matches the analytic graph") {
  const double rho = 2.0;
  // chart at the top of the circle centered at the origin, outward normal up
  LipschitzChart top = make_chart(0.25, 0.45, [rho](const VecC& y) {
    return std::sqrt(rho * rho - y[0] * y[0]) - rho;
  });
  top.frame.dim = 2;
  top.frame.base = VecN{0, rho, 0};
  const double th = M_PI / 6.0;
  ReferenceFrame iso = rotation2(th);
  LipschitzChart out = regraph(top, iso, VecC{-0.2, 0}, VecC{0.2, 0}, 129);
  // circle center in the target coordinates: z = iso(R_src(x - base))
  VecN w = iso.forward(top.frame.forward(VecN{0, 0, 0}));
  for (double z1 : {-0.18, -0.05, 0.0, 0.11, 0.18}) {
    double analytic = w[1] + std::sqrt(rho * rho - (z1 - w[0]) * (z1 - w[0]));
    CHECK(std::abs(out.fn.value(VecC{z1, 0}) - analytic) < 1e-8);
  }
  CHECK_THROWS_AS(regraph(top, iso, VecC{-5.0, 0}, VecC{5.0, 0}, 17), Error);
}

TEST_CASE("transition maps: identity, round trip, corner window") {
  DomainAtlas atlas = make_shape("square");
  // i = j is the identity
  TransitionResult self = transition_eval(atlas, 3, 3, VecC{0.05, 0});
  CHECK(normc(subc(self.target, VecC{0.05, 0})) < 1e-12);

  // overlapping pairs round-trip within 1e-8
  Rng rng(5);
  int tested = 0;
  for (int i = 0; i < atlas.size() && tested < 40; ++i)
    for (int j = 0; j < atlas.size() && tested < 40; ++j) {
      if (i == j || dist(atlas.centers[i], atlas.centers[j]) > atlas.R() / 4) continue;
      for (int t = 0; t < 4; ++t) {
        VecC yp{rng.uniform(-atlas.R() / 8, atlas.R() / 8), 0};
        try {
          TransitionResult fwd = transition_eval(atlas, i, j, yp);
          TransitionResult back = transition_eval(atlas, j, i, fwd.target);
          CHECK(normc(subc(back.target, yp)) < 1e-8);
          CHECK(fwd.mismatch < 1e-9);
          ++tested;
        } catch (const Error&) {
        }
      }
    }
  CHECK(tested > 0);
}

TEST_CASE("transition between square corner and edge charts hits the corner") {
  DomainAtlas atlas = make_shape("square");
  double half = 2.0;  // side 4
  // find a corner-frame chart and a neighboring edge chart near vertex (2,2)
  int corner = -1, edge = -1;
  VecN v{half, half, 0};
  for (int i = 0; i < atlas.size(); ++i) {
    double dv = dist(atlas.centers[i], v);
    bool is_corner_frame = std::abs(std::abs(atlas.charts[i].frame.rotation[1][0]) -
                                    std::sqrt(0.5)) < 1e-9;
    if (is_corner_frame && corner < 0 && dv < 1.2 * atlas.R()) corner = i;
    if (!is_corner_frame && edge < 0 && dv > 1.5 * atlas.R() && dv < 1.9 * atlas.R()) edge = i;
  }
  REQUIRE(corner >= 0);
  REQUIRE(edge >= 0);
  // a point on the shared edge piece maps consistently between the two frames
  VecN shared = atlas.centers[edge];
  VecC yp_edge{atlas.charts[edge].frame.forward(shared)[0], 0};  // = 0
  try {
    TransitionResult tr = transition_eval(atlas, edge, corner, yp_edge);
    CHECK(dist(tr.world, shared) < 1e-9);
  } catch (const Error&) {
    // centers may be out of each other's window; fall back to a midpoint probe
    VecN mid = scale(add(atlas.centers[edge], atlas.centers[corner]), 0.5);
    VecC yp{atlas.charts[edge].frame.forward(mid)[0], 0};
    TransitionResult tr = transition_eval(atlas, edge, corner, yp);
    CHECK(tr.mismatch < 1e-8);
  }
}

TEST_CASE("greedy cover touches every sample") {
  Rng rng(42);
  std::vector<VecN> pts;
  for (int i = 0; i < 500; ++i)
    pts.push_back(VecN{rng.uniform(-1, 1), rng.uniform(-1, 1), 0});
  double radius = 0.2;
  std::vector<int> picks = greedy_cover(pts, radius);
  for (const VecN& p : pts) {
    double best = 1e300;
    for (int k : picks) best = std::min(best, dist(p, pts[k]));
    CHECK(best <= radius + 1e-12);
  }
}
