#include <cmath>

#include "doctest.h"
#include "lipsmooth/metrics.hpp"
#include "lipsmooth/shapes.hpp"

using namespace lipsmooth;

TEST_CASE("hausdorff distance: identical sets and concentric circles") {
  std::vector<VecN> a, b;
  for (int i = 0; i < 600; ++i) {
    double th = 2 * M_PI * i / 600;
    a.push_back(VecN{std::cos(th), std::sin(th), 0});
    b.push_back(VecN{1.05 * std::cos(th), 1.05 * std::sin(th), 0});
  }
  HausdorffResult same = hausdorff_boundaries(a, a, 2, 0.011, 0.011);
  CHECK(same.value == 0.0);
  HausdorffResult shifted = hausdorff_boundaries(a, b, 2, 0.011, 0.011);
  CHECK(shifted.value == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(shifted.sampling_error == doctest::Approx(0.0055));
  CHECK_THROWS_AS(hausdorff_boundaries({}, a, 2), Error);
}

TEST_CASE("lebesgue gaps: inner region inside the domain, O(1/m) scaling") {
  DomainAtlas atlas = make_shape("disk");
  BumpFamily bumps = BumpFamily::build(atlas);
  const double L = atlas.L();
  double g32, g64;
  {
    DefiningTriple t32(atlas, bumps, 32);
    LebesgueGap outer = lebesgue_gap(t32, GapRegion::outer_minus_domain, L / 32);
    LebesgueGap inner = lebesgue_gap(t32, GapRegion::domain_minus_inner, L / 32);
    // band-width argument: gap within [perimeter L/m (1-eps), perimeter 3L/m (1+eps)]
    double per = 2 * M_PI * 3.2;
    CHECK(outer.measure >= per * L / 32 * 0.8);
    CHECK(outer.measure <= per * 3 * L / 32 * 1.2);
    CHECK(inner.measure >= per * L / 32 * 0.8);
    CHECK(inner.measure <= per * 3 * L / 32 * 1.2);
    g32 = outer.measure;
    CHECK_THROWS_AS(lebesgue_gap(t32, GapRegion::outer_minus_domain, 10 * L), Error);
  }
  {
    DefiningTriple t64(atlas, bumps, 64);
    g64 = lebesgue_gap(t64, GapRegion::outer_minus_domain, L / 64).measure;
  }
  double ratio = g64 / g32;
  CHECK(ratio >= 0.3);
  CHECK(ratio <= 0.7);
}

TEST_CASE("omega_m stays inside Omega cell by cell") {
  DomainAtlas atlas = make_shape("disk");
  BumpFamily bumps = BumpFamily::build(atlas);
  DefiningTriple trip(atlas, bumps, 32);
  // count cells with F~_m < 0 <= -F ... i.e. inner region outside the domain
  const double h = atlas.L() / 32;
  long bad = 0;
  for (double x = -3.5; x <= 3.5; x += h)
    for (double y = -3.5; y <= 3.5; y += h) {
      if (std::abs(atlas.sdf(VecN{x, y, 0})) > 0.2) continue;
      Classification c = classify(trip, VecN{x, y, 0});
      if (!c.in_domain) continue;
      if (c.Ftm < 0 && c.F >= 0) ++bad;
    }
  CHECK(bad == 0);
}

TEST_CASE("sobolev error vanishes when psi equals phi") {
  DomainAtlas atlas = make_shape("disk");
  const LipschitzChart& ch = atlas.charts[0];
  ExtractedChart ec;
  ec.chart_index = 0;
  ec.m = 16;
  ec.dim = 2;
  ec.window = atlas.R() - 2 * atlas.eps0;
  ec.res = 65;
  ec.grid_h = 2 * ec.window / 64;
  for (int i = 0; i < 65; ++i) {
    VecC yp = VecC{-ec.window + ec.grid_h * i, 0};
    ec.psi.push_back(ch.eval(yp));
    ec.grad.push_back(ch.grad(yp));
    ec.hess.push_back(ch.hess(yp));
    ec.mask.push_back(1);
  }
  CHECK(sobolev_error(ec, ch, 1, 2.0) < 1e-12);
  CHECK(sobolev_error(ec, ch, 2, 1.0) < 1e-12);
  CHECK_THROWS_AS(sobolev_error(ec, ch, 3, 2.0), Error);
}

TEST_CASE("measured characteristic of extracted disks stays near the base") {
  DomainAtlas atlas = make_shape("disk");
  BumpFamily bumps = BumpFamily::build(atlas);
  DefiningField outer(atlas, bumps, FieldKind::outer, 64);
  std::vector<ExtractedChart> charts;
  for (int i = 0; i < atlas.size(); i += 16) charts.push_back(extract_chart(outer, i, 17));
  MeasuredCharacteristic mc = measure_characteristic(charts, atlas);
  const double L = atlas.L();
  CHECK(mc.L_m <= L * 1.05);  // mollification preserves L; mixing adds little
  CHECK(mc.L_m <= 8 * (1 + L * L));
  CHECK(mc.R_m >= atlas.R() / (8 * (1 + L * L)));
}

TEST_CASE("convergence report serializes deterministically") {
  ConvergenceReport rep;
  rep.shape = "disk";
  rep.dim = 2;
  rep.L = 0.2;
  rep.R = 0.6276;
  ConvergenceRow row;
  row.m = 16;
  row.hausdorff_outer = 0.012345678901234567;
  rep.rows.push_back(row);
  std::string c1 = rep.to_csv(), c2 = rep.to_csv();
  std::string j1 = rep.to_json(), j2 = rep.to_json();
  CHECK(c1 == c2);
  CHECK(j1 == j2);
  CHECK(c1.find("hausdorff_outer") != std::string::npos);
  CHECK(j1.find("pinned_constants") != std::string::npos);
}
