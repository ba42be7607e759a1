#include <cmath>

#include "doctest.h"
#include "lipsmooth/domfile.hpp"

using namespace lipsmooth;

TEST_CASE("expression grammar evaluates the documented operators") {
  auto e1 = parse_chart_expr("1 + 2 * 3 - 4 / 2", 1);
  CHECK(e1(VecC{}) == doctest::Approx(5.0));
  auto e2 = parse_chart_expr("2 ^ 3 ^ 2", 1);  // right associative
  CHECK(e2(VecC{}) == doctest::Approx(512.0));
  auto e3 = parse_chart_expr("abs(y1) + sqrt(4) - min(1, 2) + max(0, y1)", 1);
  CHECK(e3(VecC{-3, 0}) == doctest::Approx(3 + 2 - 1 + 0));
  CHECK(e3(VecC{2, 0}) == doctest::Approx(2 + 2 - 1 + 2));
  auto e4 = parse_chart_expr("sin(y1) * cos(y2)", 2);
  CHECK(e4(VecC{0.5, 0.25}) == doctest::Approx(std::sin(0.5) * std::cos(0.25)).epsilon(1e-15));
  auto e5 = parse_chart_expr("-(y1 - 1) * 2", 1);
  CHECK(e5(VecC{0.25, 0}) == doctest::Approx(1.5));
  auto e6 = parse_chart_expr("sqrt(1 - y1 ^ 2) - 1", 1);
  CHECK(e6(VecC{0.6, 0}) == doctest::Approx(-0.2));
}

TEST_CASE("parse errors carry line and column") {
  CHECK_THROWS_AS(parse_chart_expr("y2", 1), ParseError);
  CHECK_THROWS_AS(parse_chart_expr("foo(1)", 1), ParseError);
  CHECK_THROWS_AS(parse_chart_expr("1 +", 1), ParseError);
  CHECK_THROWS_AS(parse_chart_expr("min(1)", 1), ParseError);
  try {
    parse_chart_expr("1 + $", 1, 7);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 7);
    CHECK(e.column >= 5);
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
  }
}

static const char* kTwoChartFile = R"(# two opposing flat charts of a strip-like window
dim 2
lipschitz 1.0
radius 0.5
diameter 4.0

chart
  base 0.0 1.0
  rot 1 0 0 1
  expr 0 * y1
chart
  base 0.0 -1.0
  rot -1 0 0 -1
  shape flat 0
)";

TEST_CASE("domain files parse into usable atlases") {
  DomainAtlas atlas = parse_domain_text(kTwoChartFile);
  CHECK(atlas.size() == 2);
  CHECK(atlas.dim == 2);
  CHECK(atlas.L() == 1.0);
  CHECK(atlas.eps0 == doctest::Approx(0.5 / 8));
  CHECK(atlas.charts[0].eval(VecC{0.2, 0}) == 0.0);
  // frame of the second chart flips the vertical
  VecN p = atlas.charts[1].surface_point(VecC{0.1, 0});
  CHECK(p[1] == doctest::Approx(-1.0));
}

TEST_CASE("domain file structural errors are located") {
  CHECK_THROWS_AS(parse_domain_text("dim 4\n"), ParseError);
  CHECK_THROWS_AS(parse_domain_text("chart\n"), ParseError);  // header missing
  CHECK_THROWS_AS(parse_domain_text("dim 2\nlipschitz 1\nradius 0.5\ndiameter 2\n"
                                    "chart\n base 0 0\n rot 1 0 0 1\n"),
                  ParseError);  // chart without expr/shape
  CHECK_THROWS_AS(parse_domain_text("dim 2\nlipschitz 1\nradius 0.5\ndiameter 2\n"
                                    "chart\n base 0 0\n rot 1 0 0 1\n expr y1 @ 2\n"),
                  ParseError);
  try {
    parse_domain_text("dim 2\nlipschitz 1\nradius 0.5\ndiameter 2\n"
                      "chart\n base 0 0\n rot 1 0 0 1\n expr sqrt(\n");
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 8);
  }
}

TEST_CASE("expression charts round-trip through the circle example") {
  // a one-chart file whose expression is the canonical circle graph
  std::string text =
      "dim 2\nlipschitz 0.3\nradius 0.5\ndiameter 4\n"
      "chart\n base 0 2\n rot 1 0 0 1\n expr sqrt(4 - y1^2) - 2\n";
  DomainAtlas atlas = parse_domain_text(text);
  for (double t : {-0.4, -0.1, 0.3})
    CHECK(atlas.charts[0].eval(VecC{t, 0}) ==
          doctest::Approx(std::sqrt(4 - t * t) - 2).epsilon(1e-14));
}
