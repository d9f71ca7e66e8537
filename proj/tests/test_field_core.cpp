#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "weissfb/boundary.hpp"
#include "weissfb/grid.hpp"
#include "weissfb/quadrature.hpp"

using namespace wfb;
using std::numbers::pi;

TEST_CASE("grid geometry") {
  GridSpec g = GridSpec::physical(0.5, -2.0, 0.125, 17, 9);
  CHECK(g.x_max() == doctest::Approx(2.5));
  CHECK(g.y_max() == doctest::Approx(-1.0));
  CHECK(g.size() == 17u * 9u);
  CHECK(g.index(3, 2) == 2u * 17 + 3);
  CHECK(g.node(4, 1).x == doctest::Approx(1.0));
  CHECK(g.node(4, 1).y == doctest::Approx(-1.875));
  CHECK(g.contains({1.0, -1.5}));
  CHECK(!g.contains({0.4, -1.5}));
  CHECK(g.hull_margin({0.625, -1.5}) == doctest::Approx(0.125));

  CHECK_THROWS(GridSpec::physical(-0.1, -2.0, 0.125, 17, 9));
  CHECK_THROWS(GridSpec::physical(0.5, -2.0, 0.0, 17, 9));
  CHECK_THROWS(GridSpec::physical(0.5, -2.0, 0.125, 2, 9));

  GridSpec r = GridSpec::reference(-1.0, -1.0, 0.25, 9, 9);
  CHECK(r.x_min == -1.0);

  GridSpec c = GridSpec::centered_square({1.0, -1.0}, 0.25, 9);
  CHECK(c.x_min == doctest::Approx(0.75));
  CHECK(c.y_min == doctest::Approx(-1.25));
  CHECK(c.h == doctest::Approx(0.0625));
  CHECK(c.nx == 9);
  CHECK(c.ny == 9);
}

TEST_CASE("bilinear interpolation is exact on bilinear data") {
  GridSpec g = GridSpec::physical(1.0, -2.0, 0.1, 11, 11);
  auto fn = [](Vec2 p) { return 2.0 + 3.0 * p.x - p.y + 0.5 * p.x * p.y; };
  ScalarField f(g, fn);
  for (Vec2 p : {Vec2{1.23, -1.71}, Vec2{1.0, -2.0}, Vec2{1.9999, -1.0001}}) {
    CHECK(f.interpolate(p) == doctest::Approx(fn(p)).epsilon(1e-12));
  }
  Vec2 gr = f.gradient({1.4, -1.3});
  CHECK(gr.x == doctest::Approx(3.0 + 0.5 * (-1.3)).epsilon(1e-9));
  CHECK(gr.y == doctest::Approx(-1.0 + 0.5 * 1.4).epsilon(1e-9));
}

TEST_CASE("gradient converges at second order on smooth data") {
  auto fn = [](Vec2 p) { return std::sin(p.x) * std::cos(p.y); };
  const Vec2 p{1.37, -1.22};
  const Vec2 exact{std::cos(p.x) * std::cos(p.y), -std::sin(p.x) * std::sin(p.y)};
  double prev = 1.0;
  for (int n : {33, 65, 129}) {
    GridSpec g = GridSpec::centered_square({1.4, -1.2}, 0.4, n);
    ScalarField f(g, fn);
    const double err = (f.gradient(p) - exact).norm();
    CHECK(err < 0.7 * prev);
    prev = err;
  }
  CHECK(prev < 5e-4);
}

TEST_CASE("weighted divergence annihilates x^2/2 and x^2 y") {
  GridSpec g = GridSpec::physical(0.8, -1.5, 0.05, 21, 21);
  ScalarField f(g, [](Vec2 p) { return 0.5 * p.x * p.x + 0.3 * p.x * p.x * p.y; });
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i)
      CHECK(std::abs(f.weighted_divergence(i, j)) < 1e-10);
}

TEST_CASE("weighted divergence of x^3 approaches 3") {
  double prev = 1.0;
  for (double h : {0.04, 0.02, 0.01}) {
    GridSpec g = GridSpec::physical(1.0, -1.0, h, 11, 5);
    ScalarField f(g, [](Vec2 p) { return p.x * p.x * p.x; });
    const double err = std::abs(f.weighted_divergence(5, 2) - 3.0);
    CHECK(err < 0.5 * prev + 1e-14);
    prev = err;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("circle quadrature hits closed forms") {
  GridSpec g = GridSpec::centered_square({1.0, -1.0}, 0.6, 129);
  const Vec2 c{1.0, -1.0};
  const double r = 0.5;
  const double one = circle_integral(g, [](Vec2) { return 1.0; }, c, r);
  CHECK(one == doctest::Approx(2 * pi * r).epsilon(1e-12));
  const double xi = circle_integral(g, [](Vec2 p) { return p.x; }, c, r);
  CHECK(xi == doctest::Approx(2 * pi * r * 1.0).epsilon(1e-12));
  // closed form: 2 pi r / sqrt(x0^2 - r^2)
  const double inv = circle_integral(g, [](Vec2 p) { return 1.0 / p.x; }, c, r);
  CHECK(inv == doctest::Approx(2 * pi * r / std::sqrt(1.0 - r * r)).epsilon(1e-9));
  CHECK_THROWS(circle_integral(g, [](Vec2) { return 1.0; }, c, r, 16));
}

TEST_CASE("disk and annulus quadrature") {
  GridSpec g = GridSpec::centered_square({1.0, -1.0}, 0.6, 257);
  const Vec2 c{1.0, -1.0};
  const double r = 0.5;
  const double area = disk_integral(g, [](Vec2) { return 1.0; }, c, r);
  CHECK(area == doctest::Approx(pi * r * r).epsilon(2e-4));
  // closed form: 2 pi (x0 - sqrt(x0^2 - r^2)) for the 1/x weight
  const double invx = disk_integral(g, [](Vec2 p) { return 1.0 / p.x; }, c, r);
  CHECK(invx == doctest::Approx(2 * pi * (1.0 - std::sqrt(1.0 - r * r))).epsilon(5e-4));
  const double ann = annulus_integral(g, [](Vec2) { return 1.0; }, c, 0.25, 0.5);
  CHECK(ann == doctest::Approx(pi * (0.25 - 0.0625)).epsilon(2e-3));
  CHECK_THROWS(disk_integral(g, [](Vec2) { return 1.0; }, c, g.h));
  CHECK_THROWS(disk_integral(g, [](Vec2) { return 1.0; }, c, 0.7));
}

TEST_CASE("csv round trip") {
  GridSpec g = GridSpec::physical(0.9, -1.3, 0.07, 7, 5);
  ScalarField f(g, [](Vec2 p) { return std::exp(p.x) + p.y / 3.0; });
  std::stringstream ss;
  f.dump_csv(ss);
  ScalarField back = ScalarField::load_csv(ss);
  REQUIRE(back.grid() == g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(back.at(i, j) == f.at(i, j));
}

TEST_CASE("marching squares on a straight interface") {
  GridSpec g = GridSpec::physical(1.0, -1.0, 0.05, 21, 21);
  ScalarField f(g, [](Vec2 p) { return p.y + 0.47; });
  BoundarySegmentSet fb = extract_free_boundary(f);
  REQUIRE(!fb.empty());
  for (const auto& s : fb.segments) {
    CHECK(s.midpoint().y == doctest::Approx(-0.47).epsilon(1e-10));
    CHECK(s.normal.y == doctest::Approx(1.0));
  }
}

TEST_CASE("marching squares on a disk interface") {
  GridSpec g = GridSpec::physical(0.5, -1.5, 0.01, 101, 101);
  const Vec2 c{1.0, -1.0};
  ScalarField f(g, [&](Vec2 p) { return 0.09 - (p - c).dot(p - c); });
  BoundarySegmentSet fb = extract_free_boundary(f);
  REQUIRE(!fb.empty());
  for (Vec2 p : fb.sample_points()) CHECK(std::abs((p - c).norm() - 0.3) < 2e-4);
  for (const auto& s : fb.segments) {
    // normal points into {f > 0}, i.e. toward the center
    CHECK(s.normal.dot(c - s.midpoint()) > 0.0);
  }
  auto np = fb.nearest_point({1.0, -0.5});
  REQUIRE(np.has_value());
  CHECK((*np - Vec2{1.0, -0.7}).norm() < 2e-3);
}

TEST_CASE("hausdorff distance between shifted interfaces") {
  GridSpec g = GridSpec::physical(1.0, -1.0, 0.02, 51, 51);
  ScalarField a(g, [](Vec2 p) { return p.y + 0.5; });
  ScalarField b(g, [](Vec2 p) { return p.y + 0.41; });
  auto d = hausdorff_fb_distance(a, b, {1.5, -0.45}, 0.3);
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(0.09).epsilon(1e-6));

  ScalarField pos(g, [](Vec2) { return 1.0; });
  auto none = hausdorff_fb_distance(a, pos, {1.5, -0.45}, 0.3);
  CHECK(!none.has_value());
}
