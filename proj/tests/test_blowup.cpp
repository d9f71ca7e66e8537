#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "weissfb/blowup.hpp"
#include "weissfb/physics.hpp"

using namespace wfb;
using std::numbers::pi;

TEST_CASE("reference grid covers the unit square") {
  GridSpec g = reference_unit_grid();
  CHECK(g.nx == 257);
  CHECK(g.ny == 257);
  CHECK(g.x_min == -1.0);
  CHECK(g.x_max() == doctest::Approx(1.0));
}

TEST_CASE("rescaling is scale-free on 1-homogeneous fields") {
  const Vec2 X0{1.0, -1.0};
  GridSpec g = GridSpec::centered_square(X0, 0.25, 513);
  ScalarField hp = half_plane_solution(X0, {0.0, 1.0}, g);
  ScalarField a = rescale(hp, X0, 0.2);
  ScalarField b = rescale(hp, X0, 0.05);
  double worst = 0.0;
  for (size_t i = 0; i < a.values().size(); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  CHECK(worst < 1e-12);
  CHECK(a.interpolate({0.0, 0.5}) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("rescaling a quadratic is linear in the scale") {
  const Vec2 X0{1.0, -1.0};
  GridSpec g = GridSpec::centered_square(X0, 0.25, 513);
  ScalarField quad(g, [&](Vec2 p) { return (p - X0).dot(p - X0); });
  for (double rho : {0.2, 0.1}) {
    ScalarField r = rescale(quad, X0, rho);
    CHECK(r.interpolate({0.5, 0.5}) == doctest::Approx(rho * 0.5).epsilon(1e-4));
  }
  ScalarField z(g, std::vector<double>(g.size(), 0.0));
  ScalarField rz = rescale(z, X0, 0.1);
  for (double v : rz.values()) CHECK(v == 0.0);

  CHECK_THROWS(rescale(quad, X0, 4.0 * g.h));
  CHECK_THROWS(rescale(quad, X0, 0.3));
}

TEST_CASE("half-plane fit recovers exact inputs") {
  GridSpec ref = reference_unit_grid();
  ScalarField exact(ref, [](Vec2 p) { return positive_part(p.y); });
  HalfplaneFit f = fit_halfplane(exact);
  CHECK(std::abs(f.nu.x) < 1e-9);
  CHECK(f.nu.y == doctest::Approx(1.0));
  CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(f.misfit_linf < 1e-10);
  CHECK(f.nu.norm() == doctest::Approx(1.0).epsilon(1e-12));

  const Vec2 nu30 = unit_from_angle(pi / 6.0);
  ScalarField tilted(ref, [&](Vec2 p) { return 4.0 * positive_part(p.dot(nu30)); });
  HalfplaneFit t = fit_halfplane(tilted);
  CHECK(std::atan2(t.nu.y, t.nu.x) == doctest::Approx(pi / 6.0).epsilon(1e-6));
  CHECK(t.slope == doctest::Approx(4.0).epsilon(1e-5));

  ScalarField zero(ref, std::vector<double>(ref.size(), 0.0));
  CHECK_THROWS(fit_halfplane(zero));
}

TEST_CASE("half-plane fit absorbs bounded noise") {
  GridSpec ref = reference_unit_grid();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  ScalarField noisy(ref, [&](Vec2 p) { return positive_part(p.y) + u(rng); });
  HalfplaneFit f = fit_halfplane(noisy);
  CHECK(f.misfit_linf <= 0.0101);
}

TEST_CASE("half-plane fit is rotation equivariant") {
  GridSpec ref = reference_unit_grid();
  const double base = 0.31;
  const double shift = 0.47;
  auto field_at = [&](double ang) {
    const Vec2 nu = unit_from_angle(ang);
    return ScalarField(ref, [&](Vec2 p) { return 2.0 * positive_part(p.dot(nu)); });
  };
  HalfplaneFit f1 = fit_halfplane(field_at(base));
  HalfplaneFit f2 = fit_halfplane(field_at(base + shift));
  const double a1 = std::atan2(f1.nu.y, f1.nu.x);
  const double a2 = std::atan2(f2.nu.y, f2.nu.x);
  CHECK(a2 - a1 == doctest::Approx(shift).epsilon(2e-6));
}

TEST_CASE("homogeneity deficit closed forms") {
  const Vec2 X0{1.0, -1.0};
  GridSpec g = GridSpec::centered_square(X0, 0.3, 513);
  ScalarField hp = half_plane_solution(X0, {0.0, 1.0}, g);
  CHECK(homogeneity_deficit(hp, X0, 0.1, 0.2) < 1e-3);

  // (grad q . d - q) = |d|^2 for q = |d|^2, so the integrand is 2/x.
  ScalarField quad(g, [&](Vec2 p) { return (p - X0).dot(p - X0); });
  auto inv_x = [](double x0, double r) {
    return 2 * pi * (x0 - std::sqrt(x0 * x0 - r * r));
  };
  const double exact = 2.0 * (inv_x(1.0, 0.2) - inv_x(1.0, 0.1));
  CHECK(homogeneity_deficit(quad, X0, 0.1, 0.2) == doctest::Approx(exact).epsilon(1e-3));

  CHECK_THROWS(homogeneity_deficit(hp, X0, g.h, 0.2));
  CHECK_THROWS(homogeneity_deficit(hp, X0, 0.2, 0.1));
}

TEST_CASE("blowup sequence of the exact half plane hits the misfit floor") {
  const Vec2 X0{1.0, -1.0};
  GridSpec g = GridSpec::centered_square(X0, 0.25, 513);
  ScalarField hp = half_plane_solution(X0, {0.0, 1.0}, g);
  BlowupSequence seq = blowup_sequence(hp, X0, 0.25);
  REQUIRE(seq.scales.size() >= 4);
  for (size_t n = 0; n < seq.scales.size(); ++n) {
    const auto& s = seq.scales[n];
    if (n) CHECK(s.rho < seq.scales[n - 1].rho);
    CHECK(s.rho >= 8.0 * g.h);
    CHECK(s.nu.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.slope == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.misfit_linf < 1e-10);
  }
  CHECK(seq.rate.at_floor);
}

TEST_CASE("quadratic perturbation gives a first-order rate") {
  const Vec2 X0{1.0, -1.0};
  GridSpec g = GridSpec::centered_square(X0, 0.25, 513);
  ScalarField psi(g, [&](Vec2 p) {
    return positive_part(p.y - X0.y) + 0.3 * (p - X0).dot(p - X0);
  });
  BlowupSequence seq = blowup_sequence(psi, X0, 0.25);
  CHECK(!seq.rate.at_floor);
  CHECK(seq.rate.gamma > 0.8);
  CHECK(seq.rate.gamma < 1.2);
  CHECK(seq.rate.r_squared >= 0.9);
  CHECK(seq.scales.back().slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("power-law misfits are fitted exactly") {
  BlowupSequence seq;
  for (double rho : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    BlowupScale s;
    s.rho = rho;
    s.misfit_linf = 0.3 * std::pow(rho, 0.7);
    seq.scales.push_back(s);
  }
  RateFit fit = convergence_rate(seq);
  CHECK(fit.gamma == doctest::Approx(0.7).epsilon(1e-8));
  CHECK(fit.C1 == doctest::Approx(0.3).epsilon(1e-8));
  CHECK(fit.r_squared == doctest::Approx(1.0));

  BlowupSequence few;
  for (double rho : {0.4, 0.2}) {
    BlowupScale s;
    s.rho = rho;
    s.misfit_linf = rho;
    few.scales.push_back(s);
  }
  CHECK_THROWS(convergence_rate(few));
}
