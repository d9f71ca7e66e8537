#include "weissfb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wfb {

namespace {

// Shared machinery: integrate fn over {p : r1 <= |p-center| <= r2} (r1 = 0
// gives the disk). Cells whose corners all satisfy the membership test with
// margin are handled by one midpoint; cells touching either circle are
// subsampled 4x4.
double region_integral(const GridSpec& grid, const Integrand& fn, Vec2 center,
                       double r1, double r2) {
  if (!(r2 > r1 && r1 >= 0.0)) throw std::invalid_argument("region_integral: bad radii");
  const Vec2 lo{center.x - r2, center.y - r2};
  const Vec2 hi{center.x + r2, center.y + r2};
  if (lo.x < grid.x_min || lo.y < grid.y_min || hi.x > grid.x_max() || hi.y > grid.y_max())
    throw std::domain_error("region_integral: ball escapes grid hull");

  const double h = grid.h;
  const int i0 = std::max(0, static_cast<int>(std::floor((lo.x - grid.x_min) / h)));
  const int j0 = std::max(0, static_cast<int>(std::floor((lo.y - grid.y_min) / h)));
  const int i1 = std::min(grid.nx - 2, static_cast<int>(std::ceil((hi.x - grid.x_min) / h)));
  const int j1 = std::min(grid.ny - 2, static_cast<int>(std::ceil((hi.y - grid.y_min) / h)));

  auto inside = [&](Vec2 p) {
    const double d = (p - center).norm();
    return d >= r1 && d <= r2;
  };

  double total = 0.0;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 a = grid.node(i, j);
      const Vec2 cc{a.x + h / 2, a.y + h / 2};
      // Quick reject: cell entirely outside the outer circle or inside the inner.
      const double dcc = (cc - center).norm();
      const double half_diag = h * std::numbers::sqrt2 / 2;
      if (dcc - half_diag > r2 || (r1 > 0.0 && dcc + half_diag < r1)) continue;
      if (dcc + half_diag <= r2 && (r1 == 0.0 || dcc - half_diag >= r1)) {
        total += h * h * fn(cc);
        continue;
      }
      // Cut cell: 4x4 midpoint subsampling.
      const double q = h / 4;
      for (int sj = 0; sj < 4; ++sj)
        for (int si = 0; si < 4; ++si) {
          const Vec2 p{a.x + (si + 0.5) * q, a.y + (sj + 0.5) * q};
          if (inside(p)) total += q * q * fn(p);
        }
    }
  }
  return total;
}

}  // namespace

double disk_integral(const GridSpec& grid, const Integrand& fn, Vec2 center, double r) {
  if (r < 4 * grid.h) throw std::invalid_argument("disk_integral: r below resolution floor 4h");
  return region_integral(grid, fn, center, 0.0, r);
}

double annulus_integral(const GridSpec& grid, const Integrand& fn, Vec2 center,
                        double r1, double r2) {
  if (!(r1 > 0.0 && r2 > r1)) throw std::invalid_argument("annulus_integral: need 0 < r1 < r2");
  return region_integral(grid, fn, center, r1, r2);
}

double circle_integral(const GridSpec& grid, const Integrand& fn, Vec2 center, double r,
                       int n_samples) {
  if (n_samples < 64) throw std::invalid_argument("circle_integral: need n_samples >= 64");
  if (center.x - r < grid.x_min || center.x + r > grid.x_max() || center.y - r < grid.y_min ||
      center.y + r > grid.y_max())
    throw std::domain_error("circle_integral: circle escapes grid hull");
  double sum = 0.0;
  const double dtheta = 2 * std::numbers::pi / n_samples;
  for (int k = 0; k < n_samples; ++k) {
    const double theta = k * dtheta;
    sum += fn({center.x + r * std::cos(theta), center.y + r * std::sin(theta)});
  }
  return sum * r * dtheta;
}

}  // namespace wfb
