#ifndef WEISSFB_QUADRATURE_HPP
#define WEISSFB_QUADRATURE_HPP

#include <functional>

#include "weissfb/grid.hpp"

namespace wfb {

using Integrand = std::function<double(Vec2)>;

/// Integral of fn over the disk B_r(center). Midpoint rule on grid cells fully
/// inside the disk, 4x4 midpoint subsampling on cut cells. O(h) for indicator
/// integrands, O(h^2) for smooth ones.
double disk_integral(const GridSpec& grid, const Integrand& fn, Vec2 center, double r);

/// Integral over the annulus B_{r2}(center) \ B_{r1}(center), same scheme.
double annulus_integral(const GridSpec& grid, const Integrand& fn, Vec2 center,
                        double r1, double r2);

/// Trapezoid rule over equispaced angles on the circle of radius r.
double circle_integral(const GridSpec& grid, const Integrand& fn, Vec2 center, double r,
                       int n_samples = 512);

}  // namespace wfb

#endif
