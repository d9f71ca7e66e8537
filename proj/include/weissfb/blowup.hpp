#ifndef WEISSFB_BLOWUP_HPP
#define WEISSFB_BLOWUP_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "weissfb/grid.hpp"

namespace wfb {

/// Fixed 257x257 reference grid over [-1,1]^2 hosting the unit ball.
GridSpec reference_unit_grid();

/// psi(X0 + rho X) / rho resampled onto the reference grid. Requires
/// rho >= 8h and the square X0 +- rho inside the hull.
ScalarField rescale(const ScalarField& psi, Vec2 X0, double rho);

struct HalfplaneFit {
  Vec2 nu{0.0, 1.0};
  double slope = 0.0;
  double misfit_linf = 0.0;
};

/// Best sup-norm fit of a (X . nu)^+ over the unit ball of the reference
/// grid: 360-point direction scan, golden-section refinement to 1e-6 rad,
/// exact convex line search in the slope. Ties break toward the smaller
/// angle in [0, 2pi).
HalfplaneFit fit_halfplane(const ScalarField& ref);

/// Annulus integral of 2 |X-X0|^-4 (1/x) (grad psi . (X-X0) - psi)^2,
/// zero exactly when psi is 1-homogeneous about X0 there.
double homogeneity_deficit(const ScalarField& psi, Vec2 X0, double r1, double r2);

struct BlowupScale {
  double rho = 0.0;
  ScalarField field;  // on the reference grid
  Vec2 nu{0.0, 1.0};
  double slope = 0.0;
  double misfit_linf = 0.0;
  double misfit_l2 = 0.0;
  double homog_deficit = 0.0;
};

struct RateFit {
  double gamma = 0.0;
  double C1 = 0.0;
  double r_squared = 0.0;
  bool at_floor = false;  // every misfit at the numerical floor (exact limit)
};

struct BlowupSequence {
  Vec2 X0;
  std::vector<BlowupScale> scales;  // strictly decreasing rho
  RateFit rate;

  void dump_csv(std::ostream& os) const;
  void dump_csv_file(const std::string& path) const;
};

/// Geometric schedule rho_n = R0/2 * 2^-n down to the 8h floor, each scale
/// rescaled, fitted, and measured.
BlowupSequence blowup_sequence(const ScalarField& psi, Vec2 X0, double R0);

/// Log-log least squares of misfit against scale, skipping misfits at the
/// 1e-10 floor; needs >= 4 usable scales unless everything is at the floor.
RateFit convergence_rate(const BlowupSequence& seq);

}  // namespace wfb

#endif
