#ifndef WEISSFB_PHYSICS_HPP
#define WEISSFB_PHYSICS_HPP

#include <string>

#include "weissfb/grid.hpp"

namespace wfb {

enum class VorticityKind { Zero, Constant, AffineClipped };

/// Vorticity pair (f, F) with F the exact antiderivative of f, F(0) = 0.
/// The shipped kinds all satisfy 0 <= f <= F0 on (-inf, 0], f' in [-F0, 0],
/// and F concave.
struct VorticityModel {
  VorticityKind kind = VorticityKind::Zero;
  double F0 = 0.0;     // bound on f and -f'
  double beta = 0.5;   // Hoelder exponent of f', in (0,1)
  double z_ref = 1.0;  // affine-clipped: f(z) = clamp(F0 (1 - z/z_ref), 0, F0)

  static VorticityModel zero();
  static VorticityModel constant(double F0, double beta = 0.5);
  static VorticityModel affine_clipped(double F0, double z_ref, double beta = 0.5);

  double f(double z) const;
  double f_prime(double z) const;
  double F(double z) const;  // exact closed-form antiderivative

  /// Sampled assumption checks (10^4 points over [z_lo, z_hi]); returns an
  /// empty string if the model passes, otherwise the first violated condition.
  std::string validate(double z_lo = -2.0, double z_hi = 2.0, int n_samples = 10000) const;
};

/// R0 = (1/2) min(x0/2, -y0/2), keeping the closed ball clear of both axes.
double compute_R0(Vec2 X0);

/// One-phase half-plane profile x0 sqrt(-y0) ((X - X0) . nu)^+ sampled on the
/// grid (blow-up limit at a non-degenerate point).
ScalarField half_plane_solution(Vec2 X0, Vec2 nu, const GridSpec& domain);

/// Boundary trace descriptor: slope * ((X-X0).nu0 + amp sin(freq (X-X0).tau))^+
/// with tau = nu0 rotated by 90 degrees. amp = 0 reproduces the half-plane trace.
struct BoundaryData {
  Vec2 nu0{0.0, 1.0};
  double slope = 1.0;  // defaults to x0 sqrt(-y0) when built via ProblemSpec
  double amplitude = 0.0;
  double frequency = 0.0;
  double offset = 0.0;  // shift of the zero line along nu0

  double eval(Vec2 X, Vec2 X0) const;
};

struct ProblemSpec {
  Vec2 X0;
  double R0 = 0.0;  // must be <= compute_R0(X0)
  VorticityModel vorticity;
  BoundaryData boundary;
  int grid_n = 257;  // nodes per side of the hosting square [X0 +- R0]^2

  ProblemSpec() = default;
  ProblemSpec(Vec2 X0, double R0, VorticityModel vort, BoundaryData bd, int grid_n);

  double slope() const;  // x0 sqrt(-y0)
  GridSpec make_grid() const;
};

}  // namespace wfb

#endif
