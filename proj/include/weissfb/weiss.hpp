#ifndef WEISSFB_WEISS_HPP
#define WEISSFB_WEISS_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "weissfb/physics.hpp"

namespace wfb {

/// Volume part of the adjusted energy over B_r(X0):
///   (1/x)|grad psi|^2 - x y I_{psi>0} - x psi f(psi).
double compute_D1(const ScalarField& psi, Vec2 X0, double r, const VorticityModel& vort);

/// Boundary part: integral of psi^2 / x over the circle of radius r.
double compute_D2(const ScalarField& psi, Vec2 X0, double r);

/// D(r) = r^-2 D1(r) - r^-3 D2(r).
double compute_weiss(const ScalarField& psi, Vec2 X0, double r, const VorticityModel& vort);

/// Drift term of the derivative identity:
///   (x-x0)/x^2 |grad psi|^2 + ((x-x0) y + (y-y0) x) I_{psi>0} over B_r(X0).
double compute_J0(const ScalarField& psi, Vec2 X0, double r);

/// Vorticity term: volume integral of 2F(psi)(x-x0) + 4xF(psi) minus
/// r times the circle integral of 2xF(psi) - x psi f(psi).
double compute_K1(const ScalarField& psi, Vec2 X0, double r, const VorticityModel& vort);

/// Right-hand side of the derivative identity for D at radius r.
double weiss_derivative_rhs(const ScalarField& psi, Vec2 X0, double r,
                            const VorticityModel& vort);

/// |centered difference of D over [r-dr, r+dr] minus the identity RHS at r|.
double monotonicity_residual(const ScalarField& psi, Vec2 X0, double r, double dr,
                             const VorticityModel& vort);

/// |LHS - RHS| of the Pohozaev-type identity at radius r (eight integrals).
double pohozaev_residual(const ScalarField& psi, Vec2 X0, double r,
                         const VorticityModel& vort);

/// Smooth test vector field with an exact Jacobian, rows d eta_i / d x_j.
struct VectorField {
  std::function<Vec2(Vec2)> value;
  std::function<void(Vec2, double J[2][2])> jacobian;
  Vec2 support_center;
  double support_radius = 0.0;
};

/// (1-|X-c|^2/rho^2)^4 bump times the constant amplitude, zero outside.
VectorField make_bump_vector_field(Vec2 center, double rho, Vec2 amplitude);

/// Absolute value of the first domain variation of the functional along eta.
/// eta must be supported inside B_R0(X0).
double domain_variation_residual(const ScalarField& psi, Vec2 X0, double R0,
                                 const VorticityModel& vort, const VectorField& eta);

/// |{psi > 0} cap B_r(X0)| / (pi r^2).
double density(const ScalarField& psi, Vec2 X0, double r);

struct WeissRow {
  double r, D1, D2, D, J0, K1, density, dD_lhs, dD_rhs, residual;
};

struct WeissReport {
  std::vector<WeissRow> rows;  // increasing radius

  void dump_csv(std::ostream& os) const;
  void dump_csv_file(const std::string& path) const;
};

/// Evaluates the full per-radius record on the geometric schedule
/// r_k = R0/2 * 2^-k down to the 4h floor. dr_factor sets the centered
/// difference half-width dr = dr_factor * r (clipped to keep the stencil
/// inside [4h, R0]).
WeissReport weiss_report(const ScalarField& psi, Vec2 X0, double R0,
                         const VorticityModel& vort, double dr_factor = 0.125);

struct LimitEstimate {
  double D0 = 0.0;       // linear-in-r extrapolation of D to r = 0
  double density0 = 0.0; // same for the density
  double D_fit_rms = 0.0;
  double density_fit_rms = 0.0;
};

/// Least-squares line fits in r; needs at least 5 radii.
LimitEstimate estimate_limit(const WeissReport& report);

}  // namespace wfb

#endif
