#ifndef WEISSFB_MINIMIZE_HPP
#define WEISSFB_MINIMIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "weissfb/physics.hpp"

namespace wfb {

/// Free/fixed node partition. Fixed nodes carry Dirichlet values (the trace).
struct NodeMask {
  GridSpec grid;
  std::vector<std::uint8_t> free;

  bool is_free(int i, int j) const { return free[grid.index(i, j)] != 0; }
  int count_free() const;

  /// Free nodes strictly inside B_R(center).
  static NodeMask disk(const GridSpec& grid, Vec2 center, double R);
  /// All non-edge nodes free.
  static NodeMask interior(const GridSpec& grid);
};

struct SolverConfig {
  std::vector<double> deltas;  // indicator smoothing widths, strictly decreasing
  int max_outer = 400;         // sweep cap per delta stage
  double sweep_tol = 1e-10;    // max nodal update, relative to delta scale
  int pattern_iterations = 8;  // sharp positivity-pattern solves at the end
  bool pattern_accel = true;

  /// Default delta schedule {8h, 4h, 2h, h, h/2} scaled by the slope q.
  static SolverConfig standard(double h, double slope_scale);
};

struct MinimizeResult {
  ScalarField field;
  bool converged = false;
  int sweeps_total = 0;
  double energy = 0.0;  // sharp discrete energy over the masked region
  std::vector<double> energy_history;
  std::vector<double> residual_history;
  std::string message;
};

/// Discrete energy: face Dirichlet terms (1/x at face midpoints) over faces
/// touching a free node, plus h^2 (-2 x F(psi) - x y I(psi)) over free nodes.
/// delta > 0 smooths the indicator to min(psi^+/delta, 1).
double discrete_energy(const ScalarField& psi, const NodeMask& mask,
                       const VorticityModel& vort, double delta = 0.0);

/// Quadrature value of J over B_R0(X0): (1/x)|grad psi|^2 - 2 x F(psi)
/// - x y I_{psi>0}, indicator by interpolated sign in cut cells.
double evaluate_J(const ScalarField& psi, Vec2 X0, double R0, const VorticityModel& vort);

/// Solves div((1/x) grad phi) = -x f(phi) on the free nodes with the trace
/// prescribed by `trace` on fixed nodes. Damped fixed point on the f term
/// around sparse Cholesky solves; residual <= 1e-10 in max norm.
ScalarField solve_dirichlet(const ScalarField& trace, const NodeMask& mask,
                            const VorticityModel& vort);

/// Projected nonlinear Gauss-Seidel descent on the smoothed functional with
/// indicator continuation, then sharp pattern solves. Boundary trace of
/// psi_init is preserved; output is nonnegative on free nodes.
MinimizeResult minimize(const ScalarField& psi_init, const NodeMask& mask,
                        const VorticityModel& vort, const SolverConfig& config);

/// Convenience: build grid + disk mask + trace from spec, initialize with the
/// clipped Dirichlet solve, and minimize.
MinimizeResult minimize_problem(const ProblemSpec& spec, const SolverConfig& config);
MinimizeResult minimize_problem(const ProblemSpec& spec);

/// Tests J(psi) <= J(psi + perturbation) + tol for n seeded random admissible
/// perturbations (same trace, nonnegative). Returns the worst energy gap
/// J(psi) - J(competitor) (<= tol means pass).
double competitor_gap(const ScalarField& psi, const NodeMask& mask,
                      const VorticityModel& vort, int n, std::uint64_t seed);

struct OracleSmallResult {
  ScalarField field;
  std::vector<std::uint8_t> pattern;  // positivity over free nodes, grid-indexed
  double energy = 0.0;
};

/// Exhaustive ground truth for small instances: enumerates every positivity
/// pattern over the free nodes (<= 25), solves the elliptic system on each
/// positive set with psi = 0 elsewhere, and returns the energy minimizer.
OracleSmallResult oracle_small(const ScalarField& trace, const NodeMask& mask,
                               const VorticityModel& vort);

struct Oracle1DResult {
  double fb_location = 0.0;  // s = a / Q
  double energy = 0.0;       // 2 a Q
  bool touches_far_end = false;
  double profile(double t) const;  // (a - Q t)^+

  double a = 0.0;
  double Q = 0.0;
};

/// Exact 1D one-phase minimizer u(t) = (a - Q t)^+ on [0, L].
Oracle1DResult oracle_1d(double a, double Q, double L);

}  // namespace wfb

#endif
