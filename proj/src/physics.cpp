#include "weissfb/physics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wfb {

VorticityModel VorticityModel::zero() { return {}; }

VorticityModel VorticityModel::constant(double F0, double beta) {
  if (F0 < 0.0) throw std::invalid_argument("VorticityModel: F0 must be >= 0");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("VorticityModel: beta in (0,1)");
  VorticityModel m;
  m.kind = VorticityKind::Constant;
  m.F0 = F0;
  m.beta = beta;
  return m;
}

VorticityModel VorticityModel::affine_clipped(double F0, double z_ref, double beta) {
  if (F0 < 0.0) throw std::invalid_argument("VorticityModel: F0 must be >= 0");
  if (!(z_ref > 0.0)) throw std::invalid_argument("VorticityModel: z_ref must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("VorticityModel: beta in (0,1)");
  VorticityModel m;
  m.kind = VorticityKind::AffineClipped;
  m.F0 = F0;
  m.z_ref = z_ref;
  m.beta = beta;
  return m;
}

double VorticityModel::f(double z) const {
  switch (kind) {
    case VorticityKind::Zero:
      return 0.0;
    case VorticityKind::Constant:
      return F0;
    case VorticityKind::AffineClipped:
      return std::clamp(F0 * (1.0 - z / z_ref), 0.0, F0);
  }
  return 0.0;
}

double VorticityModel::f_prime(double z) const {
  if (kind != VorticityKind::AffineClipped) return 0.0;
  return (z > 0.0 && z < z_ref) ? -F0 / z_ref : 0.0;
}

double VorticityModel::F(double z) const {
  switch (kind) {
    case VorticityKind::Zero:
      return 0.0;
    case VorticityKind::Constant:
      return F0 * z;
    case VorticityKind::AffineClipped:
      if (z <= 0.0) return F0 * z;  // f clamps to F0 on the left
      if (z >= z_ref) return F0 * z_ref / 2.0;
      return F0 * (z - z * z / (2.0 * z_ref));
  }
  return 0.0;
}

std::string VorticityModel::validate(double z_lo, double z_hi, int n_samples) const {
  const double dz = (z_hi - z_lo) / (n_samples - 1);
  for (int k = 0; k < n_samples; ++k) {
    const double z = z_lo + k * dz;
    if (z <= 0.0 && (f(z) < -1e-12 || f(z) > F0 + 1e-12))
      return "f out of [0, F0] for z <= 0";
    const double fp = f_prime(z);
    if (fp > 1e-12 || fp < -F0 - 1e-12) return "f' out of [-F0, 0]";
  }
  if (std::abs(F(0.0)) > 1e-15) return "F(0) != 0";
  // Concavity: F(q) - F(p) >= F'(q) (q - p) on sampled pairs.
  for (int k = 0; k < n_samples; ++k) {
    const double p = z_lo + k * dz;
    const double q = z_hi - k * dz;
    if (F(q) - F(p) < f(q) * (q - p) - 1e-12) return "F not concave";
  }
  return {};
}

double compute_R0(Vec2 X0) {
  if (!(X0.x > 0.0 && X0.y < 0.0))
    throw std::invalid_argument("compute_R0: need x0 > 0 and y0 < 0");
  return 0.5 * std::min(X0.x / 2.0, -X0.y / 2.0);
}

ScalarField half_plane_solution(Vec2 X0, Vec2 nu, const GridSpec& domain) {
  if (!(X0.x > 0.0 && X0.y < 0.0))
    throw std::invalid_argument("half_plane_solution: need x0 > 0 and y0 < 0");
  const Vec2 n = nu.normalized();
  const double slope = X0.x * std::sqrt(-X0.y);
  return ScalarField(domain, [&](Vec2 X) { return slope * positive_part((X - X0).dot(n)); });
}

double BoundaryData::eval(Vec2 X, Vec2 X0) const {
  const Vec2 n = nu0.normalized();
  const Vec2 tau = n.perp();
  const Vec2 d = X - X0;
  const double s = d.dot(n) - offset;
  const double t = d.dot(tau);
  return slope * positive_part(s + amplitude * std::sin(frequency * t));
}

ProblemSpec::ProblemSpec(Vec2 X0_, double R0_, VorticityModel vort, BoundaryData bd, int n)
    : X0(X0_), R0(R0_), vorticity(std::move(vort)), boundary(bd), grid_n(n) {
  const double r0_max = compute_R0(X0);
  if (!(R0 > 0.0 && R0 <= r0_max + 1e-12))
    throw std::invalid_argument("ProblemSpec: R0 must lie in (0, compute_R0(X0)]");
  if (grid_n < 9) throw std::invalid_argument("ProblemSpec: grid too coarse");
}

double ProblemSpec::slope() const { return X0.x * std::sqrt(-X0.y); }

GridSpec ProblemSpec::make_grid() const {
  return GridSpec::centered_square(X0, R0, grid_n);
}

}  // namespace wfb
