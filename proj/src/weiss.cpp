#include "weissfb/weiss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "weissfb/parallel.hpp"
#include "weissfb/quadrature.hpp"

namespace wfb {

namespace {

inline double indicator(double v) { return v > 0.0 ? 1.0 : 0.0; }

void check_radius(const ScalarField& psi, double r) {
  if (r < 4.0 * psi.grid().h) throw std::invalid_argument("radius below 4h floor");
}

/// Ring integrands carry indicator jumps; the crossing-location error is one
/// arc step, so keep the step at a fixed fraction of h or the quadrature
/// floors the residuals at an h-independent level.
int ring_samples(const GridSpec& g, double r) {
  const double per_h = 8.0 * std::numbers::pi * r / g.h;
  return std::max(512, static_cast<int>(std::ceil(per_h)));
}

}  // namespace

double compute_D1(const ScalarField& psi, Vec2 X0, double r, const VorticityModel& vort) {
  check_radius(psi, r);
  return disk_integral(
      psi.grid(),
      [&](Vec2 X) {
        const Vec2 g = psi.gradient(X);
        const double v = psi.interpolate(X);
        return g.dot(g) / X.x - X.x * X.y * indicator(v) - X.x * v * vort.f(v);
      },
      X0, r);
}

double compute_D2(const ScalarField& psi, Vec2 X0, double r) {
  check_radius(psi, r);
  return circle_integral(
      psi.grid(),
      [&](Vec2 X) {
        const double v = psi.interpolate(X);
        return v * v / X.x;
      },
      X0, r, ring_samples(psi.grid(), r));
}

double compute_weiss(const ScalarField& psi, Vec2 X0, double r, const VorticityModel& vort) {
  return compute_D1(psi, X0, r, vort) / (r * r) - compute_D2(psi, X0, r) / (r * r * r);
}

double compute_J0(const ScalarField& psi, Vec2 X0, double r) {
  check_radius(psi, r);
  return disk_integral(
      psi.grid(),
      [&](Vec2 X) {
        const Vec2 g = psi.gradient(X);
        const double v = psi.interpolate(X);
        return (X.x - X0.x) / (X.x * X.x) * g.dot(g) +
               ((X.x - X0.x) * X.y + (X.y - X0.y) * X.x) * indicator(v);
      },
      X0, r);
}

double compute_K1(const ScalarField& psi, Vec2 X0, double r, const VorticityModel& vort) {
  check_radius(psi, r);
  if (vort.kind == VorticityKind::Zero) return 0.0;
  const double vol = disk_integral(
      psi.grid(),
      [&](Vec2 X) {
        const double Fv = vort.F(psi.interpolate(X));
        return 2.0 * Fv * (X.x - X0.x) + 4.0 * X.x * Fv;
      },
      X0, r);
  const double ring = circle_integral(
      psi.grid(),
      [&](Vec2 X) {
        const double v = psi.interpolate(X);
        return 2.0 * X.x * vort.F(v) - X.x * v * vort.f(v);
      },
      X0, r, ring_samples(psi.grid(), r));
  return vol - r * ring;
}

double weiss_derivative_rhs(const ScalarField& psi, Vec2 X0, double r,
                            const VorticityModel& vort) {
  check_radius(psi, r);
  const double square = circle_integral(
      psi.grid(),
      [&](Vec2 X) {
        const Vec2 nu = (X - X0) / r;
        const double d = psi.gradient(X).dot(nu) - psi.interpolate(X) / r;
        return d * d / X.x;
      },
      X0, r, ring_samples(psi.grid(), r));
  const double ring2 = circle_integral(
      psi.grid(),
      [&](Vec2 X) {
        const double v = psi.interpolate(X);
        return (X.x - X0.x) / (X.x * X.x) * v * v;
      },
      X0, r, ring_samples(psi.grid(), r));
  return 2.0 / (r * r) * square + ring2 / (r * r * r * r) -
         compute_J0(psi, X0, r) / (r * r * r) - compute_K1(psi, X0, r, vort) / (r * r * r);
}

double monotonicity_residual(const ScalarField& psi, Vec2 X0, double r, double dr,
                             const VorticityModel& vort) {
  if (dr <= 0.0) throw std::invalid_argument("monotonicity_residual: dr must be positive");
  const double lhs =
      (compute_weiss(psi, X0, r + dr, vort) - compute_weiss(psi, X0, r - dr, vort)) /
      (2.0 * dr);
  return std::abs(lhs - weiss_derivative_rhs(psi, X0, r, vort));
}

double pohozaev_residual(const ScalarField& psi, Vec2 X0, double r,
                         const VorticityModel& vort) {
  check_radius(psi, r);
  const GridSpec& g = psi.grid();
  auto vol = [&](const Integrand& fn) { return disk_integral(g, fn, X0, r); };
  auto ring = [&](const Integrand& fn) { return circle_integral(g, fn, X0, r, ring_samples(psi.grid(), r)); };

  const double lhs =
      vol([&](Vec2 X) { return 2.0 * X.x * X.y * indicator(psi.interpolate(X)); }) -
      r * ring([&](Vec2 X) { return X.x * X.y * indicator(psi.interpolate(X)); });

  const double rhs =
      -r * ring([&](Vec2 X) {
        const Vec2 gr = psi.gradient(X);
        return gr.dot(gr) / X.x;
      }) -
      vol([&](Vec2 X) {
        const Vec2 gr = psi.gradient(X);
        return (X.x - X0.x) / (X.x * X.x) * gr.dot(gr);
      }) +
      r * ring([&](Vec2 X) {
        const Vec2 nu = (X - X0) / r;
        const double gn = psi.gradient(X).dot(nu);
        return 2.0 / X.x * gn * gn;
      }) -
      vol([&](Vec2 X) {
        const double Fv = vort.F(psi.interpolate(X));
        return 2.0 * Fv * (X.x - X0.x) + 4.0 * X.x * Fv;
      }) +
      r * ring([&](Vec2 X) { return 2.0 * X.x * vort.F(psi.interpolate(X)); }) -
      vol([&](Vec2 X) {
        return (X.y * (X.x - X0.x) + X.x * (X.y - X0.y)) * indicator(psi.interpolate(X));
      });

  return std::abs(lhs - rhs);
}

VectorField make_bump_vector_field(Vec2 center, double rho, Vec2 amplitude) {
  if (rho <= 0.0) throw std::invalid_argument("bump field: rho must be positive");
  VectorField eta;
  eta.support_center = center;
  eta.support_radius = rho;
  eta.value = [=](Vec2 X) {
    const double s = (X - center).dot(X - center) / (rho * rho);
    if (s >= 1.0) return Vec2{0.0, 0.0};
    const double w = (1.0 - s) * (1.0 - s) * (1.0 - s) * (1.0 - s);
    return amplitude * w;
  };
  eta.jacobian = [=](Vec2 X, double J[2][2]) {
    const Vec2 d = X - center;
    const double s = d.dot(d) / (rho * rho);
    if (s >= 1.0) {
      J[0][0] = J[0][1] = J[1][0] = J[1][1] = 0.0;
      return;
    }
    const double c = (1.0 - s) * (1.0 - s) * (1.0 - s);
    const Vec2 gw = d * (-8.0 * c / (rho * rho));
    J[0][0] = amplitude.x * gw.x;
    J[0][1] = amplitude.x * gw.y;
    J[1][0] = amplitude.y * gw.x;
    J[1][1] = amplitude.y * gw.y;
  };
  return eta;
}

double domain_variation_residual(const ScalarField& psi, Vec2 X0, double R0,
                                 const VorticityModel& vort, const VectorField& eta) {
  if (eta.support_radius > 0.0 &&
      (eta.support_center - X0).norm() + eta.support_radius > R0 + 1e-12)
    throw std::invalid_argument("domain variation: eta support leaves the ball");
  double r_int = R0;
  if (eta.support_radius > 0.0)
    r_int = std::min(R0, (eta.support_center - X0).norm() + eta.support_radius);
  r_int = std::max(r_int, 4.0 * psi.grid().h);

  const double total = disk_integral(
      psi.grid(),
      [&](Vec2 X) {
        const Vec2 e = eta.value(X);
        double J[2][2];
        eta.jacobian(X, J);
        const Vec2 g = psi.gradient(X);
        const double v = psi.interpolate(X);
        const double ind = indicator(v);
        const double gg = g.dot(g);
        const double div_eta = J[0][0] + J[1][1];
        const double quad = g.x * (J[0][0] * g.x + J[0][1] * g.y) +
                            g.y * (J[1][0] * g.x + J[1][1] * g.y);
        return (gg / X.x - 2.0 * X.x * vort.F(v) - X.x * X.y * ind) * div_eta -
               (2.0 / X.x) * quad +
               (-gg / (X.x * X.x) - 2.0 * vort.F(v) - X.y * ind) * e.x - X.x * ind * e.y;
      },
      X0, r_int);
  return std::abs(total);
}

double density(const ScalarField& psi, Vec2 X0, double r) {
  check_radius(psi, r);
  const double area = disk_integral(
      psi.grid(), [&](Vec2 X) { return indicator(psi.interpolate(X)); }, X0, r);
  // Normalizing by the quadrature measure of the ball (same cell decomposition)
  // cancels the shared cut-cell error; the exact denominator would be pi r^2.
  const double ball = disk_integral(psi.grid(), [](Vec2) { return 1.0; }, X0, r);
  return area / ball;
}

void WeissReport::dump_csv(std::ostream& os) const {
  os << "r,D1,D2,D,J0,K1,density,dD_lhs,dD_rhs,residual\n";
  os.precision(17);
  for (const auto& w : rows) {
    os << w.r << ',' << w.D1 << ',' << w.D2 << ',' << w.D << ',' << w.J0 << ',' << w.K1
       << ',' << w.density << ',' << w.dD_lhs << ',' << w.dD_rhs << ',' << w.residual
       << '\n';
  }
}

void WeissReport::dump_csv_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  dump_csv(os);
}

WeissReport weiss_report(const ScalarField& psi, Vec2 X0, double R0,
                         const VorticityModel& vort, double dr_factor) {
  const double h = psi.grid().h;
  std::vector<double> radii;
  for (double r = R0 / 2.0; r >= 4.0 * h; r *= 0.5) radii.push_back(r);
  std::reverse(radii.begin(), radii.end());
  if (radii.empty()) throw std::invalid_argument("weiss_report: R0/2 below the 4h floor");

  WeissReport rep;
  rep.rows.resize(radii.size());
  parallel_for((int)radii.size(), [&](int k) {
    const double r = radii[k];
    WeissRow w{};
    w.r = r;
    w.D1 = compute_D1(psi, X0, r, vort);
    w.D2 = compute_D2(psi, X0, r);
    w.D = w.D1 / (r * r) - w.D2 / (r * r * r);
    w.J0 = compute_J0(psi, X0, r);
    w.K1 = compute_K1(psi, X0, r, vort);
    w.density = density(psi, X0, r);
    w.dD_rhs = weiss_derivative_rhs(psi, X0, r, vort);
    double dr = std::min({dr_factor * r, r - 4.0 * h, R0 - r});
    if (dr >= h / 4.0) {
      w.dD_lhs = (compute_weiss(psi, X0, r + dr, vort) -
                  compute_weiss(psi, X0, r - dr, vort)) /
                 (2.0 * dr);
    } else {
      // Smallest radius sits at the quadrature floor; fall back to a forward
      // difference.
      dr = std::min(dr_factor * r, (R0 - r) / 2.0);
      w.dD_lhs =
          (compute_weiss(psi, X0, r + 2.0 * dr, vort) - compute_weiss(psi, X0, r, vort)) /
          (2.0 * dr);
    }
    w.residual = std::abs(w.dD_lhs - w.dD_rhs);
    rep.rows[k] = w;
  });
  return rep;
}

namespace {

// Least-squares line y = b + m r; returns intercept and rms residual.
std::pair<double, double> line_intercept(const std::vector<double>& r,
                                         const std::vector<double>& y) {
  const int n = (int)r.size();
  double sr = 0, sy = 0, srr = 0, sry = 0;
  for (int i = 0; i < n; ++i) {
    sr += r[i];
    sy += y[i];
    srr += r[i] * r[i];
    sry += r[i] * y[i];
  }
  const double det = n * srr - sr * sr;
  const double m = (n * sry - sr * sy) / det;
  const double b = (sy - m * sr) / n;
  double rss = 0;
  for (int i = 0; i < n; ++i) {
    const double e = y[i] - (b + m * r[i]);
    rss += e * e;
  }
  return {b, std::sqrt(rss / n)};
}

}  // namespace

LimitEstimate estimate_limit(const WeissReport& report) {
  if (report.rows.size() < 5)
    throw std::invalid_argument("estimate_limit: need at least 5 radii");
  std::vector<double> r, D, dens;
  for (const auto& w : report.rows) {
    r.push_back(w.r);
    D.push_back(w.D);
    dens.push_back(w.density);
  }
  LimitEstimate est;
  auto [d0, drms] = line_intercept(r, D);
  auto [g0, grms] = line_intercept(r, dens);
  est.D0 = d0;
  est.D_fit_rms = drms;
  est.density0 = g0;
  est.density_fit_rms = grms;
  return est;
}

}  // namespace wfb
