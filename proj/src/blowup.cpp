#include "weissfb/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "weissfb/parallel.hpp"
#include "weissfb/quadrature.hpp"

namespace wfb {

GridSpec reference_unit_grid() {
  return GridSpec::reference(-1.0, -1.0, 2.0 / 256.0, 257, 257);
}

ScalarField rescale(const ScalarField& psi, Vec2 X0, double rho) {
  const GridSpec& src = psi.grid();
  if (rho < 8.0 * src.h)
    throw std::invalid_argument("rescale: scale below the 8h resolution floor");
  for (Vec2 c : {Vec2{X0.x - rho, X0.y - rho}, Vec2{X0.x + rho, X0.y + rho}})
    if (!src.contains(c))
      throw std::domain_error("rescale: sampling square leaves the grid hull");

  const GridSpec ref = reference_unit_grid();
  std::vector<double> vals(ref.size());
  for (int j = 0; j < ref.ny; ++j)
    for (int i = 0; i < ref.nx; ++i)
      vals[ref.index(i, j)] = psi.interpolate(X0 + ref.node(i, j) * rho) / rho;
  return ScalarField(ref, std::move(vals));
}

namespace {

struct BallSamples {
  std::vector<Vec2> pts;
  std::vector<double> vals;
};

BallSamples collect_ball(const ScalarField& ref, int stride) {
  const GridSpec& g = ref.grid();
  BallSamples s;
  for (int j = 0; j < g.ny; j += stride)
    for (int i = 0; i < g.nx; i += stride) {
      const Vec2 p = g.node(i, j);
      if (p.dot(p) <= 1.0) {
        s.pts.push_back(p);
        s.vals.push_back(ref.at(i, j));
      }
    }
  return s;
}

// Convex in a: max_i |v_i - a s_i| with s_i >= 0. The two envelopes
// max(v - a s) and max(a s - v) are monotone; bisect their crossing.
double best_slope(const BallSamples& s, Vec2 nu, double a_hi, double* misfit) {
  auto envelopes = [&](double a, double& up, double& dn) {
    up = -std::numeric_limits<double>::infinity();
    dn = up;
    for (size_t i = 0; i < s.pts.size(); ++i) {
      const double t = positive_part(s.pts[i].dot(nu));
      const double d = s.vals[i] - a * t;
      up = std::max(up, d);
      dn = std::max(dn, -d);
    }
  };
  double lo = 0.0, hi = std::max(a_hi, 1e-12);
  double up, dn;
  envelopes(lo, up, dn);
  if (up <= dn) {  // already dominated at a = 0
    *misfit = std::max(up, dn);
    return 0.0;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    envelopes(mid, up, dn);
    (up > dn ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  envelopes(a, up, dn);
  *misfit = std::max(up, dn);
  return a;
}

}  // namespace

HalfplaneFit fit_halfplane(const ScalarField& ref) {
  double vmax = 0.0;
  for (double v : ref.values()) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0)
    throw std::invalid_argument("fit_halfplane: zero field has no direction");
  const double a_hi = 4.0 * vmax;

  const BallSamples coarse = collect_ball(ref, 4);
  const BallSamples fine = collect_ball(ref, 1);

  double best_theta = 0.0, best_mis = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 360; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / 360.0;
    double mis;
    best_slope(coarse, unit_from_angle(theta), a_hi, &mis);
    if (mis < best_mis) {
      best_mis = mis;
      best_theta = theta;
    }
  }

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best_theta - 2.0 * std::numbers::pi / 360.0;
  double hi = best_theta + 2.0 * std::numbers::pi / 360.0;
  auto eval = [&](double theta) {
    double mis;
    best_slope(fine, unit_from_angle(theta), a_hi, &mis);
    return mis;
  };
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = eval(x1), f2 = eval(x2);
  while (hi - lo > 1e-6) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = eval(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = eval(x1);
    }
  }
  double theta = 0.5 * (lo + hi);
  // The scan angle itself can be exact (axis-aligned data); keep whichever of
  // the refined and scanned angles does better on the full sample set.
  if (eval(best_theta) <= eval(theta)) theta = best_theta;
  theta = std::fmod(theta, 2.0 * std::numbers::pi);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;

  HalfplaneFit fit;
  fit.nu = unit_from_angle(theta);
  fit.slope = best_slope(fine, fit.nu, a_hi, &fit.misfit_linf);
  return fit;
}

double homogeneity_deficit(const ScalarField& psi, Vec2 X0, double r1, double r2) {
  const double h = psi.grid().h;
  if (!(4.0 * h <= r1 && r1 < r2))
    throw std::invalid_argument("homogeneity_deficit: bad annulus radii");
  return annulus_integral(
      psi.grid(),
      [&](Vec2 X) {
        const Vec2 d = X - X0;
        const double r4 = std::pow(d.dot(d), 2);
        const double dev = psi.gradient(X).dot(d) - psi.interpolate(X);
        return 2.0 * dev * dev / (r4 * X.x);
      },
      X0, r1, r2);
}

void BlowupSequence::dump_csv(std::ostream& os) const {
  os << "rho,nu_x,nu_y,slope,misfit_Linf,misfit_L2,homog_deficit\n";
  os.precision(17);
  for (const auto& s : scales)
    os << s.rho << ',' << s.nu.x << ',' << s.nu.y << ',' << s.slope << ','
       << s.misfit_linf << ',' << s.misfit_l2 << ',' << s.homog_deficit << '\n';
}

void BlowupSequence::dump_csv_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  dump_csv(os);
}

BlowupSequence blowup_sequence(const ScalarField& psi, Vec2 X0, double R0) {
  const double h = psi.grid().h;
  std::vector<double> rhos;
  for (double r = R0 / 2.0; r >= 8.0 * h; r *= 0.5) rhos.push_back(r);
  if (rhos.empty())
    throw std::invalid_argument("blowup_sequence: R0/2 below the 8h floor");

  BlowupSequence seq;
  seq.X0 = X0;
  seq.scales.resize(rhos.size());
  const GridSpec ref = reference_unit_grid();
  parallel_for((int)rhos.size(), [&](int n) {
    BlowupScale sc;
    sc.rho = rhos[n];
    sc.field = rescale(psi, X0, sc.rho);
    const HalfplaneFit fit = fit_halfplane(sc.field);
    sc.nu = fit.nu;
    sc.slope = fit.slope;
    sc.misfit_linf = fit.misfit_linf;
    const double l2 = disk_integral(
        ref,
        [&](Vec2 X) {
          const double d = sc.field.interpolate(X) - sc.slope * positive_part(X.dot(sc.nu));
          return d * d;
        },
        {0.0, 0.0}, 1.0);
    sc.misfit_l2 = std::sqrt(l2 / std::numbers::pi);
    sc.homog_deficit = homogeneity_deficit(psi, X0, sc.rho / 2.0, sc.rho);
    seq.scales[n] = sc;
  });
  seq.rate = convergence_rate(seq);
  return seq;
}

RateFit convergence_rate(const BlowupSequence& seq) {
  constexpr double floor = 1e-10;
  std::vector<double> lr, le;
  for (const auto& s : seq.scales)
    if (s.misfit_linf > floor) {
      lr.push_back(std::log(s.rho));
      le.push_back(std::log(s.misfit_linf));
    }
  RateFit fit;
  if (lr.empty()) {
    fit.at_floor = true;
    return fit;
  }
  if (lr.size() < 4)
    throw std::invalid_argument("convergence_rate: fewer than 4 scales above the floor");
  const int n = (int)lr.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += lr[i];
    sy += le[i];
    sxx += lr[i] * lr[i];
    sxy += lr[i] * le[i];
  }
  const double det = n * sxx - sx * sx;
  fit.gamma = (n * sxy - sx * sy) / det;
  const double b = (sy - fit.gamma * sx) / n;
  fit.C1 = std::exp(b);
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (int i = 0; i < n; ++i) {
    const double pred = b + fit.gamma * lr[i];
    ss_res += (le[i] - pred) * (le[i] - pred);
    ss_tot += (le[i] - mean) * (le[i] - mean);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace wfb
