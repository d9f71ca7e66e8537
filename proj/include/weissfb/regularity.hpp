#ifndef WEISSFB_REGULARITY_HPP
#define WEISSFB_REGULARITY_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "weissfb/boundary.hpp"
#include "weissfb/physics.hpp"

namespace wfb {

/// Free boundary problem a_ij D_ij u + b . grad u = f_rhs in {u>0},
/// |grad u| = Q on the free boundary, with ellipticity window [lam, Lam].
struct GeneralFBP {
  std::function<double(Vec2)> a11, a12, a22;
  std::function<double(Vec2)> b1, b2;
  std::function<double(Vec2)> f_rhs;
  std::function<double(Vec2)> Q;
  double lam = 1.0;
  double Lam = 1.0;
  double beta = 1.0;  // Hoelder exponent of the coefficients

  /// Constant-coefficient Laplacian with zero drift and constant Q.
  static GeneralFBP frozen(double Q0);
  /// Expansion of div((1/x) grad psi) = -x f(psi):
  ///   Delta psi - (1/x) d psi/dx = -x^2 f(psi),  Q = x sqrt(-y).
  static GeneralFBP axisymmetric(const ScalarField& psi, const VorticityModel& vort);

  /// Sampled ellipticity / positivity audit; empty string on pass.
  std::string validate(const GridSpec& domain, int n_samples = 200) const;
};

struct FlatnessCertificate {
  Vec2 center;
  double radius = 0.0;
  Vec2 nu{0.0, 1.0};
  double eps = 0.0;
  bool pass = false;
  double margin = 0.0;  // worst signed violation, <= 0 when passing
};

/// Verifies (X'.nu - eps)^+ <= u/(R*slope) <= (X'.nu + eps)^+ at grid nodes
/// of B_R(center), X' = (X-center)/R.
FlatnessCertificate check_flatness(const ScalarField& u, Vec2 center, double R, Vec2 nu,
                                   double eps, double slope = 1.0);

/// Smallest eps making check_flatness pass for this direction.
double minimal_flatness(const ScalarField& u, Vec2 center, double R, Vec2 nu,
                        double slope = 1.0);

struct ViscositySample {
  Vec2 X;
  bool on_boundary = false;
  double residual = 0.0;  // interior: PDE residual; boundary: |grad| - Q
};

struct ViscosityReport {
  std::vector<ViscositySample> samples;
  double max_interior_residual = 0.0;
  double max_boundary_deviation = 0.0;
  int n_interior = 0;
  int n_boundary = 0;
};

/// Interior samples: |a_ij D_ij u + b . grad u - f_rhs| via interpolant second
/// differences. Boundary samples: one-sided |grad u| from the positive phase
/// against Q. Throws if the sample set is empty.
ViscosityReport viscosity_check(const ScalarField& u, const GeneralFBP& problem,
                                const std::vector<Vec2>& interior,
                                const std::vector<BoundarySegment>& boundary);

/// Convenience sampler: interior positive nodes at distance > 4h from the free
/// boundary plus the extracted boundary segments.
ViscosityReport viscosity_check_auto(const ScalarField& u, const GeneralFBP& problem);

/// max over interior nodes of |grad psi| / (x sqrt(-y)).
double lipschitz_ratio(const ScalarField& psi);

struct RegularityConfig {
  double kappa = 0.5;
  double c_star_kappa = 0.1;   // vanishing threshold multiplier
  double C_star = 1.0;         // growth threshold multiplier
  double harnack_ratio = 0.05; // inner/outer ball ratio 1/20
  double c = 0.05;             // Harnack gap decay
  double eps_bar = 0.05;       // flatness entry threshold
  double C0 = 8.0;             // direction drift bound per step
  double eps0 = 0.05;          // iteration seed flatness
  double r0 = 0.25;            // base scale bound
  double r_bar = 0.25;         // iteration scale, <= min(r0, (1/4)^(1/beta))
  double F0 = 0.0;             // vorticity bound used in probe guards

  std::string validate() const;  // empty on pass
  void dump_json_file(const std::string& path) const;
  static RegularityConfig load_json_file(const std::string& path);
};

struct ProbeVerdict {
  bool triggered = false;
  bool consistent = true;  // vacuously true when not triggered
  double statistic = 0.0;
  double threshold = 0.0;
  double worst_violation = 0.0;
  Vec2 worst_point;
};

/// Vanishing probe: if (1/r) sqrt(avg_{B_r(X)} psi^2) < c*_kappa x sqrt(-y-kappa r),
/// psi must vanish on B_{kappa r}(X).
ProbeVerdict nondegeneracy_probe(const ScalarField& psi, Vec2 X, double r,
                                 const RegularityConfig& cfg);

/// Growth probe: if the scaled circle average (1/r) avg_{dB_r(X)} psi exceeds
/// C* x sqrt(-y), psi must be positive throughout B_r(X).
ProbeVerdict growth_probe(const ScalarField& psi, Vec2 X, double r,
                          const RegularityConfig& cfg);

struct HarnackResult {
  bool refused = false;
  std::string refusal;
  double a1 = 0.0;
  double b1 = 0.0;
  bool pass = false;
};

/// Tightest (a1, b1) with (y+a1)^+ <= u <= (y+b1)^+ on B_{r/20}(X1), given the
/// certified bounds (a0, b0) on B_r(X1). pass iff b1-a1 <= (1-c)(b0-a0).
HarnackResult partial_harnack_check(const ScalarField& u, const GeneralFBP& problem,
                                    Vec2 X1, double r, double a0, double b0,
                                    const RegularityConfig& cfg);

struct ImprovementResult {
  bool refused = false;
  std::string refusal;
  Vec2 nu_prime{0.0, 1.0};
  bool pass = false;
  double margin = 0.0;
};

/// One improvement step: from certified eps-flatness in direction nu on
/// B_R(center), searches |nu' - nu| <= C0 eps for (eps/2)-flatness on
/// B_{rR}(center) (normalized scaling per step).
ImprovementResult improvement_of_flatness_step(const ScalarField& u, Vec2 center,
                                               double R, double r, Vec2 nu, double eps,
                                               double slope,
                                               const RegularityConfig& cfg);

struct FlatnessLevel {
  int k = 0;
  double scale = 0.0;  // absolute radius R * r_bar^k
  Vec2 nu;
  double eps = 0.0;
  bool pass = false;
  double margin = 0.0;
};

struct FlatnessSchedule {
  std::vector<FlatnessLevel> levels;
  bool completed = false;  // reached the resolution floor without a failure
  std::string message;

  void dump_csv(std::ostream& os) const;
  void dump_csv_file(const std::string& path) const;
};

/// Iterates improvement steps at scales R r_bar^k with eps_k = 2^-k eps_bar
/// until 16h stops it or a step fails. Verifies the direction drift bound
/// |nu_k - nu_{k-1}| <= C0 eps_{k-1}.
FlatnessSchedule flatness_iteration(const ScalarField& u, Vec2 center, double R, Vec2 nu0,
                                    double slope, const RegularityConfig& cfg);

struct HolderFit {
  double C = 0.0;
  double gamma_target = 0.0;   // log(1-c)/log(1/20) from the calibrated c
  double gamma_hat = 0.0;      // empirical log-log slope
  bool super_holder = false;   // gamma_hat >= 1
};

/// Rescaled oscillation (u - (X-X1).nu slope... ) measured as
/// u_tilde = (u/slope - y)/eps on {u>0} about X1; smallest C for the target
/// exponent plus the empirical exponent.
HolderFit holder_modulus(const ScalarField& u, Vec2 X1, double eps, double slope,
                         const RegularityConfig& cfg);

struct FreeBoundaryGraph {
  std::vector<double> abscissae;  // along nu.perp(), recentred at X0
  std::vector<double> g;          // graph heights along nu
  double lipschitz = 0.0;
  double slope_holder_C = 0.0;
  double slope_holder_gamma = 0.0;
  double fit_residual = 0.0;
  bool multi_valued = false;
};

/// g(s) = first height t with psi(X0 + s tau + t nu) > 0 per abscissa line.
FreeBoundaryGraph extract_graph(const ScalarField& psi, Vec2 X0, Vec2 nu, double window);

struct ConeVerdict {
  bool pass = false;
  double min_upper = 0.0;  // min psi over the upper cone (want > 0)
  double max_lower = 0.0;  // max psi over the lower cone (want <= 1e-10)
};

/// psi > 0 on {(X-X0).nu > eps |tangential|} cap B_R, psi ~ 0 on the mirrored
/// lower cone.
ConeVerdict cone_condition(const ScalarField& psi, Vec2 X0, Vec2 nu, double eps, double R);

struct BootstrapResult {
  bool found = false;
  double scale = 0.0;
  FlatnessCertificate certificate;
  std::string message;
};

/// Shrinks scales geometrically from R, fits a half-plane to each rescaling,
/// and returns the first scale whose minimal flatness is <= eps_bar.
BootstrapResult lipschitz_bootstrap(const ScalarField& u, Vec2 center, double R,
                                    const RegularityConfig& cfg);

/// Measures the free constants on exact and perturbed half-plane data and
/// returns a config with the fitted values.
RegularityConfig calibrate(double beta = 1.0, double F0 = 0.0);

}  // namespace wfb

#endif
