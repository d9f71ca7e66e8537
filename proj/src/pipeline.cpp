#include "weissfb/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "weissfb/blowup.hpp"
#include "weissfb/boundary.hpp"
#include "weissfb/quadrature.hpp"
#include "weissfb/weiss.hpp"

namespace wfb {

namespace {

using nlohmann::json;

double require_num(const json& j, const std::string& ptr, const char* key) {
  if (!j.contains(key)) throw ConfigError(ptr + "/" + key, "missing required number");
  if (!j.at(key).is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
  return j.at(key).get<double>();
}

double opt_num(const json& j, const std::string& ptr, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
  return j.at(key).get<double>();
}

VorticityModel parse_vorticity(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
  std::string kind = j.value("kind", std::string("zero"));
  if (kind == "zero") return VorticityModel::zero();
  if (kind == "constant")
    return VorticityModel::constant(require_num(j, ptr, "F0"),
                                    opt_num(j, ptr, "beta", 0.5));
  if (kind == "affine_clipped")
    return VorticityModel::affine_clipped(require_num(j, ptr, "F0"),
                                          opt_num(j, ptr, "z_ref", 1.0),
                                          opt_num(j, ptr, "beta", 0.5));
  throw ConfigError(ptr + "/kind", "unknown vorticity kind '" + kind + "'");
}

RunConfig parse(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config root must be an object");
  if (!j.contains("problem")) throw ConfigError("/problem", "missing required object");
  const json& pj = j.at("problem");
  Vec2 X0{require_num(pj, "/problem", "x0"), require_num(pj, "/problem", "y0")};
  if (X0.x <= 0) throw ConfigError("/problem/x0", "must be positive");
  if (X0.y >= 0) throw ConfigError("/problem/y0", "must be negative");
  double R0 = opt_num(pj, "/problem", "R0", compute_R0(X0));
  int grid_n = static_cast<int>(opt_num(pj, "/problem", "grid_n", 257));
  VorticityModel vort = pj.contains("vorticity")
                            ? parse_vorticity(pj.at("vorticity"), "/problem/vorticity")
                            : VorticityModel::zero();
  std::string verr = vort.validate();
  if (!verr.empty()) throw ConfigError("/problem/vorticity", verr);

  BoundaryData bd;
  if (j.contains("boundary")) {
    const json& bj = j.at("boundary");
    if (!bj.is_object()) throw ConfigError("/boundary", "expected an object");
    if (bj.contains("nu")) {
      if (!bj.at("nu").is_array() || bj.at("nu").size() != 2)
        throw ConfigError("/boundary/nu", "expected [nx, ny]");
      bd.nu0 = Vec2{bj.at("nu")[0].get<double>(), bj.at("nu")[1].get<double>()}.normalized();
    }
    bd.amplitude = opt_num(bj, "/boundary", "amplitude", 0.0);
    bd.frequency = opt_num(bj, "/boundary", "frequency", 0.0);
    bd.offset = opt_num(bj, "/boundary", "offset", 0.0);
    bd.slope = opt_num(bj, "/boundary", "slope", X0.x * std::sqrt(-X0.y));
  } else {
    bd.slope = X0.x * std::sqrt(-X0.y);
  }

  RunConfig cfg;
  try {
    cfg.problem = ProblemSpec(X0, R0, vort, bd, grid_n);
  } catch (const std::exception& e) {
    throw ConfigError("/problem", e.what());
  }
  if (j.contains("solver")) {
    const json& sj = j.at("solver");
    cfg.max_outer = static_cast<int>(opt_num(sj, "/solver", "max_outer", 0));
    cfg.pattern_iterations =
        static_cast<int>(opt_num(sj, "/solver", "pattern_iterations", 0));
    cfg.pattern_accel = sj.value("pattern_accel", true);
  }
  if (j.contains("diagnostics")) {
    const json& dj = j.at("diagnostics");
    cfg.dr_factor = opt_num(dj, "/diagnostics", "dr_factor", 0.125);
    cfg.graph_window = opt_num(dj, "/diagnostics", "graph_window", 0.0);
    cfg.verify_tol_scale = opt_num(dj, "/diagnostics", "verify_tol_scale", 1.0);
    cfg.constants_file = dj.value("constants", std::string());
    if (cfg.dr_factor <= 0 || cfg.dr_factor > 0.5)
      throw ConfigError("/diagnostics/dr_factor", "must be in (0, 0.5]");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned())
      throw ConfigError("/seed", "expected an unsigned integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << j.dump(2) << "\n";
}

struct SolveContext {
  ProblemSpec spec;
  GridSpec grid;
  NodeMask mask;
  ScalarField trace;
  MinimizeResult result;
};

SolveContext do_solve(const RunConfig& cfg) {
  SolveContext ctx;
  ctx.spec = cfg.problem;
  ctx.grid = ctx.spec.make_grid();
  ctx.mask = NodeMask::disk(ctx.grid, ctx.spec.X0, ctx.spec.R0);
  const ProblemSpec& spec = ctx.spec;
  ctx.trace =
      ScalarField(ctx.grid, [&spec](Vec2 X) { return spec.boundary.eval(X, spec.X0); });
  SolverConfig sc = SolverConfig::standard(ctx.grid.h, ctx.spec.slope());
  if (cfg.max_outer > 0) sc.max_outer = cfg.max_outer;
  if (cfg.pattern_iterations > 0) sc.pattern_iterations = cfg.pattern_iterations;
  sc.pattern_accel = cfg.pattern_accel;
  ctx.result = minimize_problem(ctx.spec, sc);
  return ctx;
}

json solve_report(const SolveContext& ctx, const RunConfig& cfg) {
  json rep;
  rep["problem"]["x0"] = ctx.spec.X0.x;
  rep["problem"]["y0"] = ctx.spec.X0.y;
  rep["problem"]["R0"] = ctx.spec.R0;
  rep["grid"]["n"] = ctx.grid.nx;
  rep["grid"]["h"] = ctx.grid.h;
  rep["seed"] = cfg.seed;
  rep["converged"] = ctx.result.converged;
  rep["iterations"] = ctx.result.sweeps_total;
  rep["energy"] = ctx.result.energy;
  rep["J"] = evaluate_J(ctx.result.field, ctx.spec.X0, ctx.spec.R0, ctx.spec.vorticity);
  rep["lipschitz_ratio"] = lipschitz_ratio(ctx.result.field);
  rep["message"] = ctx.result.message;
  return rep;
}

RegularityConfig load_constants(const RunConfig& cfg) {
  if (!cfg.constants_file.empty())
    return RegularityConfig::load_json_file(cfg.constants_file);
  return calibrate(1.0, cfg.problem.vorticity.F0);
}

/// Free boundary anchor near X0, or nullopt when the field is one-phase.
std::optional<Vec2> fb_anchor(const ScalarField& psi, const ProblemSpec& spec) {
  BoundarySegmentSet fb = extract_free_boundary(psi);
  std::optional<Vec2> p = fb.nearest_point(spec.X0);
  if (!p) return std::nullopt;
  if ((*p - spec.X0).norm() > spec.R0 / 2) return std::nullopt;
  return p;
}

int run_impl(const std::string& sub, const RunConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto out = [&out_dir](const char* name) { return out_dir + "/" + name; };

  if (sub == "calibrate") {
    RegularityConfig rc = calibrate(1.0, cfg.problem.vorticity.F0);
    rc.dump_json_file(out("constants.json"));
    json rep;
    rep["constants"] = {{"c", rc.c},
                        {"eps_bar", rc.eps_bar},
                        {"C0", rc.C0},
                        {"eps0", rc.eps0},
                        {"r0", rc.r0},
                        {"c_star_kappa", rc.c_star_kappa},
                        {"C_star", rc.C_star},
                        {"r_bar", rc.r_bar},
                        {"kappa", rc.kappa}};
    write_json(out("report.json"), rep);
    return kRunOk;
  }

  if (sub == "oracle") {
    OracleCorpusResult oc = oracle_corpus_check(cfg.problem.vorticity, cfg.seed, 20);
    json rep;
    rep["n_instances"] = oc.n_instances;
    rep["n_pattern_mismatch"] = oc.n_pattern_mismatch;
    rep["max_energy_gap"] = oc.max_energy_gap;
    rep["pass"] = oc.pass;
    write_json(out("oracle.json"), rep);
    write_json(out("report.json"), rep);
    return oc.pass ? kRunOk : kRunFinding;
  }

  SolveContext ctx = do_solve(cfg);
  json rep = solve_report(ctx, cfg);
  const ScalarField& psi = ctx.result.field;
  int status = ctx.result.converged ? kRunOk : kRunSolverError;

  if (sub == "solve") {
    psi.dump_csv_file(out("field.csv"));
    write_json(out("report.json"), rep);
    return status;
  }

  if (sub == "weiss") {
    // The constrained minimizer's free boundary need not pass through the
    // configured X0; the density and Weiss limits are only meaningful at an
    // actual free boundary point, so recenter at the nearest one.
    Vec2 center = fb_anchor(psi, ctx.spec).value_or(ctx.spec.X0);
    rep["anchor"] = {center.x, center.y};
    WeissReport wr =
        weiss_report(psi, center, ctx.spec.R0, ctx.spec.vorticity, cfg.dr_factor);
    wr.dump_csv_file(out("weiss.csv"));
    try {
      LimitEstimate lim = estimate_limit(wr);
      rep["D0"] = lim.D0;
      rep["density0"] = lim.density0;
      rep["D_fit_rms"] = lim.D_fit_rms;
      rep["density_fit_rms"] = lim.density_fit_rms;
    } catch (const std::exception& e) {
      // grid too coarse for the radius schedule; the per-radius rows stand
      rep["limit_note"] = e.what();
    }
    write_json(out("report.json"), rep);
    return status;
  }

  if (sub == "blowup") {
    Vec2 center = fb_anchor(psi, ctx.spec).value_or(ctx.spec.X0);
    rep["anchor"] = {center.x, center.y};
    BlowupSequence seq;
    try {
      seq = blowup_sequence(psi, center, ctx.spec.R0);
    } catch (const std::exception& e) {
      // grids too coarse for the scale schedule
      rep["finding"] = e.what();
      write_json(out("report.json"), rep);
      return kRunFinding;
    }
    seq.dump_csv_file(out("blowup.csv"));
    rep["gamma"] = seq.rate.gamma;
    rep["C1"] = seq.rate.C1;
    rep["r_squared"] = seq.rate.r_squared;
    rep["at_floor"] = seq.rate.at_floor;
    if (!seq.scales.empty()) {
      const BlowupScale& last = seq.scales.back();
      rep["slope_hat"] = last.slope;
      rep["nu"] = {last.nu.x, last.nu.y};
    }
    write_json(out("report.json"), rep);
    return status;
  }

  if (sub == "flatness" || sub == "boundary") {
    RegularityConfig rc = load_constants(cfg);
    std::optional<Vec2> anchor = fb_anchor(psi, ctx.spec);
    if (!anchor) {
      rep["finding"] = "no free boundary near X0";
      write_json(out("report.json"), rep);
      return kRunFinding;
    }
    double R = ctx.spec.R0 / 4;
    HalfplaneFit fit = fit_halfplane(rescale(psi, *anchor, R));
    rep["anchor"] = {anchor->x, anchor->y};
    rep["nu0"] = {fit.nu.x, fit.nu.y};
    rep["slope_hat"] = fit.slope;

    if (sub == "flatness") {
      FlatnessSchedule sched = flatness_iteration(psi, *anchor, R, fit.nu, fit.slope, rc);
      sched.dump_csv_file(out("flatness.csv"));
      int n_pass = 0;
      for (const FlatnessLevel& l : sched.levels) n_pass += l.pass ? 1 : 0;
      rep["levels"] = static_cast<int>(sched.levels.size());
      rep["levels_passed"] = n_pass;
      rep["completed"] = sched.completed;
      rep["schedule_message"] = sched.message;
      write_json(out("report.json"), rep);
      if (status != kRunOk) return status;
      return sched.completed ? kRunOk : kRunFinding;
    }

    double window = cfg.graph_window > 0 ? cfg.graph_window : ctx.spec.R0 / 4;
    FreeBoundaryGraph graph = extract_graph(psi, *anchor, fit.nu, window);
    std::ofstream os(out("boundary.csv"));
    if (!os) throw std::runtime_error("cannot open boundary.csv");
    os.precision(17);
    os << "s,g,slope,holder_fit\n";
    for (std::size_t i = 0; i < graph.abscissae.size(); ++i) {
      std::size_t i2 = std::min(i + 1, graph.abscissae.size() - 1);
      std::size_t i1 = i2 == i ? i - 1 : i;
      double sl = (graph.g[i2] - graph.g[i1]) / (graph.abscissae[i2] - graph.abscissae[i1]);
      double hf = graph.slope_holder_C *
                  std::pow(std::abs(graph.abscissae[i]), graph.slope_holder_gamma);
      os << graph.abscissae[i] << ',' << graph.g[i] << ',' << sl << ',' << hf << '\n';
    }
    os.close();
    rep["lipschitz"] = graph.lipschitz;
    rep["slope_holder_C"] = graph.slope_holder_C;
    rep["slope_holder_gamma"] = graph.slope_holder_gamma;
    rep["multi_valued"] = graph.multi_valued;
    write_json(out("report.json"), rep);
    if (status != kRunOk) return status;
    return graph.multi_valued ? kRunFinding : kRunOk;
  }

  if (sub == "verify") {
    double h = ctx.grid.h;
    double vts = cfg.verify_tol_scale;
    json checks = json::array();
    bool all_pass = true;
    auto add = [&checks, &all_pass](const char* name, double value, double threshold) {
      bool ok = value <= threshold;
      checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold},
                        {"pass", ok}});
      all_pass = all_pass && ok;
    };

    double gap = competitor_gap(psi, ctx.mask, ctx.spec.vorticity, 20, cfg.seed);
    add("competitor_gap", gap, 1e-9 * std::max(1.0, std::abs(ctx.result.energy)));

    // Identities hold at free boundary points; center there. The residuals
    // carry 1/r^2, 1/r^3 scalings, so the discretization error at radius r
    // behaves like h/r^2 and the threshold has to as well.
    Vec2 center = fb_anchor(psi, ctx.spec).value_or(ctx.spec.X0);
    rep["anchor"] = {center.x, center.y};
    for (double r : {ctx.spec.R0 / 2, ctx.spec.R0 / 4, ctx.spec.R0 / 8}) {
      double dr = std::min({16 * h, ctx.spec.R0 - r - h, r / 2});
      if (r < 10 * h || dr <= 0) continue;
      double mres =
          std::abs(monotonicity_residual(psi, center, r, dr, ctx.spec.vorticity));
      add(("monotonicity_r" + std::to_string(r)).c_str(), mres, vts * 2.0 * h / (r * r));
    }
    double pres =
        std::abs(pohozaev_residual(psi, center, ctx.spec.R0 / 2, ctx.spec.vorticity));
    add("pohozaev", pres, vts * 5e-4 * std::max(1.0, ctx.spec.slope()));

    std::mt19937_64 rng(cfg.seed + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double dv_worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      double rho = (0.1 + 0.3 * unit(rng)) * ctx.spec.R0;
      double ang = 2 * M_PI * unit(rng);
      double rad = unit(rng) * (ctx.spec.R0 - rho - 2 * h);
      if (rad < 0) continue;
      Vec2 c = ctx.spec.X0 + rad * unit_from_angle(ang);
      VectorField eta = make_bump_vector_field(c, rho, unit_from_angle(2 * M_PI * unit(rng)));
      dv_worst = std::max(dv_worst, std::abs(domain_variation_residual(
                                        psi, ctx.spec.X0, ctx.spec.R0,
                                        ctx.spec.vorticity, eta)));
    }
    add("domain_variation", dv_worst, vts * 50.0 * h);

    // The PDE and the Bernoulli condition only govern the masked region, so
    // sample well inside it. Marching-squares normals staircase at +-45
    // degrees; refit each tested segment's normal from the nearby midpoints.
    GeneralFBP axi = GeneralFBP::axisymmetric(psi, ctx.spec.vorticity);
    BoundarySegmentSet fb = extract_free_boundary(psi);
    std::vector<Vec2> mids;
    for (const BoundarySegment& sg : fb.segments) mids.push_back(sg.midpoint());
    std::vector<Vec2> interior;
    int stride = std::max(1, (ctx.grid.nx - 1) / 64);
    for (int j = 0; j < ctx.grid.ny; j += stride)
      for (int i = 0; i < ctx.grid.nx; i += stride) {
        Vec2 X = ctx.grid.node(i, j);
        if ((X - ctx.spec.X0).norm() < ctx.spec.R0 - 6 * h &&
            psi.at(i, j) > ctx.spec.slope() * 4 * h)
          interior.push_back(X);
      }
    std::vector<BoundarySegment> bsegs;
    for (const BoundarySegment& sg : fb.segments) {
      Vec2 m = sg.midpoint();
      if ((m - center).norm() > ctx.spec.R0 / 4) continue;
      double sxx = 0, sxy = 0, syy = 0, sx = 0, sy = 0;
      int cnt = 0;
      for (const Vec2& p : mids)
        if ((p - m).norm() <= 8 * h) {
          sx += p.x; sy += p.y; sxx += p.x * p.x; sxy += p.x * p.y; syy += p.y * p.y;
          ++cnt;
        }
      BoundarySegment fixed = sg;
      if (cnt >= 3) {
        double cxx = sxx / cnt - sx * sx / (cnt * (double)cnt);
        double cxy = sxy / cnt - sx * sy / (cnt * (double)cnt);
        double cyy = syy / cnt - sy * sy / (cnt * (double)cnt);
        double th = 0.5 * std::atan2(2 * cxy, cxx - cyy);
        Vec2 dir = unit_from_angle(th);
        Vec2 nn{-dir.y, dir.x};
        if (nn.dot(sg.normal) < 0) nn = -1.0 * nn;
        fixed.normal = nn;
      }
      bsegs.push_back(fixed);
    }
    if (!interior.empty() && !bsegs.empty()) {
      ViscosityReport visc = viscosity_check(psi, axi, interior, bsegs);
      add("viscosity_interior", visc.max_interior_residual,
          vts * 1e-3 * (1.0 + ctx.spec.slope()));
      if (visc.n_boundary > 0)
        add("viscosity_boundary", visc.max_boundary_deviation, vts * 20.0 * h);
    }

    rep["checks"] = checks;
    rep["pass"] = all_pass;
    write_json(out("verify.json"), rep);
    write_json(out("report.json"), rep);
    if (status != kRunOk) return status;
    return all_pass ? kRunOk : kRunFinding;
  }

  throw ConfigError("/subcommand", "unknown subcommand '" + sub + "'");
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse(j);
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", "cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

int run(const std::string& subcommand, const RunConfig& cfg, const std::string& out_dir) {
  try {
    return run_impl(subcommand, cfg, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kRunConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunConfigError;
  }
}

OracleCorpusResult oracle_corpus_check(const VorticityModel& vort, std::uint64_t seed,
                                       int n_instances, double energy_tol) {
  OracleCorpusResult out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  GridSpec g = GridSpec::physical(0.9, -1.1, 0.05, 5, 5);
  NodeMask mask = NodeMask::interior(g);
  for (int t = 0; t < n_instances; ++t) {
    std::vector<double> tv(g.size(), 0.0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (!mask.is_free(i, j))
          tv[g.index(i, j)] = (unit(rng) - 0.35) * 0.08;
    ScalarField trace(g, tv);
    OracleSmallResult oracle = oracle_small(trace, mask, vort);

    ScalarField init = solve_dirichlet(trace, mask, VorticityModel::zero());
    std::vector<double> iv = init.values();
    for (std::size_t k = 0; k < iv.size(); ++k)
      if (mask.free[k]) iv[k] = std::max(iv[k], 0.0);
    SolverConfig sc = SolverConfig::standard(g.h, 1.0);
    MinimizeResult min = minimize(ScalarField(g, iv), mask, vort, sc);

    ++out.n_instances;
    bool pattern_ok = true;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        if (!mask.is_free(i, j)) continue;
        bool a = min.field.at(i, j) > 0;
        bool b = oracle.pattern[g.index(i, j)] != 0;
        if (a != b) pattern_ok = false;
      }
    if (!pattern_ok) ++out.n_pattern_mismatch;
    out.max_energy_gap =
        std::max(out.max_energy_gap, std::abs(min.energy - oracle.energy));
  }
  out.pass = out.n_pattern_mismatch == 0 && out.max_energy_gap <= energy_tol;
  return out;
}

}  // namespace wfb
