#ifndef WEISSFB_PIPELINE_HPP
#define WEISSFB_PIPELINE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "weissfb/minimize.hpp"
#include "weissfb/physics.hpp"
#include "weissfb/regularity.hpp"

namespace wfb {

/// Schema violation with a JSON-pointer-ish locator of the offending key.
struct ConfigError : std::runtime_error {
  std::string pointer;
  ConfigError(std::string ptr, const std::string& what)
      : std::runtime_error(ptr + ": " + what), pointer(std::move(ptr)) {}
};

struct RunConfig {
  ProblemSpec problem;
  // Solver overrides on top of SolverConfig::standard (0 keeps the default).
  int max_outer = 0;
  int pattern_iterations = 0;
  bool pattern_accel = true;

  double dr_factor = 0.125;     // Weiss radius step, as a fraction of r
  double graph_window = 0.0;    // 0 -> R0/4
  std::string constants_file;   // empty -> run calibrate()
  double verify_tol_scale = 1.0;
  std::uint64_t seed = 1234;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
};

/// Exit codes of run(): 0 success, 2 config error, 3 solver non-convergence,
/// 4 diagnostic finding.
enum RunStatus : int {
  kRunOk = 0,
  kRunConfigError = 2,
  kRunSolverError = 3,
  kRunFinding = 4,
};

/// Executes one subcommand (solve, weiss, blowup, flatness, boundary, verify,
/// oracle, calibrate) and writes its artifacts under out_dir.
int run(const std::string& subcommand, const RunConfig& cfg, const std::string& out_dir);

struct OracleCorpusResult {
  int n_instances = 0;
  int n_pattern_mismatch = 0;
  double max_energy_gap = 0.0;
  bool pass = false;
};

/// Seeded corpus of small instances (<= 3x3 interior nodes): minimize against
/// the exhaustive oracle, comparing positivity patterns and energies.
OracleCorpusResult oracle_corpus_check(const VorticityModel& vort, std::uint64_t seed,
                                       int n_instances, double energy_tol = 1e-8);

}  // namespace wfb

#endif
