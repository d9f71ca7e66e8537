#include "weissfb.h"

#include <exception>
#include <string>

#include "weissfb/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

wfb_status fail(wfb_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

wfb_status ok() {
  g_last_error.clear();
  return WFB_OK;
}

}  // namespace

struct wfb_config {
  wfb::RunConfig cfg;
};

extern "C" {

wfb_status wfb_config_load(const char* path, wfb_config** out) {
  if (!path || !out) return fail(WFB_ERR_CONFIG, "null argument");
  try {
    *out = new wfb_config{wfb::RunConfig::from_json_file(path)};
    return ok();
  } catch (const wfb::ConfigError& e) {
    return fail(WFB_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(WFB_ERR_CONFIG, e.what());
  }
}

wfb_status wfb_config_parse(const char* json_text, wfb_config** out) {
  if (!json_text || !out) return fail(WFB_ERR_CONFIG, "null argument");
  try {
    *out = new wfb_config{wfb::RunConfig::from_json_text(json_text)};
    return ok();
  } catch (const wfb::ConfigError& e) {
    return fail(WFB_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(WFB_ERR_CONFIG, e.what());
  }
}

void wfb_config_free(wfb_config* cfg) { delete cfg; }

wfb_status wfb_config_set_seed(wfb_config* cfg, uint64_t seed) {
  if (!cfg) return fail(WFB_ERR_CONFIG, "null config");
  cfg->cfg.seed = seed;
  return ok();
}

wfb_status wfb_config_set_grid_n(wfb_config* cfg, int grid_n) {
  if (!cfg) return fail(WFB_ERR_CONFIG, "null config");
  try {
    // Rebuild through the validating constructor.
    const wfb::ProblemSpec& p = cfg->cfg.problem;
    cfg->cfg.problem =
        wfb::ProblemSpec(p.X0, p.R0, p.vorticity, p.boundary, grid_n);
    return ok();
  } catch (const std::exception& e) {
    return fail(WFB_ERR_CONFIG, std::string("/grid_n: ") + e.what());
  }
}

wfb_status wfb_run(const char* subcommand, const wfb_config* cfg,
                   const char* out_dir) {
  if (!subcommand || !cfg || !out_dir)
    return fail(WFB_ERR_CONFIG, "null argument");
  try {
    int rc = wfb::run(subcommand, cfg->cfg, out_dir);
    switch (rc) {
      case wfb::kRunOk:
        return ok();
      case wfb::kRunConfigError:
        return fail(WFB_ERR_CONFIG, "configuration rejected (see stderr)");
      case wfb::kRunSolverError:
        return fail(WFB_ERR_SOLVER, "solver did not converge");
      case wfb::kRunFinding:
        return fail(WFB_FINDING, "diagnostic finding (see report.json)");
      default:
        return fail(WFB_ERR_INTERNAL, "unexpected status");
    }
  } catch (const std::exception& e) {
    return fail(WFB_ERR_INTERNAL, e.what());
  }
}

const char* wfb_last_error(void) { return g_last_error.c_str(); }

const char* wfb_version(void) { return "0.1.0"; }

}  // extern "C"
