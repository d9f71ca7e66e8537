// Command-line front end. Talks to the library exclusively through the C
// interface in weissfb.h.
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "weissfb.h"

int main(int argc, char** argv) {
  CLI::App app{"weighted one-phase Bernoulli minimizer and diagnostics"};
  app.set_version_flag("--version", std::string(wfb_version()));

  std::string subcommand, config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int grid_n = 0;
  bool have_seed = false, have_grid_n = false;

  app.add_option("subcommand", subcommand,
                 "one of: solve weiss blowup flatness boundary verify oracle "
                 "calibrate")
      ->required();
  app.add_option("--config", config_path, "run configuration (JSON)")
      ->required();
  app.add_option("--out", out_dir, "output directory for artifacts");
  app.add_option("--seed", seed, "override the configured RNG seed")
      ->each([&](const std::string&) { have_seed = true; });
  app.add_option("--grid-n", grid_n, "override the configured grid resolution")
      ->each([&](const std::string&) { have_grid_n = true; });

  CLI11_PARSE(app, argc, argv);

  wfb_config* cfg = nullptr;
  wfb_status st = wfb_config_load(config_path.c_str(), &cfg);
  if (st != WFB_OK) {
    std::fprintf(stderr, "config error: %s\n", wfb_last_error());
    return st;
  }
  if (have_seed && (st = wfb_config_set_seed(cfg, seed)) != WFB_OK) {
    std::fprintf(stderr, "config error: %s\n", wfb_last_error());
    wfb_config_free(cfg);
    return st;
  }
  if (have_grid_n && (st = wfb_config_set_grid_n(cfg, grid_n)) != WFB_OK) {
    std::fprintf(stderr, "config error: %s\n", wfb_last_error());
    wfb_config_free(cfg);
    return st;
  }

  st = wfb_run(subcommand.c_str(), cfg, out_dir.c_str());
  if (st != WFB_OK) std::fprintf(stderr, "%s\n", wfb_last_error());
  wfb_config_free(cfg);
  return st;
}
