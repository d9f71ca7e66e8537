// Exercises the C interface end to end: the only header included from the
// library is the public C one, as a client would.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "weissfb.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

const char* kConfig = R"({"problem": {"x0": 1.0, "y0": -1.0, "grid_n": 33}})";

}  // namespace

TEST_CASE("config parse, overrides, and solve through the C interface") {
  TempDir dir("wfb_capi_solve");
  wfb_config* cfg = nullptr;
  REQUIRE(wfb_config_parse(kConfig, &cfg) == WFB_OK);
  CHECK(wfb_config_set_seed(cfg, 11) == WFB_OK);
  CHECK(wfb_config_set_grid_n(cfg, 65) == WFB_OK);
  CHECK(wfb_run("solve", cfg, dir.str().c_str()) == WFB_OK);
  CHECK(std::string(wfb_last_error()).empty());
  CHECK(fs::exists(dir.path / "report.json"));
  CHECK(fs::exists(dir.path / "field.csv"));
  wfb_config_free(cfg);
}

TEST_CASE("config errors carry a JSON pointer and the config status") {
  wfb_config* cfg = nullptr;
  CHECK(wfb_config_parse(R"({"problem": {"x0": -2.0}})", &cfg) ==
        WFB_ERR_CONFIG);
  CHECK(std::string(wfb_last_error()).find("/problem") != std::string::npos);

  CHECK(wfb_config_load("/does/not/exist.json", &cfg) == WFB_ERR_CONFIG);
  CHECK(wfb_config_parse(nullptr, &cfg) == WFB_ERR_CONFIG);

  REQUIRE(wfb_config_parse(kConfig, &cfg) == WFB_OK);
  CHECK(wfb_config_set_grid_n(cfg, 1) == WFB_ERR_CONFIG);
  TempDir dir("wfb_capi_err");
  CHECK(wfb_run("frobnicate", cfg, dir.str().c_str()) == WFB_ERR_CONFIG);
  wfb_config_free(cfg);
}

TEST_CASE("version string is set") {
  CHECK(std::string(wfb_version()).find('.') != std::string::npos);
}
