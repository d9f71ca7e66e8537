#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "weissfb/pipeline.hpp"

using namespace wfb;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const char* kHalfPlaneConfig = R"({
  "problem": {"x0": 1.0, "y0": -1.0, "grid_n": 129},
  "seed": 7
})";

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

// Minimal JSON-schema subset checker: type, properties, required, anyOf.
// Enough to hold reports to the shipped schema without a validator dependency.
bool schema_ok(const json& schema, const json& doc) {
  if (schema.contains("type")) {
    const std::string t = schema["type"];
    if (t == "object" && !doc.is_object()) return false;
    if (t == "array" && !doc.is_array()) return false;
    if (t == "number" && !doc.is_number()) return false;
    if (t == "integer" && !doc.is_number_integer() && !doc.is_number_unsigned())
      return false;
    if (t == "boolean" && !doc.is_boolean()) return false;
    if (t == "string" && !doc.is_string()) return false;
  }
  if (schema.contains("required"))
    for (const auto& k : schema["required"])
      if (!doc.contains(k.get<std::string>())) return false;
  if (schema.contains("anyOf")) {
    bool any = false;
    for (const auto& alt : schema["anyOf"]) any = any || schema_ok(alt, doc);
    if (!any) return false;
  }
  if (schema.contains("properties") && doc.is_object())
    for (const auto& [key, sub] : schema["properties"].items())
      if (doc.contains(key) && !schema_ok(sub, doc[key])) return false;
  return true;
}

json load_report_schema() {
  return json::parse(slurp(std::string(WFB_SOURCE_DIR) + "/docs/report.schema.json"));
}

}  // namespace

TEST_CASE("config parsing: defaults, overrides, and pointer-tagged errors") {
  RunConfig cfg = RunConfig::from_json_text(kHalfPlaneConfig);
  CHECK(cfg.problem.X0.x == 1.0);
  CHECK(cfg.problem.R0 == doctest::Approx(0.25));
  CHECK(cfg.problem.grid_n == 129);
  CHECK(cfg.seed == 7);

  CHECK_THROWS_AS(RunConfig::from_json_text("not json"), ConfigError);
  try {
    RunConfig::from_json_text(R"({"problem": {"x0": -1.0, "y0": -1.0}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.pointer == "/problem/x0");
  }
  try {
    RunConfig::from_json_text(R"({"problem": {"x0": 1.0, "y0": -1.0, "R0": 5.0}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.pointer == "/problem");
  }
  try {
    RunConfig::from_json_text(
        R"({"problem": {"x0": 1.0, "y0": -1.0, "vorticity": {"kind": "bogus"}}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.pointer == "/problem/vorticity/kind");
  }
}

TEST_CASE("solve on zero boundary data dumps a zero field with J = 0") {
  TempDir dir("wfb_pipe_zero");
  RunConfig cfg = RunConfig::from_json_text(R"({
    "problem": {"x0": 1.0, "y0": -1.0, "grid_n": 33},
    "boundary": {"slope": 0.0}
  })");
  CHECK(run("solve", cfg, dir.str()) == 0);
  json rep = json::parse(slurp(dir.str() + "/report.json"));
  CHECK(rep.at("J").get<double>() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(rep.at("converged").get<bool>());
  std::string field = slurp(dir.str() + "/field.csv");
  CHECK(field.rfind("# nx,ny,h,x_min,y_min", 0) == 0);
}

TEST_CASE("weiss subcommand on the half-plane config hits the known limits") {
  TempDir dir("wfb_pipe_weiss");
  // 513 nodes: the radius schedule down to 4h then has enough rows for the
  // extrapolated limits and the largest-radius density is converged.
  RunConfig cfg = RunConfig::from_json_text(R"({
    "problem": {"x0": 1.0, "y0": -1.0, "grid_n": 513},
    "seed": 7
  })");
  CHECK(run("weiss", cfg, dir.str()) == 0);
  json rep = json::parse(slurp(dir.str() + "/report.json"));
  // extrapolated limits for a free boundary anchor near (1,-1):
  // D -> pi/2, density -> 1/2
  CHECK(rep.at("D0").get<double>() == doctest::Approx(M_PI / 2).epsilon(0.05));
  CHECK(rep.at("density0").get<double>() == doctest::Approx(0.5).epsilon(0.05));
  std::string csv = slurp(dir.str() + "/weiss.csv");
  CHECK(csv.rfind("r,D1,D2,D,J0,K1,density,dD_lhs,dD_rhs,residual", 0) == 0);
  // last CSV row density close to 1/2 (free boundary through X0)
  std::istringstream is(csv);
  std::string line, last;
  while (std::getline(is, line))
    if (!line.empty()) last = line;
  std::replace(last.begin(), last.end(), ',', ' ');
  std::istringstream row(last);
  double r, D1, D2, D, J0, K1, density;
  row >> r >> D1 >> D2 >> D >> J0 >> K1 >> density;
  CHECK(density == doctest::Approx(0.5).epsilon(4e-3));
}

TEST_CASE("oracle corpus: minimizer matches the exhaustive enumeration") {
  OracleCorpusResult oc = oracle_corpus_check(VorticityModel::zero(), 99, 20);
  CHECK(oc.n_instances == 20);
  CHECK(oc.n_pattern_mismatch == 0);
  CHECK(oc.max_energy_gap <= 1e-8);
  CHECK(oc.pass);
}

TEST_CASE("oracle subcommand writes its verdict and exits clean") {
  TempDir dir("wfb_pipe_oracle");
  RunConfig cfg = RunConfig::from_json_text(kHalfPlaneConfig);
  CHECK(run("oracle", cfg, dir.str()) == 0);
  json rep = json::parse(slurp(dir.str() + "/oracle.json"));
  CHECK(rep.at("pass").get<bool>());
  CHECK(rep.at("n_pattern_mismatch").get<int>() == 0);
}

TEST_CASE("calibrate subcommand emits the constants file") {
  TempDir dir("wfb_pipe_cal");
  RunConfig cfg = RunConfig::from_json_text(kHalfPlaneConfig);
  CHECK(run("calibrate", cfg, dir.str()) == 0);
  json c = json::parse(slurp(dir.str() + "/constants.json"));
  for (const char* key :
       {"c", "eps_bar", "C0", "eps0", "r0", "c_star_kappa", "C_star", "r_bar", "kappa"})
    CHECK(c.contains(key));
  RegularityConfig rc = RegularityConfig::load_json_file(dir.str() + "/constants.json");
  CHECK(rc.validate().empty());
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  TempDir d1("wfb_pipe_det1");
  TempDir d2("wfb_pipe_det2");
  RunConfig cfg = RunConfig::from_json_text(R"({
    "problem": {"x0": 1.0, "y0": -1.0, "grid_n": 65},
    "boundary": {"amplitude": 0.01, "frequency": 12.0},
    "seed": 5
  })");
  CHECK(run("weiss", cfg, d1.str()) == 0);
  CHECK(run("weiss", cfg, d2.str()) == 0);
  CHECK(slurp(d1.str() + "/weiss.csv") == slurp(d2.str() + "/weiss.csv"));
  CHECK(slurp(d1.str() + "/report.json") == slurp(d2.str() + "/report.json"));
}

TEST_CASE("unknown subcommand is a config error") {
  TempDir dir("wfb_pipe_unknown");
  RunConfig cfg = RunConfig::from_json_text(kHalfPlaneConfig);
  CHECK(run("frobnicate", cfg, dir.str()) == kRunConfigError);
}

TEST_CASE("flatness and boundary subcommands produce their CSV artifacts") {
  TempDir dir("wfb_pipe_flat");
  RunConfig cfg = RunConfig::from_json_text(kHalfPlaneConfig);
  int rc = run("flatness", cfg, dir.str());
  CHECK((rc == 0 || rc == kRunFinding));
  std::string csv = slurp(dir.str() + "/flatness.csv");
  CHECK(csv.rfind("k,scale,nu_x,nu_y,eps,pass,margin", 0) == 0);

  TempDir dirb("wfb_pipe_bnd");
  CHECK(run("boundary", cfg, dirb.str()) == 0);
  std::string bcsv = slurp(dirb.str() + "/boundary.csv");
  CHECK(bcsv.rfind("s,g,slope,holder_fit", 0) == 0);
  json rep = json::parse(slurp(dirb.str() + "/report.json"));
  CHECK_FALSE(rep.at("multi_valued").get<bool>());
  // free boundary of the half-plane minimizer is near-horizontal
  CHECK(rep.at("lipschitz").get<double>() < 0.2);
}

TEST_CASE("verify subcommand passes on the half-plane minimizer") {
  TempDir dir("wfb_pipe_verify");
  RunConfig cfg = RunConfig::from_json_text(kHalfPlaneConfig);
  int rc = run("verify", cfg, dir.str());
  json rep = json::parse(slurp(dir.str() + "/verify.json"));
  INFO(rep.dump(2));
  CHECK(rc == 0);
  CHECK(rep.at("pass").get<bool>());
}

TEST_CASE("report.json artifacts validate against the shipped schema") {
  json schema = load_report_schema();
  RunConfig cfg = RunConfig::from_json_text(R"({
    "problem": {"x0": 1.0, "y0": -1.0, "grid_n": 65},
    "seed": 7
  })");
  for (const char* sub : {"solve", "weiss", "blowup", "calibrate", "oracle", "verify"}) {
    TempDir dir((std::string("wfb_pipe_schema_") + sub).c_str());
    run(sub, cfg, dir.str());
    json rep = json::parse(slurp(dir.str() + "/report.json"));
    INFO(sub);
    CHECK(schema_ok(schema, rep));
  }
  // structural misfits are rejected
  CHECK_FALSE(schema_ok(schema, json::parse(R"({"unrelated": 1})")));
  CHECK_FALSE(schema_ok(schema, json::parse(R"({"constants": 3})")));
}
