#include <doctest.h>

#include "toric/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace toric;
using namespace toric::cli;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(TORIC_FIXTURE_DIR) + "/" + name; }

RunResult run_on(const std::string& sub, const std::optional<std::string>& file, RunConfig cfg = {}) {
  cfg.subcommand = sub;
  if (file) cfg.input = fixture(*file);
  return run(cfg);
}

std::string temp_file(const std::string& name, const std::string& text) {
  const std::string path = std::string(TORIC_BINARY_DIR) + "/" + name;
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

}  // namespace

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("check-delzant square and bad triangle") {
  const auto sq = run_on("check-delzant", "square.toml");
  CHECK(sq.exit_code == 0);
  CHECK(sq.report["status"] == "pass");
  CHECK(sq.report["vertices"] == 4);
  CHECK(sq.report["version"] == "0.1.0");
  CHECK(sq.report["input_digest"].get<std::string>().size() == 64);
  CHECK(sq.report["tolerances"].contains("tol_active"));

  const auto bad = run_on("check-delzant", "bad-triangle.toml");
  CHECK(bad.exit_code == 2);
  CHECK(bad.report["status"] == "violation");
  CHECK(bad.report["violation"]["point"] == json::array({1.0, 0.0}));
  CHECK(bad.report["violation"]["invariants"] == json::array({1, 2}));
}

TEST_CASE("extremal-solve exotic") {
  RunConfig cfg;
  cfg.weight = "h+2";
  cfg.kappa = "8pi";
  const auto r = run_on("extremal-solve", std::nullopt, cfg);
  REQUIRE(r.exit_code == 0);
  CHECK(r.report["S_coeffs"]["c0"] == "36*pi/11");
  CHECK(r.report["S_coeffs"]["c1"] == "48*pi/11");
  CHECK(r.report["residual_certificate"]["exact"] == true);
  CHECK(r.report["kappa"]["exact"] == "8*pi");
  CHECK(r.report["residue"]["exact"] == "1/(8*pi)");
  CHECK(r.report["input_digest"].is_null());
}

TEST_CASE("extremal-solve standard with default kappa") {
  const auto r = run_on("extremal-solve", std::nullopt);
  REQUIRE(r.exit_code == 0);
  CHECK(r.report["tau_coeffs"]["h_powers"] == json::array({"2*pi", "0", "-2*pi"}));
  CHECK(r.report["S_coeffs"]["c0"] == "2*pi");  // S = -tau''/2
  CHECK(r.report["S_coeffs"]["c1"] == "0");
  CHECK(r.report["tolerances"]["kappa"] == "4*pi");
}

TEST_CASE("extremal-solve csv") {
  RunConfig cfg;
  cfg.grid = 3;
  const auto r = run_on("extremal-solve", std::nullopt, cfg);
  // tau = S = 2 pi at h = 0
  CHECK(r.csv.rfind("h,tau,S\n", 0) == 0);
  CHECK(r.csv.find("0,6.28318530718,6.28318530718") != std::string::npos);
}

TEST_CASE("finite type") {
  const auto band = run_on("finite-type", "exotic-band.toml");
  CHECK(band.exit_code == 0);
  CHECK(band.report["count"] == 2);
  const auto par = run_on("finite-type", "parabola-band.toml");
  CHECK(par.exit_code == 2);
  CHECK(par.report["finite"] == false);
  CHECK(par.report["witnesses"].size() == 7);
}

TEST_CASE("reduce square") {
  const auto r = run_on("reduce", "square.toml");
  CHECK(r.exit_code == 0);
  CHECK(r.report["kernel_rank"] == 2);
  CHECK(r.report["free"] == true);
}

TEST_CASE("residues") {
  for (const char* f : {"interval.toml", "square.toml", "simplex.toml", "standard-band.toml", "exotic-band.toml"}) {
    CAPTURE(f);
    const auto r = run_on("residues", f);
    CHECK(r.exit_code == 0);
    for (const auto& e : r.report["facets"]) CHECK(e["coefficient_dt"].get<double>() == doctest::Approx(0.0795774715459));
  }
  const auto v = run_on("residues", "interval-verbatim.toml");
  CHECK(v.exit_code == 2);
  CHECK(v.report["facets"][0]["coefficient_dt"].get<double>() == doctest::Approx(0.0397887357729));
  RunConfig cfg;
  cfg.kappa = "8pi";
  CHECK(run_on("residues", "interval-verbatim.toml", cfg).exit_code == 0);
}

TEST_CASE("hessian-check") {
  CHECK(run_on("hessian-check", "square.toml").exit_code == 0);
  const auto r = run_on("hessian-check", "nonhessian.toml");
  CHECK(r.exit_code == 2);
  // d_x g_yy - d_y g_xy = 2x
  const auto& v = r.report["violation"];
  CHECK(v["defect"].get<double>() == doctest::Approx(2 * v["point"][0].get<double>()));
}

TEST_CASE("metric-eval and potential csv") {
  RunConfig cfg;
  cfg.grid = 3;
  const auto m = run_on("metric-eval", "square.toml", cfg);
  CHECK(m.exit_code == 0);
  CHECK(m.csv.rfind("x,y,g_xx,g_xy,g_yy,det,min_eigenvalue\n", 0) == 0);
  CHECK(std::count(m.csv.begin(), m.csv.end(), '\n') == 10);
  const auto p = run_on("potential", "square.toml", cfg);
  CHECK(p.exit_code == 0);
  CHECK(p.csv.rfind("x,y,phi\n", 0) == 0);
  CHECK(run_on("potential", "nonhessian.toml", cfg).exit_code == 1);
}

TEST_CASE("curvature and extremal-check") {
  RunConfig cfg;
  cfg.grid = 6;
  const auto c = run_on("curvature", "exotic-extremal.toml", cfg);
  CHECK(c.exit_code == 0);
  CHECK(c.report["fit"]["c0"].get<double>() == doctest::Approx(10.2815759572));
  CHECK(run_on("extremal-check", "standard-extremal.toml").exit_code == 0);
  CHECK(run_on("extremal-check", "circle.toml").exit_code == 2);
  CHECK(run_on("extremal-check", "circle-constant.toml").exit_code == 0);
}

TEST_CASE("lift-check") {
  for (const char* f : {"interval.toml", "square.toml", "standard-band.toml", "exotic-band.toml"}) {
    CAPTURE(f);
    const auto r = run_on("lift-check", f);
    CHECK(r.exit_code == 0);
    CHECK(r.report["compatibility"]["points"] == 100);
  }
  // Compatible but not smooth: the residue is 1/(8 pi).
  const auto e = run_on("lift-check", "standard-extremal.toml");
  CHECK(e.exit_code == 2);
  CHECK(e.report["compatibility"]["pass"] == true);
  CHECK(e.report["smoothness"]["facets"][0]["ratio"].get<double>() == doctest::Approx(0.25));

  RunConfig cfg;
  cfg.family = "canonical";
  CHECK(run_on("lift-check", "exotic-band.toml", cfg).exit_code == 0);
  cfg.family = "cylinder-standard";
  CHECK(run_on("lift-check", "exotic-band.toml", cfg).exit_code == 1);
  cfg.family = "spherical";
  CHECK(run_on("lift-check", "exotic-band.toml", cfg).exit_code == 1);
}

TEST_CASE("deterministic output") {
  const auto a = run_on("lift-check", "exotic-band.toml"), b = run_on("lift-check", "exotic-band.toml");
  CHECK(a.report.dump() == b.report.dump());
}

TEST_CASE("input errors carry line and field") {
  const auto unknown = temp_file("unknown_key.toml", "[model]\ngeometry = \"euclidean\"\nshap = \"band\"\n");
  auto r = run({"check-delzant", unknown});
  CHECK(r.exit_code == 1);
  CHECK(r.report["error"]["field"] == "model.shap");
  CHECK(r.report["error"]["line"] == 3);

  const auto syntax = temp_file("syntax.toml", "[model]\n\ngeometry = \n");
  r = run({"check-delzant", syntax});
  CHECK(r.exit_code == 1);
  CHECK(r.report["error"]["line"] == 3);

  const auto expr = temp_file("bad_expr.toml",
                              "[model]\nfunctionals = [{normal = [-1]}, {normal = [1], offset = -1}]\n"
                              "[metric]\ndirect = [[\"1 + (h\"]]\n");
  r = run({"metric-eval", expr});
  CHECK(r.exit_code == 1);
  CHECK(r.report["error"]["field"] == "metric.direct[0][0]");
  CHECK(r.report["error"]["line"] == 4);

  CHECK(run({"check-delzant", fixture("missing.toml")}).exit_code == 1);
  CHECK(run({"nonsense"}).exit_code == 1);
  RunConfig neg;
  neg.subcommand = "residues";
  neg.input = fixture("interval.toml");
  neg.tol = -1;
  CHECK(run(neg).exit_code == 1);
}

TEST_CASE("schema accepts rational offsets") {
  const auto path = temp_file("rational.toml",
                              "[model]\nfunctionals = [{normal = [-1], offset = \"-1/2\"}, {normal = [1], offset = -1}]\n");
  const auto p = load_problem(path);
  CHECK(p.model.functionals()[0].offset == -0.5);
}
