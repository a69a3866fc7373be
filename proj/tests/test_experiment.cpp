#include <catch2/catch.hpp>

#include <cstdio>
#include <sstream>

#include "riesz/experiment.hpp"
#include "support/oracles.hpp"

using namespace riesz;

namespace {

ExperimentConfig tiny_convdiff(int computation, index_t n = 5, double re = 0.0) {
  ExperimentConfig cfg = ExperimentConfig::preset(computation);
  cfg.problem.kind = ExperimentProblem::Kind::convdiff;
  cfg.problem.n = n;
  cfg.problem.reynolds = re;
  cfg.contour = Contour{{0.0, 0.0}, 2.0, 8};
  cfg.m = 3;
  cfg.inner_tol = 1e-12;
  cfg.inner_maxit = 200;
  return cfg;
}

}  // namespace

TEST_CASE("presets encode the experiment defaults") {
  CHECK(ExperimentConfig::preset(1).resolved_outer_maxit(100) == 100000);
  for (int id = 2; id <= 8; ++id) {
    CHECK(ExperimentConfig::preset(id).resolved_outer_maxit(100) == 1000);
  }
  CHECK(ExperimentConfig::preset(3).inner_maxit == 500);
  CHECK(ExperimentConfig::preset(4).inner_maxit == 1000);
  CHECK(ExperimentConfig::preset(5).inner_maxit == 500);
  CHECK(ExperimentConfig::preset(6).inner_maxit == 1000);
  CHECK(ExperimentConfig::preset(7).inner_random_init);
  CHECK(ExperimentConfig::preset(8).inner_random_init);
  CHECK_FALSE(ExperimentConfig::preset(3).inner_random_init);
  CHECK(ExperimentConfig::preset(5).cge_enabled);
  CHECK(ExperimentConfig::preset(6).cge_enabled);
  CHECK_FALSE(ExperimentConfig::preset(4).cge_enabled);
  CHECK(ExperimentConfig::preset(3).inner_tol == 1e-15);
  CHECK(ExperimentConfig::preset(3).outer_tol == 1e-7);
  CHECK_THROWS_AS(ExperimentConfig::preset(9), std::invalid_argument);
}

TEST_CASE("computation #1 solves the plain system") {
  auto report = run_computation(tiny_convdiff(1));
  REQUIRE(report.stage("problem") != nullptr);
  REQUIRE(report.stage("solve") != nullptr);
  const StageReport& solve = *report.stage("solve");
  CHECK(solve.flag("converged"));
  CHECK(solve.number("relres2") < 1e-7);
  CHECK(solve.number("relerr") < 1e-5);
  CHECK(report.stage("problem")->number("nnz") == 5 * 25 - 4 * 5);
}

TEST_CASE("computation #2 deflates with exact eigenvectors") {
  auto cfg = tiny_convdiff(2, 3);
  auto report = run_computation(cfg);
  REQUIRE(report.stage("eig") != nullptr);
  CHECK(report.stage("eig")->number("inside_count") == 1);  // Laplacian 3x3: only 1.1716 < 2
  REQUIRE(report.stage("solve") != nullptr);
  CHECK(report.stage("solve")->flag("converged"));
  CHECK(report.stage("solve")->number("relerr") < 1e-5);
  CHECK(report.stage("solve")->number("relres1") < 1e-6);
  CHECK(report.stage("solve")->number("relres2") < 1e-6);
}

TEST_CASE("computation #2 respects the dense-eigenvector size gate") {
  auto cfg = tiny_convdiff(2, 4);
  cfg.eig_gate = 5;  // N = 16 > 5
  auto report = run_computation(cfg);
  REQUIRE(report.stage("eig") != nullptr);
  CHECK(report.stage("eig")->text("note").find("not computed") != std::string::npos);
  CHECK(report.stage("solve") == nullptr);
}

TEST_CASE("computation #3 runs the quadrature pipeline") {
  auto report = run_computation(tiny_convdiff(3));
  REQUIRE(report.stage("shifted_systems") != nullptr);
  const StageReport& sh = *report.stage("shifted_systems");
  CHECK(sh.number("systems") == 3 * 8);
  CHECK(sh.number("flagged") == 0);
  CHECK(sh.number("relres_min") <= sh.number("relres_max"));
  REQUIRE(report.stage("subspace") != nullptr);
  CHECK(report.stage("subspace")->number("cd_z") >= 1.0);
  REQUIRE(report.stage("deflate") != nullptr);
  CHECK(report.stage("deflate")->number("cd_m") >= 1.0);
  REQUIRE(report.stage("solve") != nullptr);
  const StageReport& solve = *report.stage("solve");
  CHECK(solve.flag("converged"));
  // converged deflated runs confirm the true residual
  CHECK(solve.number("relres2") < 10.0 * report.config.outer_tol);
  CHECK(solve.number("relerr") < 1e-4);
}

TEST_CASE("computation #5 inserts the CGE stage") {
  auto report = run_computation(tiny_convdiff(5));
  REQUIRE(report.stage("cge") != nullptr);
  CHECK(report.stage("cge")->number("rk") >= 1);
  REQUIRE(report.stage("solve") != nullptr);
  CHECK(report.stage("solve")->flag("converged"));
}

TEST_CASE("computation #7 uses random inner initial guesses") {
  auto report = run_computation(tiny_convdiff(7));
  REQUIRE(report.stage("solve") != nullptr);
  CHECK(report.stage("solve")->flag("converged"));
}

TEST_CASE("replaying a config reproduces iteration counts exactly") {
  auto cfg = tiny_convdiff(3);
  cfg.seed = 777;
  auto r1 = run_computation(cfg);
  auto r2 = run_computation(cfg);
  CHECK(r1.stage("solve")->number("iterations") == r2.stage("solve")->number("iterations"));
  CHECK(r1.stage("shifted_systems")->number("relres_max") ==
        r2.stage("shifted_systems")->number("relres_max"));
}

TEST_CASE("a capped run is reported as diverged, with sentinels intact") {
  auto cfg = tiny_convdiff(1, 6, 8000.0);
  cfg.outer_maxit = 2;
  auto report = run_computation(cfg);
  const StageReport& solve = *report.stage("solve");
  CHECK_FALSE(solve.flag("converged"));
  CHECK(solve.number("iterations") == 2);
  std::ostringstream out;
  report_emit(report, "json", out);
  CHECK(out.str().find("\"converged\": false") != std::string::npos);
}

TEST_CASE("json reports round-trip field-identically") {
  auto cfg = tiny_convdiff(5);
  cfg.problem.ilu0 = false;
  auto report = run_computation(cfg);
  // plant a non-finite sentinel to cover that path
  report.stages.back().put("planted_inf", std::numeric_limits<double>::infinity());
  const nlohmann::json j1 = to_json(report);
  const ExperimentReport back = report_from_json(j1);
  const nlohmann::json j2 = to_json(back);
  CHECK(j1 == j2);
}

TEST_CASE("csv has one row per stage") {
  auto report = run_computation(tiny_convdiff(3));
  std::ostringstream out;
  report_emit(report, "csv", out);
  std::istringstream in(out.str());
  std::string line;
  index_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
  }
  CHECK(rows == report.stages.size() + 1);  // header + stages
  CHECK_THROWS(report_emit(report, "yaml", out));
}

TEST_CASE("csv fields with separators are quoted") {
  auto report = run_computation(tiny_convdiff(1));
  report.stages.back().put("note", std::string("a, tricky \"value\""));
  std::ostringstream out;
  report_emit(report, "csv", out);
  CHECK(out.str().find("\"a, tricky \"\"value\"\"\"") != std::string::npos);
  std::istringstream in(out.str());
  std::string line;
  index_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
  }
  CHECK(rows == report.stages.size() + 1);
}

TEST_CASE("matrix-market problems run with and without ILU(0)") {
  const std::string path = "experiment_test_tmp.mtx";
  auto a = oracles::random_sparse(24, 0.2, 321, 6.0, /*complex_entries=*/false);
  write_matrix_market(path, a);

  ExperimentConfig cfg = ExperimentConfig::preset(1);
  cfg.problem.kind = ExperimentProblem::Kind::mmfile;
  cfg.problem.path = path;
  cfg.outer_solver = SolverKind::mbicg;
  auto report = run_computation(cfg);
  CHECK(report.stage("problem")->number("stored_entries") == a.nnz());
  CHECK(report.stage("solve")->flag("converged"));
  CHECK(report.stage("solve")->number("relerr") < 1e-5);

  ExperimentConfig cfg6 = ExperimentConfig::preset(6);
  cfg6.problem = cfg.problem;
  cfg6.problem.ilu0 = true;
  cfg6.contour = Contour{{0.0, 0.0}, 0.9, 8};
  cfg6.m = 4;
  cfg6.inner_tol = 1e-12;
  cfg6.inner_maxit = 300;
  cfg6.inner_solver = SolverKind::mbicg;
  cfg6.outer_solver = SolverKind::mbicg;
  auto report6 = run_computation(cfg6);
  REQUIRE(report6.stage("problem")->has("ilu0_patched_pivots"));
  REQUIRE(report6.stage("cge") != nullptr);
  REQUIRE(report6.stage("solve") != nullptr);
  CHECK(report6.stage("solve")->flag("converged"));
  CHECK(report6.stage("solve")->has("relres_original"));
  std::remove(path.c_str());
}

TEST_CASE("config json round trip") {
  auto cfg = tiny_convdiff(8, 7, 1500.0);
  cfg.problem.ilu0 = true;
  cfg.outer_solver = SolverKind::mbicg;
  cfg.seed = 9876;
  const ExperimentConfig back = config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
}
