// Experiment harness for the deflated-Krylov / spectral-projection library.
//
// Subcommands: gen-problem, eig, compute-z, cge, solve, run, report.
// Every subcommand accepts --config FILE with flat key=value lines; command
// line flags override the file. Exit code 0 means the pipeline completed
// (divergence is a result, not an error); configuration and I/O errors
// exit nonzero.

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <set>

#include "riesz/experiment.hpp"

using namespace riesz;

namespace {

struct ProblemFlags {
  std::string matrix;
  std::size_t n = 99;
  double reynolds = 8000.0;
  bool ilu0 = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--matrix", matrix, "Matrix Market file for the system matrix");
    cmd->add_option("--n", n, "convection-diffusion interior grid points per axis");
    cmd->add_option("--re", reynolds, "convection-diffusion Reynolds number");
    cmd->add_flag("--ilu0", ilu0,
                  "precondition with ILU(0): solve the split system L^-1 Pr A U^-1");
  }

  ExperimentProblem to_problem() const {
    ExperimentProblem p;
    if (!matrix.empty()) {
      p.kind = ExperimentProblem::Kind::mmfile;
      p.path = matrix;
    } else {
      p.kind = ExperimentProblem::Kind::convdiff;
      p.n = n;
      p.reynolds = reynolds;
    }
    p.ilu0 = ilu0;
    return p;
  }
};

struct ContourFlags {
  double center_re = 0.0;
  double center_im = 0.0;
  double radius = 0.5;
  std::size_t q = 16;

  void attach(CLI::App* cmd) {
    cmd->add_option("--center-re", center_re, "contour center, real part");
    cmd->add_option("--center-im", center_im, "contour center, imaginary part");
    cmd->add_option("--radius", radius, "contour radius");
    cmd->add_option("--q", q, "Legendre-Gauss quadrature order");
  }

  Contour to_contour() const { return Contour{{center_re, center_im}, radius, q}; }
};

SolverKind parse_solver(const std::string& name) { return detail::solver_from_name(name); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) { return ""; }
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Flat key=value config support: keys become --key flags appended after
/// the command line, so flags given explicitly override the file.
std::vector<std::string> apply_flat_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) { return args; }
  std::ifstream in(path);
  if (!in) { throw std::runtime_error("cannot open config file '" + path + "'"); }
  std::set<std::string> given;
  for (const std::string& a : args) {
    if (a.rfind("--", 0) == 0) { given.insert(a.substr(0, a.find('='))); }
  }
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') { continue; }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config file: expected key=value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) { throw std::runtime_error("config file: empty key in '" + stripped + "'"); }
    const std::string flag = "--" + key;
    if (given.count(flag) > 0) { continue; }
    if (value == "true" && (key == "ilu0" || key == "cge")) {
      args.push_back(flag);
    } else {
      args.push_back(flag + "=" + value);
    }
  }
  return args;
}

SparseMatrix load_sparse(const std::string& path) {
  auto r = read_matrix_market(path);
  for (const std::string& w : r.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (r.is_sparse()) {
    std::cerr << path << ": " << r.sparse().n_rows << "x" << r.sparse().n_cols << ", "
              << r.stored_entries << " stored entries, " << r.expanded_entries
              << " after symmetry expansion\n";
    return r.sparse();
  }
  const DenseMatrix& d = r.dense();
  std::vector<std::tuple<index_t, index_t, Scalar>> trip;
  for (index_t j = 0; j < d.cols; ++j) {
    for (index_t i = 0; i < d.rows; ++i) {
      if (d(i, j) != Scalar{0.0, 0.0}) { trip.emplace_back(i, j, d(i, j)); }
    }
  }
  return SparseMatrix::from_triplets(d.rows, d.cols, std::move(trip));
}

DenseMatrix load_dense(const std::string& path) {
  auto r = read_matrix_market(path);
  if (!r.is_sparse()) { return r.dense(); }
  return to_dense(r.sparse());
}

void emit_report(const ExperimentReport& report, const std::string& format,
                 const std::string& path) {
  if (path.empty()) {
    report_emit(report, format, std::cout);
  } else {
    report_emit(report, format, path);
    std::cerr << "report written to " << path << "\n";
  }
}

void print_solve_summary(const SolveReport& rep) {
  std::cerr << "iterations " << rep.iterations << ", converged " << (rep.converged ? "yes" : "no")
            << ", best relres " << rep.best_relres;
  if (rep.breakdown) { std::cerr << " (breakdown)"; }
  std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deflated Krylov solvers with a contour-integral spectral projector"};
  app.require_subcommand(1);

  // ---- gen-problem ---------------------------------------------------------
  std::string config_path;  // read by apply_flat_config before CLI11 parses
  auto* gen = app.add_subcommand("gen-problem", "assemble the convection-diffusion test matrix");
  gen->add_option("--config", config_path, "flat key=value config file; flags override it");
  std::size_t gen_n = 99;
  double gen_re = 8000.0;
  std::string gen_out;
  std::string gen_rhs_out;
  gen->add_option("--n", gen_n, "interior grid points per axis");
  gen->add_option("--re", gen_re, "Reynolds number");
  gen->add_option("--out", gen_out, "output Matrix Market path")->required();
  gen->add_option("--rhs-out", gen_rhs_out, "also write b = A*1 as an array file");

  // ---- eig -----------------------------------------------------------------
  auto* eig = app.add_subcommand("eig", "dense eigenvalues, interior count, CSV spectrum dump");
  eig->add_option("--config", config_path, "flat key=value config file; flags override it");
  ProblemFlags eig_problem;
  ContourFlags eig_contour;
  eig_problem.attach(eig);
  eig_contour.attach(eig);
  std::string eig_csv;
  eig->add_option("--csv-out", eig_csv, "write the spectrum as 're,im' lines");

  // ---- compute-z -----------------------------------------------------------
  auto* cz = app.add_subcommand("compute-z", "build the deflation subspace by contour quadrature");
  cz->add_option("--config", config_path, "flat key=value config file; flags override it");
  ProblemFlags cz_problem;
  ContourFlags cz_contour;
  cz_problem.attach(cz);
  cz_contour.attach(cz);
  std::size_t cz_m = 10;
  std::string cz_inner = "gmres";
  double cz_tol = 1e-15;
  std::size_t cz_maxit = 500;
  std::string cz_init = "zero";
  std::uint64_t cz_seed = 1234;
  std::size_t cz_threads = 1;
  std::string cz_out;
  std::string cz_report;
  std::string cz_format = "json";
  cz->add_option("--m", cz_m, "number of probe columns");
  cz->add_option("--inner-solver", cz_inner, "gmres|mbicg")
      ->check(CLI::IsMember({"gmres", "mbicg"}));
  cz->add_option("--inner-tol", cz_tol, "shifted-solve stopping tolerance");
  cz->add_option("--inner-maxit", cz_maxit, "shifted-solve iteration cap");
  cz->add_option("--inner-init", cz_init, "zero|random initial guesses")
      ->check(CLI::IsMember({"zero", "random"}));
  cz->add_option("--seed", cz_seed, "seed for probes and random initial guesses");
  cz->add_option("--threads", cz_threads, "parallel shifted solves");
  cz->add_option("--z-out", cz_out, "cache Z as a Matrix Market array file")->required();
  cz->add_option("--report", cz_report, "write the job report here");
  cz->add_option("--format", cz_format, "report format")->check(CLI::IsMember({"json", "csv"}));

  // ---- cge -----------------------------------------------------------------
  auto* cg = app.add_subcommand("cge", "remove nearly dependent columns of a cached Z");
  cg->add_option("--config", config_path, "flat key=value config file; flags override it");
  std::string cg_in;
  std::string cg_out;
  double cg_alpha = 1e-8;
  double cg_tol = 1e-2;
  cg->add_option("--z-in", cg_in, "input Z (Matrix Market array)")->required();
  cg->add_option("--z-out", cg_out, "output for the selected columns")->required();
  cg->add_option("--alpha", cg_alpha, "zero-rank comparison parameter");
  cg->add_option("--tol-cge", cg_tol, "relative stopping tolerance");

  // ---- solve ---------------------------------------------------------------
  auto* sv = app.add_subcommand("solve", "solve A x = b, optionally deflated by a cached Z");
  sv->add_option("--config", config_path, "flat key=value config file; flags override it");
  ProblemFlags sv_problem;
  sv_problem.attach(sv);
  std::string sv_solver = "gmres";
  double sv_tol = 1e-7;
  std::size_t sv_maxit = 0;
  std::size_t sv_restart = 0;
  std::string sv_z;
  bool sv_cge = false;
  double sv_alpha = 1e-8;
  double sv_tolcge = 1e-2;
  std::string sv_report;
  std::string sv_format = "json";
  sv->add_option("--solver", sv_solver, "gmres|mbicg")->check(CLI::IsMember({"gmres", "mbicg"}));
  sv->add_option("--tol", sv_tol, "relative-residual stopping tolerance");
  sv->add_option("--maxit", sv_maxit, "iteration cap (0 = 10 N)");
  sv->add_option("--restart", sv_restart, "GMRES restart cycle (0 = full)");
  sv->add_option("--z", sv_z, "deflate with this cached Z (Matrix Market array)");
  sv->add_flag("--cge", sv_cge, "clean the cached Z with complete-pivot elimination first");
  sv->add_option("--alpha", sv_alpha, "cge zero-rank parameter");
  sv->add_option("--tol-cge", sv_tolcge, "cge stopping tolerance");
  sv->add_option("--report", sv_report, "write a JSON/CSV report here");
  sv->add_option("--format", sv_format, "report format")->check(CLI::IsMember({"json", "csv"}));

  // ---- run -----------------------------------------------------------------
  auto* rn = app.add_subcommand("run", "run one of the experiment presets #1..#8");
  rn->add_option("--config", config_path, "flat key=value config file; flags override it");
  ProblemFlags rn_problem;
  ContourFlags rn_contour;
  rn_problem.attach(rn);
  rn_contour.attach(rn);
  int rn_id = 1;
  std::size_t rn_m = 10;
  std::string rn_solver = "gmres";
  std::string rn_inner_solver;
  std::string rn_outer_solver;
  double rn_inner_tol = 1e-15;
  std::size_t rn_inner_maxit = 0;
  double rn_outer_tol = 1e-7;
  std::size_t rn_outer_maxit = 0;
  double rn_alpha = 1e-8;
  double rn_tolcge = 1e-2;
  std::uint64_t rn_seed = 1234;
  std::size_t rn_threads = 1;
  std::string rn_report;
  std::string rn_format = "json";
  rn->add_option("--computation", rn_id, "preset id 1..8")->check(CLI::Range(1, 8));
  rn->add_option("--m", rn_m, "probe columns for the subspace");
  rn->add_option("--solver", rn_solver, "solver for both stages: gmres|mbicg")
      ->check(CLI::IsMember({"gmres", "mbicg"}));
  rn->add_option("--inner-solver", rn_inner_solver, "override the shifted-solve solver")
      ->check(CLI::IsMember({"gmres", "mbicg"}));
  rn->add_option("--outer-solver", rn_outer_solver, "override the deflated-solve solver")
      ->check(CLI::IsMember({"gmres", "mbicg"}));
  rn->add_option("--inner-tol", rn_inner_tol, "shifted-solve tolerance");
  rn->add_option("--inner-maxit", rn_inner_maxit, "shifted-solve cap (0 = preset)");
  rn->add_option("--outer-tol", rn_outer_tol, "outer tolerance");
  rn->add_option("--outer-maxit", rn_outer_maxit, "outer cap (0 = preset rule)");
  rn->add_option("--alpha", rn_alpha, "cge zero-rank parameter (#5, #6)");
  rn->add_option("--tol-cge", rn_tolcge, "cge stopping tolerance (#5, #6)");
  rn->add_option("--seed", rn_seed, "seed for probes and random initial guesses");
  rn->add_option("--threads", rn_threads, "parallel shifted solves");
  rn->add_option("--report", rn_report, "write the report here (default stdout)");
  rn->add_option("--format", rn_format, "report format")->check(CLI::IsMember({"json", "csv"}));

  // ---- report --------------------------------------------------------------
  auto* rp = app.add_subcommand("report", "re-emit a JSON report (json or csv)");
  rp->add_option("--config", config_path, "flat key=value config file; flags override it");
  std::string rp_in;
  std::string rp_out;
  std::string rp_format = "csv";
  rp->add_option("--in", rp_in, "input JSON report")->required();
  rp->add_option("--out", rp_out, "output path (default stdout)");
  rp->add_option("--format", rp_format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_flat_config(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      ConvDiffSpec spec;
      spec.interior = gen_n;
      spec.reynolds = gen_re;
      const SparseMatrix a = convdiff_assemble(spec);
      write_matrix_market(gen_out, a);
      std::cerr << "wrote " << a.n_rows << "x" << a.n_cols << " matrix (" << a.nnz()
                << " nonzeros) to " << gen_out << "\n";
      if (!gen_rhs_out.empty()) {
        const Vector b = rhs_ones(a);
        DenseMatrix col(b.size(), 1);
        col.set_col(0, b);
        write_matrix_market(gen_rhs_out, col);
        std::cerr << "wrote b = A*1 to " << gen_rhs_out << "\n";
      }
    } else if (*eig) {
      const SparseMatrix a = [&] {
        if (!eig_problem.matrix.empty()) { return load_sparse(eig_problem.matrix); }
        ConvDiffSpec spec;
        spec.interior = eig_problem.n;
        spec.reynolds = eig_problem.reynolds;
        return convdiff_assemble(spec);
      }();
      DenseMatrix dense;
      if (eig_problem.ilu0) {
        auto f = ilu0_factor(a);
        std::cerr << "ILU(0): " << f.patched_pivots.size() << " pivots patched to 1\n";
        dense = detail::operator_to_dense(ilu0_operator(std::move(f), a));
      } else {
        dense = to_dense(a);
      }
      const auto eigs = dense_eigenvalues(dense);
      const auto rep = spectrum_report(eigs, eig_contour.to_contour());
      std::cout << "eigenvalues: " << rep.eigenvalues.size() << "\n"
                << "inside circle((" << eig_contour.center_re << "," << eig_contour.center_im
                << "), " << eig_contour.radius << "): " << rep.inside_count << "\n"
                << "min distance to origin: " << rep.min_distance_to_origin << "\n";
      if (!eig_csv.empty()) {
        std::ofstream out(eig_csv);
        if (!out) { throw std::runtime_error("cannot open " + eig_csv); }
        char buf[64];
        for (Scalar e : rep.eigenvalues) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", e.real(), e.imag());
          out << buf;
        }
        std::cerr << "spectrum written to " << eig_csv << "\n";
      }
    } else if (*cz) {
      ExperimentConfig cfg;
      cfg.computation = cz_init == "random" ? 7 : 3;
      cfg.problem = cz_problem.to_problem();
      cfg.contour = cz_contour.to_contour();
      cfg.m = cz_m;
      cfg.inner_solver = parse_solver(cz_inner);
      cfg.inner_tol = cz_tol;
      cfg.inner_maxit = cz_maxit;
      cfg.inner_random_init = cz_init == "random";
      cfg.seed = cz_seed;
      cfg.threads = cz_threads;

      StageReport problem_stage;
      problem_stage.name = "problem";
      auto prep = detail::prepare_problem(cfg, problem_stage);
      SubspaceJob job;
      job.op = prep.op;
      job.probes = randn_matrix(prep.op.dim, cfg.m, cfg.seed);
      job.contour = cfg.contour;
      job.inner_solver = cfg.inner_solver;
      job.inner.tol = cfg.inner_tol;
      job.inner.maxit = cfg.inner_maxit;
      job.random_initial_guess = cfg.inner_random_init;
      job.seed = cfg.seed;
      job.threads = cfg.threads;
      auto sub = compute_subspace(job);
      write_matrix_market(cz_out, sub.z);
      std::cerr << "Z (" << sub.z.rows << "x" << sub.z.cols << ") cached to " << cz_out
                << "; relres range [" << sub.stats.relres_min << ", " << sub.stats.relres_max
                << "], " << sub.stats.flagged << " flagged\n";
      if (!cz_report.empty()) {
        ExperimentReport report;
        report.config = cfg;
        report.stages.push_back(std::move(problem_stage));
        StageReport st;
        st.name = "shifted_systems";
        st.put("m", cfg.m);
        st.put("q", cfg.contour.order);
        st.put("systems", sub.stats.systems);
        st.put("flagged", sub.stats.flagged);
        st.put("relres_min", sub.stats.relres_min);
        st.put("relres_max", sub.stats.relres_max);
        st.put("z_cache", cz_out);
        report.stages.push_back(std::move(st));
        emit_report(report, cz_format, cz_report);
      }
    } else if (*cg) {
      const DenseMatrix z = load_dense(cg_in);
      auto r = cge(z, CgeParams{cg_alpha, cg_tol});
      std::cout << "rank " << r.rank << " of " << z.cols << " columns\n";
      if (r.rank == 0) {
        std::cerr << "rank 0: nothing to write\n";
      } else {
        write_matrix_market(cg_out, r.z);
        std::cerr << "selected columns written to " << cg_out << "\n";
      }
    } else if (*sv) {
      ExperimentConfig cfg;
      cfg.problem = sv_problem.to_problem();
      StageReport problem_stage;
      problem_stage.name = "problem";
      auto prep = detail::prepare_problem(cfg, problem_stage);
      const index_t n = prep.op.dim;
      SolverConfig scfg;
      scfg.tol = sv_tol;
      scfg.maxit = sv_maxit == 0 ? 10 * n : sv_maxit;
      if (sv_restart > 0) { scfg.restart = sv_restart; }
      const SolverKind kind = parse_solver(sv_solver);

      ExperimentReport report;
      report.config = cfg;
      report.config.outer_solver = kind;
      report.config.outer_tol = sv_tol;
      report.config.outer_maxit = scfg.maxit;
      report.stages.push_back(std::move(problem_stage));

      StageReport st;
      st.name = "solve";
      st.put("solver", sv_solver);
      if (sv_z.empty()) {
        const SolveReport rep = run_solver(kind, prep.op, prep.rhs, scfg);
        print_solve_summary(rep);
        st.put("iterations", rep.iterations);
        st.put("converged", rep.converged);
        st.put("breakdown", rep.breakdown);
        st.put("best_relres", rep.best_relres);
        const double bn = norm2(prep.rhs);
        st.put("relres2",
               bn == 0.0 ? 0.0 : norm2(subtract(prep.rhs, prep.op.apply(rep.x))) / bn);
        detail::record_solution(prep, rep.x, st);
      } else {
        DenseMatrix z = load_dense(sv_z);
        if (sv_cge) {
          auto r = cge(z, CgeParams{sv_alpha, sv_tolcge});
          std::cerr << "cge kept " << r.rank << " of " << z.cols << " columns\n";
          if (r.rank == 0) { throw std::runtime_error("cge removed every column of Z"); }
          z = std::move(r.z);
          st.put("rk", r.rank);
        }
        auto basis = build_basis(prep.op, std::move(z));
        const DeflatedSolution sol = deflated_solve(basis, prep.rhs, kind, scfg);
        print_solve_summary(sol.inner);
        st.put("iterations", sol.inner.iterations);
        st.put("converged", sol.inner.converged);
        st.put("breakdown", sol.inner.breakdown);
        st.put("best_relres", sol.inner.best_relres);
        st.put("relres1", sol.relres1);
        st.put("relres2", sol.relres2);
        detail::record_solution(prep, sol.x, st);
      }
      report.stages.push_back(std::move(st));
      if (!sv_report.empty()) { emit_report(report, sv_format, sv_report); }
    } else if (*rn) {
      ExperimentConfig cfg = ExperimentConfig::preset(rn_id);
      cfg.problem = rn_problem.to_problem();
      cfg.contour = rn_contour.to_contour();
      cfg.m = rn_m;
      cfg.inner_solver = parse_solver(rn_inner_solver.empty() ? rn_solver : rn_inner_solver);
      cfg.outer_solver = parse_solver(rn_outer_solver.empty() ? rn_solver : rn_outer_solver);
      if (rn->count("--inner-tol") > 0) { cfg.inner_tol = rn_inner_tol; }
      if (rn_inner_maxit > 0) { cfg.inner_maxit = rn_inner_maxit; }
      if (rn->count("--outer-tol") > 0) { cfg.outer_tol = rn_outer_tol; }
      if (rn_outer_maxit > 0) { cfg.outer_maxit = rn_outer_maxit; }
      if (rn->count("--alpha") > 0) { cfg.cge_alpha = rn_alpha; }
      if (rn->count("--tol-cge") > 0) { cfg.cge_tol = rn_tolcge; }
      cfg.seed = rn_seed;
      cfg.threads = rn_threads;
      const ExperimentReport report = run_computation(cfg);
      emit_report(report, rn_format, rn_report);
      if (const StageReport* solve = report.stage("solve")) {
        std::cerr << "computation #" << rn_id << ": iterations "
                  << solve->number("iterations") << ", converged "
                  << (solve->flag("converged") ? "yes" : "no") << "\n";
      }
    } else if (*rp) {
      std::ifstream in(rp_in);
      if (!in) { throw std::runtime_error("cannot open " + rp_in); }
      nlohmann::json j;
      in >> j;
      const ExperimentReport report = report_from_json(j);
      if (rp_out.empty()) {
        report_emit(report, rp_format, std::cout);
      } else {
        report_emit(report, rp_format, rp_out);
        std::cerr << "report written to " << rp_out << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
