#pragma once

#include <chrono>
#include <map>
#include <ostream>

#include <json.hpp>

#include "riesz/cge.hpp"
#include "riesz/deflation.hpp"
#include "riesz/eigtools.hpp"
#include "riesz/ilu0.hpp"
#include "riesz/mmio.hpp"
#include "riesz/problems.hpp"
#include "riesz/spectral.hpp"

namespace riesz {

using MetricValue = std::variant<double, std::int64_t, bool, std::string>;

/// One pipeline stage of an experiment run. Non-finite numerics are
/// serialized as explicit "inf"/"nan" sentinels; metrics that were skipped
/// carry the string "not computed".
struct StageReport {
  std::string name;
  double wall_s = 0.0;
  std::map<std::string, MetricValue> metrics;

  void put(const std::string& key, double v) { metrics[key] = v; }
  void put(const std::string& key, index_t v) { metrics[key] = static_cast<std::int64_t>(v); }
  void put(const std::string& key, int v) { metrics[key] = static_cast<std::int64_t>(v); }
  void put(const std::string& key, bool v) { metrics[key] = v; }
  void put(const std::string& key, const std::string& v) { metrics[key] = v; }
  void put(const std::string& key, const char* v) { metrics[key] = std::string(v); }

  bool has(const std::string& key) const { return metrics.count(key) > 0; }
  double number(const std::string& key) const {
    const MetricValue& v = metrics.at(key);
    if (std::holds_alternative<double>(v)) { return std::get<double>(v); }
    if (std::holds_alternative<std::int64_t>(v)) {
      return static_cast<double>(std::get<std::int64_t>(v));
    }
    throw std::runtime_error("stage metric '" + key + "' is not numeric");
  }
  bool flag(const std::string& key) const { return std::get<bool>(metrics.at(key)); }
  std::string text(const std::string& key) const { return std::get<std::string>(metrics.at(key)); }
};

struct ExperimentProblem {
  enum class Kind { convdiff, mmfile };
  Kind kind = Kind::convdiff;
  index_t n = 99;           // convdiff interior points per axis
  double reynolds = 8000.0;
  std::string path;         // mmfile source
  bool ilu0 = false;        // precondition with ILU(0), mahindas style
};

/// Canned experiment presets #1..#8. outer_maxit = 0
/// resolves at run time to 10^3 N for #1 and 10 N for the rest.
struct ExperimentConfig {
  int computation = 1;
  ExperimentProblem problem;
  Contour contour{{0.0, 0.0}, 0.5, 16};
  index_t m = 10;
  SolverKind inner_solver = SolverKind::gmres;
  double inner_tol = 1e-15;
  index_t inner_maxit = 500;
  bool inner_random_init = false;
  SolverKind outer_solver = SolverKind::gmres;
  double outer_tol = 1e-7;
  index_t outer_maxit = 0;
  bool cge_enabled = false;
  double cge_alpha = 1e-8;
  double cge_tol = 1e-2;
  std::uint64_t seed = 1234;
  index_t threads = 1;
  index_t cond_budget = 8'000'000;  // skip cond2(Z) when N*m exceeds this
  index_t eig_gate = 2000;          // dense-eigenvector path (#2) size gate

  static ExperimentConfig preset(int computation) {
    require(computation >= 1 && computation <= 8, "preset: computation id must be in 1..8");
    ExperimentConfig cfg;
    cfg.computation = computation;
    switch (computation) {
      case 3:
      case 5:
      case 7:
        cfg.inner_maxit = 500;
        break;
      case 4:
      case 6:
      case 8:
        cfg.inner_maxit = 1000;
        break;
      default:
        break;
    }
    if (computation == 5 || computation == 6) {
      cfg.cge_enabled = true;
      cfg.cge_alpha = 1e-8;
      cfg.cge_tol = 1e-2;
    }
    if (computation == 7 || computation == 8) { cfg.inner_random_init = true; }
    return cfg;
  }

  index_t resolved_outer_maxit(index_t n) const {
    if (outer_maxit != 0) { return outer_maxit; }
    return computation == 1 ? 1000 * n : 10 * n;
  }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<StageReport> stages;

  const StageReport* stage(const std::string& name) const {
    for (const StageReport& s : stages) {
      if (s.name == name) { return &s; }
    }
    return nullptr;
  }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline DenseMatrix operator_to_dense(const LinearOperator& op) {
  DenseMatrix d(op.dim, op.dim);
  Vector e(op.dim, Scalar{0.0, 0.0});
  Vector col;
  for (index_t j = 0; j < op.dim; ++j) {
    e[j] = Scalar{1.0, 0.0};
    op.apply(e, col);
    d.set_col(j, col);
    e[j] = Scalar{0.0, 0.0};
  }
  return d;
}

inline std::string solver_name(SolverKind kind) {
  return kind == SolverKind::gmres ? "gmres" : "mbicg";
}

inline SolverKind solver_from_name(const std::string& name) {
  if (name == "gmres") { return SolverKind::gmres; }
  if (name == "mbicg") { return SolverKind::mbicg; }
  throw std::runtime_error("unknown solver '" + name + "'");
}

/// The assembled problem in solver space: op/rhs are the preconditioned
/// system when ILU(0) is on, and back_map returns to the original unknowns.
struct PreparedProblem {
  SparseMatrix a;
  LinearOperator op;
  Vector rhs;
  Vector b_original;
  std::optional<Ilu0Factors> ilu;

  Vector back_map(const Vector& x) const {
    return ilu ? ilu0_recover_solution(*ilu, x) : x;
  }
};

inline PreparedProblem prepare_problem(const ExperimentConfig& cfg, StageReport& stage) {
  PreparedProblem prep;
  if (cfg.problem.kind == ExperimentProblem::Kind::convdiff) {
    ConvDiffSpec spec;
    spec.interior = cfg.problem.n;
    spec.reynolds = cfg.problem.reynolds;
    prep.a = convdiff_assemble(spec);
    stage.put("problem", std::string("convdiff"));
    stage.put("grid_n", cfg.problem.n);
    stage.put("reynolds", cfg.problem.reynolds);
  } else {
    auto r = read_matrix_market(cfg.problem.path);
    if (r.is_sparse()) {
      prep.a = r.sparse();
    } else {
      // array files are accepted and densely converted
      const DenseMatrix& d = r.dense();
      std::vector<std::tuple<index_t, index_t, Scalar>> trip;
      for (index_t j = 0; j < d.cols; ++j) {
        for (index_t i = 0; i < d.rows; ++i) {
          if (d(i, j) != Scalar{0.0, 0.0}) { trip.emplace_back(i, j, d(i, j)); }
        }
      }
      prep.a = SparseMatrix::from_triplets(d.rows, d.cols, std::move(trip));
    }
    require(prep.a.n_rows == prep.a.n_cols, "experiment: matrix must be square");
    stage.put("problem", cfg.problem.path);
    stage.put("stored_entries", r.stored_entries);
    stage.put("expanded_entries", r.expanded_entries);
    for (const std::string& w : r.warnings) {
      stage.put("warning", w);
    }
  }
  stage.put("n", prep.a.n_rows);
  stage.put("nnz", prep.a.nnz());

  prep.b_original = rhs_ones(prep.a);
  if (cfg.problem.ilu0) {
    Ilu0Factors f = ilu0_factor(prep.a);
    stage.put("ilu0_patched_pivots", f.patched_pivots.size());
    prep.rhs = ilu0_transform_rhs(f, prep.b_original);
    prep.op = ilu0_operator(f, prep.a);
    prep.ilu = std::move(f);
  } else {
    prep.op = make_operator(prep.a);
    prep.rhs = prep.b_original;
  }
  return prep;
}

inline double relative_error_vs_ones(const Vector& x) {
  const Vector ones(x.size(), Scalar{1.0, 0.0});
  return norm2(subtract(x, ones)) / norm2(ones);
}

inline void record_solution(const PreparedProblem& prep, const Vector& x_solved,
                            StageReport& stage) {
  const Vector x = prep.back_map(x_solved);
  stage.put("relerr", relative_error_vs_ones(x));
  if (prep.ilu) {
    const double bn = norm2(prep.b_original);
    stage.put("relres_original", norm2(subtract(prep.b_original, spmv(prep.a, x))) / bn);
  }
}

}  // namespace detail

/// Runs one of the experiment presets #1..#8 end to end. Stage failures
/// are recorded in the report; the pipeline continues where the deflated
/// algorithm permits and stops otherwise.
inline ExperimentReport run_computation(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.config = cfg;

  StageReport problem_stage;
  problem_stage.name = "problem";
  detail::Stopwatch prep_watch;
  detail::PreparedProblem prep = detail::prepare_problem(cfg, problem_stage);
  problem_stage.wall_s = prep_watch.seconds();
  report.stages.push_back(std::move(problem_stage));

  const index_t n = prep.op.dim;
  SolverConfig outer;
  outer.tol = cfg.outer_tol;
  outer.maxit = cfg.resolved_outer_maxit(n);

  auto record_inner = [](StageReport& st, const SolveReport& rep) {
    st.put("iterations", rep.iterations);
    st.put("converged", rep.converged);
    st.put("breakdown", rep.breakdown);
    st.put("best_relres", rep.best_relres);
  };

  if (cfg.computation == 1) {
    StageReport st;
    st.name = "solve";
    st.put("solver", detail::solver_name(cfg.outer_solver));
    detail::Stopwatch watch;
    SolveReport rep = run_solver(cfg.outer_solver, prep.op, prep.rhs, outer);
    st.wall_s = watch.seconds();
    record_inner(st, rep);
    const double bn = norm2(prep.rhs);
    st.put("relres2", bn == 0.0 ? 0.0 : norm2(subtract(prep.rhs, prep.op.apply(rep.x))) / bn);
    detail::record_solution(prep, rep.x, st);
    report.stages.push_back(std::move(st));
    return report;
  }

  // Computations #2..#8 build a deflation subspace first.
  DenseMatrix z;
  bool have_z = false;
  if (cfg.computation == 2) {
    StageReport st;
    st.name = "eig";
    detail::Stopwatch watch;
    if (n > cfg.eig_gate) {
      st.put("note", "not computed: dimension exceeds the dense-eigenvector gate");
      st.wall_s = watch.seconds();
      report.stages.push_back(std::move(st));
      return report;
    }
    const DenseMatrix dense = prep.ilu ? detail::operator_to_dense(prep.op) : to_dense(prep.a);
    EigenvectorsResult vecs = eigenvectors_inside(dense, cfg.contour, cfg.seed);
    st.put("inside_count", vecs.values.size());
    st.put("inverse_iteration_warnings", vecs.warnings.size());
    st.wall_s = watch.seconds();
    report.stages.push_back(std::move(st));
    if (vecs.values.empty()) { return report; }
    z = std::move(vecs.vectors);
    have_z = true;
  } else {
    SubspaceJob job;
    job.op = prep.op;
    job.probes = randn_matrix(n, cfg.m, cfg.seed);
    job.contour = cfg.contour;
    job.inner_solver = cfg.inner_solver;
    job.inner.tol = cfg.inner_tol;
    job.inner.maxit = cfg.inner_maxit;
    job.random_initial_guess = cfg.inner_random_init;
    job.seed = cfg.seed;
    job.threads = cfg.threads;

    StageReport st;
    st.name = "shifted_systems";
    st.put("solver", detail::solver_name(cfg.inner_solver));
    st.put("m", cfg.m);
    st.put("q", cfg.contour.order);
    detail::Stopwatch watch;
    SubspaceResult sub = compute_subspace(job);
    st.wall_s = watch.seconds();
    st.put("systems", sub.stats.systems);
    st.put("flagged", sub.stats.flagged);
    st.put("relres_min", sub.stats.relres_min);
    st.put("relres_max", sub.stats.relres_max);
    report.stages.push_back(std::move(st));

    StageReport zs;
    zs.name = "subspace";
    detail::Stopwatch zwatch;
    if (n * cfg.m <= cfg.cond_budget) {
      zs.put("cd_z", cond2(sub.z));
    } else {
      zs.put("cd_z", "not computed");
    }
    zs.wall_s = zwatch.seconds();
    report.stages.push_back(std::move(zs));
    z = std::move(sub.z);
    have_z = true;
  }

  if (have_z && cfg.cge_enabled) {
    StageReport st;
    st.name = "cge";
    st.put("alpha", cfg.cge_alpha);
    st.put("tol_cge", cfg.cge_tol);
    detail::Stopwatch watch;
    CgeResult r = cge(z, CgeParams{cfg.cge_alpha, cfg.cge_tol});
    st.put("rk", r.rank);
    if (r.rank > 0 && n * r.rank <= cfg.cond_budget) {
      st.put("cd_z_clean", cond2(r.z));
    } else {
      st.put("cd_z_clean", "not computed");
    }
    st.wall_s = watch.seconds();
    report.stages.push_back(std::move(st));
    if (r.rank == 0) { return report; }
    z = std::move(r.z);
  }

  StageReport deflate_stage;
  deflate_stage.name = "deflate";
  deflate_stage.put("m_effective", z.cols);
  detail::Stopwatch basis_watch;
  DeflationBasis basis;
  try {
    basis = build_basis(prep.op, std::move(z));
  } catch (const std::exception& e) {
    deflate_stage.put("error", std::string(e.what()));
    deflate_stage.wall_s = basis_watch.seconds();
    report.stages.push_back(std::move(deflate_stage));
    return report;
  }
  DenseMatrix coarse = matmul_adjoint_left(basis.columns, basis.image);
  deflate_stage.put("cd_m", cond2(coarse));
  deflate_stage.wall_s = basis_watch.seconds();
  report.stages.push_back(std::move(deflate_stage));

  StageReport st;
  st.name = "solve";
  st.put("solver", detail::solver_name(cfg.outer_solver));
  detail::Stopwatch watch;
  DeflatedSolution sol = deflated_solve(basis, prep.rhs, cfg.outer_solver, outer);
  st.wall_s = watch.seconds();
  record_inner(st, sol.inner);
  st.put("relres1", sol.relres1);
  st.put("relres2", sol.relres2);
  detail::record_solution(prep, sol.x, st);
  report.stages.push_back(std::move(st));
  return report;
}

// ---- report serialization ----------------------------------------------

namespace detail {

inline nlohmann::json metric_to_json(const MetricValue& v) {
  if (std::holds_alternative<double>(v)) {
    const double d = std::get<double>(v);
    if (std::isnan(d)) { return "nan"; }
    if (std::isinf(d)) { return d > 0 ? "inf" : "-inf"; }
    return d;
  }
  if (std::holds_alternative<std::int64_t>(v)) { return std::get<std::int64_t>(v); }
  if (std::holds_alternative<bool>(v)) { return std::get<bool>(v); }
  return std::get<std::string>(v);
}

inline MetricValue metric_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) { return j.get<bool>(); }
  if (j.is_number_integer()) { return j.get<std::int64_t>(); }
  if (j.is_number_float()) { return j.get<double>(); }
  const std::string s = j.get<std::string>();
  if (s == "inf") { return std::numeric_limits<double>::infinity(); }
  if (s == "-inf") { return -std::numeric_limits<double>::infinity(); }
  if (s == "nan") { return std::numeric_limits<double>::quiet_NaN(); }
  return s;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) { return s; }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') { out += '"'; }
    out += c;
  }
  out += '"';
  return out;
}

inline std::string metric_to_csv(const MetricValue& v) {
  if (std::holds_alternative<double>(v)) {
    const double d = std::get<double>(v);
    if (std::isnan(d)) { return "nan"; }
    if (std::isinf(d)) { return d > 0 ? "inf" : "-inf"; }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
  }
  if (std::holds_alternative<std::int64_t>(v)) { return std::to_string(std::get<std::int64_t>(v)); }
  if (std::holds_alternative<bool>(v)) { return std::get<bool>(v) ? "true" : "false"; }
  return csv_quote(std::get<std::string>(v));
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["computation"] = cfg.computation;
  j["problem"] = {
      {"kind", cfg.problem.kind == ExperimentProblem::Kind::convdiff ? "convdiff" : "mmfile"},
      {"n", cfg.problem.n},
      {"reynolds", cfg.problem.reynolds},
      {"path", cfg.problem.path},
      {"ilu0", cfg.problem.ilu0}};
  j["contour"] = {{"center_re", cfg.contour.center.real()},
                  {"center_im", cfg.contour.center.imag()},
                  {"radius", cfg.contour.radius},
                  {"q", cfg.contour.order}};
  j["m"] = cfg.m;
  j["inner"] = {{"solver", detail::solver_name(cfg.inner_solver)},
                {"tol", cfg.inner_tol},
                {"maxit", cfg.inner_maxit},
                {"random_init", cfg.inner_random_init}};
  j["outer"] = {{"solver", detail::solver_name(cfg.outer_solver)},
                {"tol", cfg.outer_tol},
                {"maxit", cfg.outer_maxit}};
  j["cge"] = {{"enabled", cfg.cge_enabled}, {"alpha", cfg.cge_alpha}, {"tol_cge", cfg.cge_tol}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.computation = j.at("computation").get<int>();
  const auto& p = j.at("problem");
  cfg.problem.kind = p.at("kind").get<std::string>() == "convdiff"
                         ? ExperimentProblem::Kind::convdiff
                         : ExperimentProblem::Kind::mmfile;
  cfg.problem.n = p.at("n").get<index_t>();
  cfg.problem.reynolds = p.at("reynolds").get<double>();
  cfg.problem.path = p.at("path").get<std::string>();
  cfg.problem.ilu0 = p.at("ilu0").get<bool>();
  const auto& c = j.at("contour");
  cfg.contour.center = Scalar{c.at("center_re").get<double>(), c.at("center_im").get<double>()};
  cfg.contour.radius = c.at("radius").get<double>();
  cfg.contour.order = c.at("q").get<index_t>();
  cfg.m = j.at("m").get<index_t>();
  const auto& in = j.at("inner");
  cfg.inner_solver = detail::solver_from_name(in.at("solver").get<std::string>());
  cfg.inner_tol = in.at("tol").get<double>();
  cfg.inner_maxit = in.at("maxit").get<index_t>();
  cfg.inner_random_init = in.at("random_init").get<bool>();
  const auto& out = j.at("outer");
  cfg.outer_solver = detail::solver_from_name(out.at("solver").get<std::string>());
  cfg.outer_tol = out.at("tol").get<double>();
  cfg.outer_maxit = out.at("maxit").get<index_t>();
  const auto& g = j.at("cge");
  cfg.cge_enabled = g.at("enabled").get<bool>();
  cfg.cge_alpha = g.at("alpha").get<double>();
  cfg.cge_tol = g.at("tol_cge").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.threads = j.at("threads").get<index_t>();
  return cfg;
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["config"] = to_json(report.config);
  j["stages"] = nlohmann::json::array();
  for (const StageReport& s : report.stages) {
    nlohmann::json js;
    js["name"] = s.name;
    js["wall_s"] = s.wall_s;
    js["metrics"] = nlohmann::json::object();
    for (const auto& [k, v] : s.metrics) {
      js["metrics"][k] = detail::metric_to_json(v);
    }
    j["stages"].push_back(std::move(js));
  }
  return j;
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  report.config = config_from_json(j.at("config"));
  for (const auto& js : j.at("stages")) {
    StageReport s;
    s.name = js.at("name").get<std::string>();
    s.wall_s = js.at("wall_s").get<double>();
    for (const auto& [k, v] : js.at("metrics").items()) {
      s.metrics[k] = detail::metric_from_json(v);
    }
    report.stages.push_back(std::move(s));
  }
  return report;
}

/// CSV flattening: one row per stage, columns are the union of the metric
/// keys in sorted order.
inline void report_to_csv(const ExperimentReport& report, std::ostream& out) {
  std::vector<std::string> keys;
  for (const StageReport& s : report.stages) {
    for (const auto& [k, v] : s.metrics) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) { keys.push_back(k); }
    }
  }
  std::sort(keys.begin(), keys.end());
  out << "stage,wall_s";
  for (const std::string& k : keys) {
    out << "," << k;
  }
  out << "\n";
  for (const StageReport& s : report.stages) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", s.wall_s);
    out << s.name << "," << buf;
    for (const std::string& k : keys) {
      out << ",";
      auto it = s.metrics.find(k);
      if (it != s.metrics.end()) { out << detail::metric_to_csv(it->second); }
    }
    out << "\n";
  }
}

/// Canonical emission: JSON is the schema of record, CSV the flattened view.
inline void report_emit(const ExperimentReport& report, const std::string& format,
                        std::ostream& out) {
  if (format == "json") {
    out << to_json(report).dump(2) << "\n";
  } else if (format == "csv") {
    report_to_csv(report, out);
  } else {
    throw std::runtime_error("report_emit: unknown format '" + format + "'");
  }
  if (!out) { throw std::runtime_error("report_emit: write failed"); }
}

inline void report_emit(const ExperimentReport& report, const std::string& format,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) { throw std::runtime_error("report_emit: cannot open '" + path + "'"); }
  report_emit(report, format, out);
}

}  // namespace riesz
