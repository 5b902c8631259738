#include "coarsen/cli.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

namespace coarsen::cli {
namespace {

using Json = nlohmann::ordered_json;

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

void write_eigenvalue_csv(const std::filesystem::path& path, const FunctionalMap& fm, const Eigen::VectorXd& err) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "index,lambda,lambda_tilde,relative_error\n";
  for (Index i = 0; i < err.size(); ++i) {
    out << i << ',' << format_double(fm.source_values[i]) << ',' << format_double(fm.target_values[i]) << ','
        << format_double(err[i]) << '\n';
  }
}

Json metrics_json(const FunctionalMap& fm, double norm_L, double norm_D) {
  Json j;
  j["norm_L"] = norm_L;
  j["norm_D"] = norm_D;
  j["k"] = fm.k();
  j["norm_convention"] = "square roots of the squared norms";
  j["eigenvalue_errors_csv_path"] = "eigenvalue_errors.csv";
  j["truncated_basis"] = fm.truncated;
  return j;
}

void write_evaluation(const std::filesystem::path& dir, const FunctionalMap& fm, double norm_L, double norm_D,
                      const Eigen::VectorXd& errors, const Json& extra) {
  Json j = metrics_json(fm, norm_L, norm_D);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  write_json(dir / "metrics.json", j);
  write_eigenvalue_csv(dir / "eigenvalue_errors.csv", fm, errors);
  mm_write_dense(dir / "fmap.mtx", fm.C);
}

Json clique_stats(const CliqueSet& cs) {
  return {{"count", cs.size()}, {"max", cs.max_block()}, {"min", cs.min_block()}, {"mean", cs.mean_block()}};
}

template <typename T>
void take(const Json& j, const char* key, T& target) {
  if (j.contains(key)) target = j.at(key).get<T>();
}

}  // namespace

void apply_config_json(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config " + path.string() + ": expected a JSON object");
  static const std::set<std::string> known = {"mesh", "out", "coarse", "rings", "eigs", "weighted", "clique_size",
                                              "rho0", "max_iter", "eps_abs", "eps_rel", "seed", "workers",
                                              "no_timing"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::runtime_error("config " + path.string() + ": unknown key '" + key + "'");
  }
  try {
    auto& c = config.coarsening;
    if (j.contains("mesh")) config.mesh = j.at("mesh").get<std::string>();
    if (j.contains("out")) config.out = j.at("out").get<std::string>();
    take(j, "coarse", c.coarse_count);
    take(j, "rings", c.rings);
    take(j, "eigs", c.eigs);
    take(j, "weighted", c.weighted);
    take(j, "clique_size", c.admm.clique_threshold);
    take(j, "rho0", c.admm.rho0);
    take(j, "max_iter", c.admm.max_iter);
    take(j, "eps_abs", c.admm.eps_abs);
    take(j, "eps_rel", c.admm.eps_rel);
    take(j, "seed", c.seed);
    take(j, "workers", c.admm.workers);
    if (j.contains("no_timing")) c.admm.record_timing = !j.at("no_timing").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
}

void validate(const RunConfig& config, Index fine_count) {
  const auto& c = config.coarsening;
  if (c.coarse_count < 1) throw std::invalid_argument("--coarse must be positive");
  if (c.coarse_count >= fine_count) {
    throw std::invalid_argument("--coarse " + std::to_string(c.coarse_count) + " must be smaller than the fine vertex count " +
                                std::to_string(fine_count));
  }
  if (c.rings < 1) throw std::invalid_argument("--rings must be at least 1");
  if (c.eigs < 1) throw std::invalid_argument("--eigs must be positive");
  c.admm.validate();
}

RowSelection read_restriction(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    const Json j = Json::parse(in);
    const auto n = j.at("fine_count").get<Index>();
    const auto samples = j.at("samples").get<std::vector<Index>>();
    for (Index s : samples) {
      if (s < 0 || s >= n) throw std::runtime_error(path.string() + ": sample index out of range");
    }
    return restriction(samples, n);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

int cmd_coarsen(const RunConfig& config, std::ostream& log) {
  const ObjLoad load = load_obj(config.mesh);
  if (load.dropped_faces > 0) log << "warning: dropped " << load.dropped_faces << " degenerate faces\n";
  validate(config, load.mesh.num_vertices());
  const FineOperator fine = prepare_fine(load.mesh);
  const CoarseningRun run = run_coarsening(fine, config.coarsening);
  for (const auto& w : run.warnings) log << "warning: " << w << '\n';

  const auto& dir = config.out;
  std::filesystem::create_directories(dir);
  mm_write(dir / "X.mtx", run.result.X);
  mm_write(dir / "Mtilde.mtx", SymSparse::diagonal(run.setup.coarse_mass));
  mm_write(dir / "L.mtx", fine.L);
  mm_write(dir / "M.mtx", SymSparse::diagonal(fine.mass));
  write_json(dir / "R.json", Json{{"fine_count", fine.L.size()},
                                  {"samples", run.setup.samples},
                                  {"assignment", run.setup.assignment}});
  write_evaluation(dir, run.fmap, run.norm_L, run.norm_D, run.eigenvalue_errors,
                   Json{{"objective", run.result.report.objective},
                        {"galerkin_objective", run.galerkin_objective},
                        {"weighted", config.coarsening.weighted},
                        {"rings", config.coarsening.rings}});
  write_trace_csv(dir / "trace.csv", run.result.report.history);
  write_report_json(dir / "report.json", run.result.report);

  const auto& rep = run.result.report;
  log << termination_name(rep.termination) << " after " << rep.iterations << " iterations, objective "
      << format_double(rep.objective) << " (Galerkin baseline " << format_double(run.galerkin_objective) << ")\n";
  if (!rep.certificate.passed) log << "warning: output certificate failed\n";
  return rep.termination == Termination::kConverged ? kExitOk : kExitMaxIter;
}

int cmd_eval(const EvalConfig& config, std::ostream& log) {
  const SymSparse L = mm_read(config.L);
  const SymSparse M = mm_read(config.M);
  const SymSparse X = mm_read(config.X);
  const SymSparse Mt = mm_read(config.Mtilde);
  const RowSelection R = read_restriction(config.R);
  if (M.size() != L.size() || Mt.size() != X.size() || R.rows() != X.size() || R.cols() != L.size()) {
    throw std::invalid_argument("eval: inconsistent dimensions (L " + std::to_string(L.size()) + ", M " +
                                std::to_string(M.size()) + ", X " + std::to_string(X.size()) + ", Mtilde " +
                                std::to_string(Mt.size()) + ", R " + std::to_string(R.rows()) + "x" +
                                std::to_string(R.cols()) + ")");
  }
  const Evaluation ev = evaluate(L, M.diagonal_values(), X, Mt.diagonal_values(), R, config.k);
  if (ev.fmap.truncated) log << "warning: bases differ in size; functional map truncated to k = " << ev.fmap.k() << '\n';
  std::filesystem::create_directories(config.out);
  write_evaluation(config.out, ev.fmap, ev.norm_L, ev.norm_D, ev.eigenvalue_errors, Json::object());
  log << "norm_L " << format_double(ev.norm_L) << ", norm_D " << format_double(ev.norm_D) << '\n';
  return kExitOk;
}

int cmd_chordal_info(const ChordalInfoConfig& config, std::ostream& out, std::ostream& log) {
  if (config.pattern.has_value() == config.mesh.has_value()) {
    throw std::invalid_argument("chordal-info: give exactly one of --pattern or --mesh");
  }
  if (config.clique_size < 1) throw std::invalid_argument("--clique-size must be positive");
  SymPattern E;
  if (config.pattern) {
    E = mm_read(*config.pattern).pattern;
  } else {
    if (config.rings < 1) throw std::invalid_argument("--rings must be at least 1");
    const ObjLoad load = load_obj(*config.mesh);
    if (load.dropped_faces > 0) log << "warning: dropped " << load.dropped_faces << " degenerate faces\n";
    E = pattern_power(mesh_pattern(load.mesh), config.rings);
  }
  const ChordalExtension ext = chordal_extension(E);
  const CliqueSet maximal = maximal_cliques(ext.pattern, ext.ordering);
  const CliqueSet merged = merge_cliques(maximal, config.clique_size);

  Json j;
  j["n"] = E.size();
  j["nnz_lower"] = E.nnz();
  j["is_chordal"] = is_chordal(E);
  j["fill"] = ext.fill;
  j["extension_nnz_lower"] = ext.pattern.nnz();
  j["cliques"] = clique_stats(maximal);
  j["merged_cliques"] = clique_stats(merged);
  j["merged_nnz_lower"] = merged.covered_pattern().nnz();
  if (config.out) {
    write_json(*config.out, j);
  } else {
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral coarsening of sparse PSD operators by chordal ADMM", "coarsen"};
  app.require_subcommand(1);

  auto* coarsen = app.add_subcommand("coarsen", "coarsen a triangle mesh Laplacian");
  std::optional<std::string> config_path, mesh, outdir;
  std::optional<Index> coarse, eigs, clique, max_iter, seed, workers;
  std::optional<int> rings;
  std::optional<double> rho0, eps_abs, eps_rel;
  bool weighted = false, no_timing = false;
  coarsen->add_option("--config", config_path, "JSON config; flags override its values");
  coarsen->add_option("--mesh", mesh, "input OBJ mesh");
  coarsen->add_option("--coarse,-m", coarse, "coarse vertex count m");
  coarsen->add_option("--rings,-r", rings, "ring count of the coarse sparsity");
  coarsen->add_option("--eigs,-k", eigs, "eigenpairs used as test functions");
  coarsen->add_flag("--weighted", weighted, "weight the energy by inverse eigenvalues");
  coarsen->add_option("--clique-size", clique, "clique merge threshold t");
  coarsen->add_option("--rho0", rho0, "initial ADMM penalty");
  coarsen->add_option("--max-iter", max_iter, "iteration cap");
  coarsen->add_option("--eps-abs", eps_abs, "absolute tolerance");
  coarsen->add_option("--eps-rel", eps_rel, "relative tolerance");
  coarsen->add_option("--seed", seed, "first farthest-point sample");
  coarsen->add_option("--workers", workers, "projection threads (0: automatic)");
  coarsen->add_flag("--no-timing", no_timing, "write zero timings for byte-stable outputs");
  coarsen->add_option("--out,-o", outdir, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a coarse operator against a fine one");
  EvalConfig ev;
  std::string ev_out = ".";
  eval->add_option("--L", ev.L, "fine operator (Matrix Market)")->required();
  eval->add_option("--M", ev.M, "fine mass (Matrix Market)")->required();
  eval->add_option("--X", ev.X, "coarse operator (Matrix Market)")->required();
  eval->add_option("--Mtilde", ev.Mtilde, "coarse mass (Matrix Market)")->required();
  eval->add_option("--R", ev.R, "restriction (R.json)")->required();
  eval->add_option("--eigs,-k", ev.k, "eigenpairs compared");
  eval->add_option("--out,-o", ev_out, "output directory");

  auto* info = app.add_subcommand("chordal-info", "chordal extension and clique statistics");
  ChordalInfoConfig ci;
  std::string ci_pattern, ci_mesh, ci_out;
  info->add_option("--pattern", ci_pattern, "sparsity pattern (Matrix Market)");
  info->add_option("--mesh", ci_mesh, "OBJ mesh; uses its r-ring pattern");
  info->add_option("--rings,-r", ci.rings, "ring count with --mesh");
  info->add_option("--clique-size", ci.clique_size, "clique merge threshold t");
  info->add_option("--out,-o", ci_out, "JSON output path (stdout when omitted)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*coarsen) {
      RunConfig rc;
      if (config_path) apply_config_json(rc, *config_path);
      auto& c = rc.coarsening;
      if (mesh) rc.mesh = *mesh;
      if (outdir) rc.out = *outdir;
      if (coarse) c.coarse_count = *coarse;
      if (rings) c.rings = *rings;
      if (eigs) c.eigs = *eigs;
      if (weighted) c.weighted = true;
      if (clique) c.admm.clique_threshold = *clique;
      if (rho0) c.admm.rho0 = *rho0;
      if (max_iter) c.admm.max_iter = *max_iter;
      if (eps_abs) c.admm.eps_abs = *eps_abs;
      if (eps_rel) c.admm.eps_rel = *eps_rel;
      if (seed) c.seed = *seed;
      if (workers) c.admm.workers = *workers;
      if (no_timing) c.admm.record_timing = false;
      if (rc.mesh.empty()) throw std::invalid_argument("--mesh is required");
      return cmd_coarsen(rc, err);
    }
    if (*eval) {
      ev.out = ev_out;
      return cmd_eval(ev, err);
    }
    if (!ci_pattern.empty()) ci.pattern = ci_pattern;
    if (!ci_mesh.empty()) ci.mesh = ci_mesh;
    if (!ci_out.empty()) ci.out = ci_out;
    return cmd_chordal_info(ci, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace coarsen::cli
