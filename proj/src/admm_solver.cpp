#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "coarsen/admm.hpp"

namespace coarsen {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

const double kSqrt2 = std::sqrt(2.0);

}  // namespace

KktFactorization::KktFactorization(const CoarseningProblem& problem, double rho, Index dense_limit)
    : problem_(&problem), rho_(rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("kkt_factorize: rho must be positive");
  const auto& cons = problem.constraints;
  const Index n = problem.x_size();
  const Index m = cons.G.rows();
  dense_ = n <= dense_limit;

  Eigen::VectorXd shift(n);
  for (Index a = 0; a < n; ++a) shift[a] = rho / cons.cover[cons.row_of_x[a]];

  if (dense_) {
    Eigen::MatrixXd K = problem.energy.H;
    K.diagonal() += shift;
    k_llt_.compute(K);
    if (k_llt_.info() != Eigen::Success) throw std::runtime_error("kkt_factorize: reduced block not positive definite");
    k_inv_gt_ = k_llt_.solve(Eigen::MatrixXd(cons.G.transpose()));
    Eigen::MatrixXd S = cons.G * k_inv_gt_;
    schur_llt_.compute(S);
    if (m > 0 && schur_llt_.info() != Eigen::Success) {
      const double delta = 1e-10 * std::max(S.trace() / static_cast<double>(m), 1.0);
      S.diagonal().array() += delta;
      schur_llt_.compute(S);
      regularized_ = true;
      if (schur_llt_.info() != Eigen::Success) {
        throw std::runtime_error("kkt_factorize: singular KKT system even after regularization delta = " +
                                 format_double(delta));
      }
    }
    return;
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(problem.energy.H.nonZeros() + n + 2 * cons.G.nonZeros()));
  for (Index c = 0; c < problem.energy.H.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(problem.energy.H, c); it; ++it) {
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Index a = 0; a < n; ++a) trip.emplace_back(a, a, shift[a]);
  for (Index c = 0; c < cons.G.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(cons.G, c); it; ++it) {
      trip.emplace_back(n + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), n + it.row(), it.value());
    }
  }
  Eigen::SparseMatrix<double> A(n + m, n + m);
  A.setFromTriplets(trip.begin(), trip.end());
  saddle_lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
  saddle_lu_->compute(A);
  if (saddle_lu_->info() != Eigen::Success) {
    const double delta = 1e-10 * std::max(problem.energy.H.diagonal().sum() / static_cast<double>(n), 1.0);
    for (Index i = 0; i < m; ++i) A.coeffRef(n + i, n + i) -= delta;
    saddle_lu_->compute(A);
    regularized_ = true;
    if (saddle_lu_->info() != Eigen::Success) {
      throw std::runtime_error("kkt_factorize: singular KKT system even after regularization delta = " +
                               format_double(delta));
    }
  }
}

Eigen::VectorXd KktFactorization::reduced_rhs(const Eigen::VectorXd& rhs_x, const Eigen::VectorXd& rhs_c) const {
  const auto& cons = problem_->constraints;
  Eigen::VectorXd r = rhs_x;
  for (Index a = 0; a < r.size(); ++a) {
    const Index row = cons.row_of_x[a];
    r[a] += rho_ * rhs_c[row] / cons.cover[row];
  }
  return r;
}

KktFactorization::Solution KktFactorization::solve(const Eigen::VectorXd& rhs_x, const Eigen::VectorXd& rhs_c,
                                                   const Eigen::VectorXd& rhs_g) const {
  const auto& cons = problem_->constraints;
  const Index n = problem_->x_size();
  const Index m = cons.G.rows();
  if (rhs_x.size() != n || rhs_c.size() != cons.rows() || rhs_g.size() != m) {
    throw std::invalid_argument("kkt_solve: right-hand side size mismatch");
  }
  const Eigen::VectorXd r = reduced_rhs(rhs_x, rhs_c);

  Solution sol;
  if (dense_) {
    const Eigen::VectorXd t = k_llt_.solve(r);
    sol.mu2 = m > 0 ? Eigen::VectorXd(schur_llt_.solve(cons.G * t - rhs_g)) : Eigen::VectorXd();
    sol.x = m > 0 ? Eigen::VectorXd(t - k_inv_gt_ * sol.mu2) : t;
  } else {
    Eigen::VectorXd full(n + m);
    full << r, rhs_g;
    const Eigen::VectorXd out = saddle_lu_->solve(full);
    sol.x = out.head(n);
    sol.mu2 = out.tail(m);
  }

  sol.mu1.resize(cons.rows());
  for (Index row = 0; row < cons.rows(); ++row) {
    const Index a = cons.x_of_row[row];
    const double cx = a >= 0 ? sol.x[a] : 0.0;
    sol.mu1[row] = rho_ * (cx - rhs_c[row]) / cons.cover[row];
  }
  return sol;
}

XUpdate x_update(const CoarseningProblem& problem, const KktFactorization& fact, const Eigen::VectorXd& z,
                 const Eigen::VectorXd& u, double rho) {
  if (fact.rho() != rho) {
    throw std::logic_error("x_update: factorization built for rho = " + format_double(fact.rho()) +
                           ", current rho = " + format_double(rho));
  }
  const auto& cons = problem.constraints;
  const Index nz = problem.z_size();
  if (z.size() != nz || u.size() != nz) throw std::invalid_argument("x_update: z/u size mismatch");

  Eigen::VectorXd rhs_c = Eigen::VectorXd::Zero(cons.rows());
  for (Index e = 0; e < nz; ++e) rhs_c[cons.row_of_z[e]] += cons.z_coeff[e] * (z[e] - u[e]);

  auto sol = fact.solve(problem.energy.g, rhs_c, cons.e);
  XUpdate out;
  out.y.resize(nz);
  for (Index e = 0; e < nz; ++e) out.y[e] = z[e] - u[e] + cons.z_coeff[e] * sol.mu1[cons.row_of_z[e]] / rho;
  out.x = std::move(sol.x);
  out.mu1 = std::move(sol.mu1);
  out.mu2 = std::move(sol.mu2);
  return out;
}

Eigen::MatrixXd expand_block(const CliqueSet& cliques, Index k, const Eigen::Ref<const Eigen::VectorXd>& seg,
                             TrilScaling scaling) {
  const Index s = cliques.block_size(k);
  if (seg.size() != dense_tril_size(s)) throw std::invalid_argument("expand_block: segment size mismatch");
  Eigen::MatrixXd B(s, s);
  for (Index b = 0; b < s; ++b) {
    B(b, b) = seg[dense_tril_index(s, b, b)];
    for (Index a = b + 1; a < s; ++a) {
      double val = seg[dense_tril_index(s, a, b)];
      if (scaling == TrilScaling::kSqrt2) val /= kSqrt2;
      B(a, b) = B(b, a) = val;
    }
  }
  return B;
}

void compress_block(const Eigen::Ref<const Eigen::MatrixXd>& block, TrilScaling scaling,
                    Eigen::Ref<Eigen::VectorXd> seg) {
  const Index s = block.rows();
  if (seg.size() != dense_tril_size(s)) throw std::invalid_argument("compress_block: segment size mismatch");
  for (Index b = 0; b < s; ++b) {
    seg[dense_tril_index(s, b, b)] = block(b, b);
    for (Index a = b + 1; a < s; ++a) {
      const double val = 0.5 * (block(a, b) + block(b, a));
      seg[dense_tril_index(s, a, b)] = scaling == TrilScaling::kSqrt2 ? val * kSqrt2 : val;
    }
  }
}

Index resolve_workers(Index requested) {
  Index workers = requested > 0 ? requested : static_cast<Index>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("COARSEN_WORKERS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) workers = std::min<Index>(workers, cap);
  }
  return workers;
}

Eigen::VectorXd z_update(const CoarseningProblem& problem, const Eigen::VectorXd& y, const Eigen::VectorXd& u,
                         Index workers) {
  const auto& cs = problem.cliques;
  if (y.size() != problem.z_size() || u.size() != problem.z_size()) {
    throw std::invalid_argument("z_update: size mismatch");
  }
  const Eigen::VectorXd w = y + u;
  Eigen::VectorXd z(w.size());
  auto project = [&](Index k) {
    const Index off = cs.tril_offset(k), len = cs.tril_size(k);
    const Eigen::MatrixXd P = psd_project(expand_block(cs, k, w.segment(off, len), problem.scaling));
    compress_block(P, problem.scaling, z.segment(off, len));
  };

  const Index pool = std::min(std::max<Index>(workers, 1), cs.size());
  if (pool <= 1) {
    for (Index k = 0; k < cs.size(); ++k) project(k);
    return z;
  }
  std::vector<std::jthread> threads;
  threads.reserve(static_cast<std::size_t>(pool));
  for (Index t = 0; t < pool; ++t) {
    threads.emplace_back([&, t] {
      for (Index k = t; k < cs.size(); k += pool) project(k);
    });
  }
  threads.clear();
  return z;
}

AdmmState initial_state(const CoarseningProblem& problem, const Eigen::VectorXd& x0, const AdmmParams& params) {
  if (x0.size() != problem.x_size()) throw std::invalid_argument("initial_state: x0 size mismatch");
  AdmmState st;
  st.x = x0;
  st.rho = params.rho0;
  const auto& cs = problem.cliques;
  const auto blocks = clique_decomposition(cs, expand(problem.map_E, x0));
  st.z.resize(problem.z_size());
  for (Index k = 0; k < cs.size(); ++k) {
    compress_block(blocks[k], problem.scaling, st.z.segment(cs.tril_offset(k), cs.tril_size(k)));
  }
  st.y = st.z;
  st.u = Eigen::VectorXd::Zero(problem.z_size());
  return st;
}

double update_penalty(double rho, double r_norm, double s_norm, const AdmmParams& params) {
  if (r_norm > params.mu * s_norm) return rho * params.tau_incr;
  if (s_norm > params.mu * r_norm) return rho / params.tau_decr;
  return rho;
}

void iterate(AdmmState& state, const CoarseningProblem& problem, const AdmmParams& params) {
  const bool timing = params.record_timing;
  if (!state.cache || state.cache->rho() != state.rho) {
    const auto t0 = Clock::now();
    state.cache.emplace(problem, state.rho, params.dense_kkt_limit);
    ++state.factorizations;
    if (timing) state.ms_factorize += elapsed_ms(t0);
  }

  IterationRecord rec;
  rec.iter = state.iteration + 1;
  rec.rho = state.rho;

  auto t0 = Clock::now();
  XUpdate xu = x_update(problem, *state.cache, state.z, state.u, state.rho);
  if (timing) rec.ms_x = elapsed_ms(t0);

  t0 = Clock::now();
  Eigen::VectorXd z_new = z_update(problem, xu.y, state.u, resolve_workers(params.workers));
  if (timing) rec.ms_z = elapsed_ms(t0);

  const Eigen::VectorXd r = xu.y - z_new;
  state.u += r;
  rec.r_norm = r.norm();
  rec.s_norm = state.rho * (z_new - state.z).norm();

  const double sqrt_dim = std::sqrt(static_cast<double>(problem.z_size()));
  rec.eps_pri = sqrt_dim * params.eps_abs + params.eps_rel * std::max(xu.y.norm(), z_new.norm());
  rec.eps_dual = sqrt_dim * params.eps_abs + params.eps_rel * state.rho * state.u.norm();
  rec.objective = objective(problem, xu.x);

  if (!xu.x.allFinite() || !z_new.allFinite() || !state.u.allFinite()) {
    std::ostringstream msg;
    msg << "admm: non-finite iterate at iteration " << rec.iter << " (rho = " << format_double(state.rho)
        << ", |r| = " << format_double(rec.r_norm) << ", |s| = " << format_double(rec.s_norm) << ")";
    throw std::runtime_error(msg.str());
  }

  state.x = std::move(xu.x);
  state.y = std::move(xu.y);
  state.z = std::move(z_new);
  state.ms_x += rec.ms_x;
  state.ms_z += rec.ms_z;
  state.iteration = rec.iter;
  state.history.push_back(rec);

  const double next = update_penalty(state.rho, rec.r_norm, rec.s_norm, params);
  if (next != state.rho) {
    state.u *= state.rho / next;
    state.rho = next;
    state.cache.reset();
  }
}

Certificate certify(const CoarseningProblem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& e) {
  Certificate c;
  const auto& map = problem.map_E;
  c.pattern_ok = x.size() == map.size() && x.allFinite();

  const Eigen::VectorXd Xv = problem.constraints.G * x;
  c.nullspace_residual = (Xv - e).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd X = expand(map, x);
  const auto lambda = sym_eig_dense(X).values;
  c.lambda_min = lambda.size() ? lambda[0] : 0.0;
  c.lambda_max = lambda.size() ? lambda[lambda.size() - 1] : 0.0;

  const auto& cs = problem.cliques;
  c.min_block_eigenvalue = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < cs.size(); ++k) {
    const auto B = expand_block(cs, k, z.segment(cs.tril_offset(k), cs.tril_size(k)), problem.scaling);
    c.min_block_eigenvalue = std::min(c.min_block_eigenvalue, sym_eig_dense(B).values[0]);
  }

  const auto& cons = problem.constraints;
  Eigen::VectorXd gap = Eigen::VectorXd::Zero(cons.rows());
  for (Index a = 0; a < x.size(); ++a) gap[cons.row_of_x[a]] += x[a];
  for (Index i = 0; i < z.size(); ++i) gap[cons.row_of_z[i]] -= cons.z_coeff[i] * z[i];
  c.clique_gap = gap.size() ? gap.cwiseAbs().maxCoeff() : 0.0;

  const double scale = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  c.passed = c.pattern_ok && c.nullspace_residual <= 1e-8 * (1.0 + scale) &&
             c.lambda_min >= -1e-7 * std::max(c.lambda_max, 0.0);
  return c;
}

SolveResult solve(const CoarseningProblem& problem, const AdmmParams& params, const Eigen::VectorXd& x0) {
  params.validate();
  AdmmState st = initial_state(problem, x0, params);

  Termination term = Termination::kMaxIter;
  double best_score = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = st.x, best_z = st.z;
  IterationRecord best_rec;
  while (st.iteration < params.max_iter) {
    iterate(st, problem, params);
    const IterationRecord& rec = st.history.back();
    if (rec.r_norm <= rec.eps_pri && rec.s_norm <= rec.eps_dual) {
      term = Termination::kConverged;
      best_x = st.x;
      best_z = st.z;
      best_rec = rec;
      break;
    }
    const double score = std::max(rec.r_norm / rec.eps_pri, rec.s_norm / rec.eps_dual);
    if (score < best_score) {
      best_score = score;
      best_x = st.x;
      best_z = st.z;
      best_rec = rec;
    }
  }

  SolveResult out;
  out.x = null_space_repair(problem.map_E, best_x, problem.v, problem.constraints.e);
  out.X = SymSparse(problem.map_E.pattern(), out.x);

  SolveReport& rep = out.report;
  rep.iterations = st.iteration;
  rep.primal_residual = best_rec.r_norm;
  rep.dual_residual = best_rec.s_norm;
  rep.objective = objective(problem, out.x);
  rep.ms_factorize = st.ms_factorize;
  rep.ms_x_update = st.ms_x;
  rep.ms_z_update = st.ms_z;
  rep.factorizations = st.factorizations;
  rep.termination = term;
  rep.rho_trajectory.emplace_back(0, params.rho0);
  for (const auto& rec : st.history) {
    if (rec.rho != rep.rho_trajectory.back().second) rep.rho_trajectory.emplace_back(rec.iter, rec.rho);
  }
  rep.certificate = certify(problem, out.x, best_z, problem.constraints.e);
  rep.history = std::move(st.history);
  return out;
}

std::string termination_name(Termination t) {
  return t == Termination::kConverged ? "converged" : "max_iter";
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path.string());
  out << "iter,r_norm,s_norm,rho,objective,ms_x,ms_z\n";
  for (const auto& r : history) {
    out << r.iter << ',' << format_double(r.r_norm) << ',' << format_double(r.s_norm) << ','
        << format_double(r.rho) << ',' << format_double(r.objective) << ',' << format_double(r.ms_x) << ','
        << format_double(r.ms_z) << '\n';
  }
}

void write_report_json(const std::filesystem::path& path, const SolveReport& report) {
  nlohmann::ordered_json j;
  j["termination"] = termination_name(report.termination);
  j["iterations"] = report.iterations;
  j["primal_residual"] = report.primal_residual;
  j["dual_residual"] = report.dual_residual;
  j["objective"] = report.objective;
  j["factorizations"] = report.factorizations;
  j["ms"] = {{"factorize", report.ms_factorize},
             {"x_update", report.ms_x_update},
             {"z_update", report.ms_z_update}};
  auto traj = nlohmann::ordered_json::array();
  for (const auto& [it, rho] : report.rho_trajectory) traj.push_back({it, rho});
  j["rho_trajectory"] = traj;
  const auto& c = report.certificate;
  j["certificate"] = {{"passed", c.passed},
                      {"pattern_ok", c.pattern_ok},
                      {"nullspace_residual", c.nullspace_residual},
                      {"lambda_min", c.lambda_min},
                      {"lambda_max", c.lambda_max},
                      {"min_block_eigenvalue", c.min_block_eigenvalue},
                      {"clique_gap", c.clique_gap}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_json: cannot open " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace coarsen
