#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coarsen/pipeline.hpp"

namespace coarsen::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMaxIter = 2;

struct RunConfig {
  std::filesystem::path mesh;
  std::filesystem::path out = ".";
  CoarseningConfig coarsening;
};

// Keys: mesh, out, coarse, rings, eigs, weighted, clique_size, rho0, max_iter,
// eps_abs, eps_rel, seed, workers, no_timing. Unknown keys are rejected.
void apply_config_json(RunConfig& config, const std::filesystem::path& path);
void validate(const RunConfig& config, Index fine_count);

// Writes X.mtx, Mtilde.mtx, R.json, L.mtx, M.mtx, metrics.json,
// eigenvalue_errors.csv, fmap.mtx, trace.csv and report.json.
int cmd_coarsen(const RunConfig& config, std::ostream& log);

struct EvalConfig {
  std::filesystem::path L, M, X, Mtilde, R;
  Index k = 100;
  std::filesystem::path out = ".";
};

// Writes metrics.json, eigenvalue_errors.csv and fmap.mtx.
int cmd_eval(const EvalConfig& config, std::ostream& log);

struct ChordalInfoConfig {
  std::optional<std::filesystem::path> pattern;  // Matrix Market file
  std::optional<std::filesystem::path> mesh;
  int rings = 1;
  Index clique_size = 200;
  std::optional<std::filesystem::path> out;      // stdout when empty
};

int cmd_chordal_info(const ChordalInfoConfig& config, std::ostream& out, std::ostream& log);

// Reads R.json: {"fine_count": n, "samples": [...]}.
RowSelection read_restriction(const std::filesystem::path& path);

// Full command line, argv[0] included.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coarsen::cli
