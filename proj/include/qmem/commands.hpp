#pragma once

// The CLI subcommands as library functions. Each writes its artifacts into
// `out_dir`, logs one-line progress to `log` and returns the process exit code.

#include <filesystem>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qmem/config.hpp"

namespace qmem {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  int jobs = 1;
  /// Command-line overrides of the config values.
  std::optional<std::vector<double>> epsilons;
  std::optional<std::vector<double>> horizons;
  std::optional<GridConfig> grid;
  bool with_oracle = false;
};

/// trace.csv ("t,value") and trace.json (scale and initial derivatives).
int cmd_evaluate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// decoherence.json. Exit 3 when no threshold is reached at all.
int cmd_decoherence(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// discounted.json. Inadmissible horizons are flagged; exit 3 only if none is admissible.
int cmd_discounted(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// report.json, trace.csv ("iteration,objective,grad_norm") and model.json.
int cmd_optimize(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// check_bound.json with both sides of the tail-probability inequality.
int cmd_check_bound(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// Maps an exception from config loading or a command to an exit code.
int exit_code_for(const std::exception& e);

/// "0.5:2:11" -> {t0 0.5, t1 2, points 11}. Throws ValidationError.
GridConfig parse_grid_spec(const std::string& spec);

}  // namespace qmem
