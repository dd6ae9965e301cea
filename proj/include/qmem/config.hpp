#pragma once

// JSON run configuration. A document holds exactly one model plus optional
// command parameters:
//
//   {
//     "model": {"kind": "oqho-physical", "theta": [[..]], "R": [[..]], "M": [[..]],
//               "F": [[..]], "P": [[..]]}
//            | {"kind": "oqho-raw", "A": [[..]], "B": [[..]], "F": [[..]], "P": [[..]]}
//            | {"kind": "finite-level", "complex": true, "H0": [[[re, im], ..]],
//               "L": [[[..]], ..], "sigma0": [[..]]},
//     "grid": {"t0": 0, "t1": 2, "points": 201},
//     "epsilon": [0.1, 0.2],
//     "horizon": [0.05, 0.1],
//     "t_cap": 100,
//     "n_eps": 256,
//     "optimize": {"objective": "tau-max", "epsilon": 0.1, "horizon": 1.0,
//                  "p0": [..], "directions_R": [[[..]], ..], "directions_M": [[[..]], ..],
//                  "lower": [..], "upper": [..], "max_iterations": 500,
//                  "gradient_tolerance": 1e-6, "initial_step": 1.0}
//   }
//
// "theta" is optional and defaults to the canonical CCR matrix. Matrices are
// row-major nested arrays.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/optimize.hpp"

namespace qmem {

enum class ModelKind { OqhoPhysical, OqhoRaw, FiniteLevel };

std::string_view to_string(ModelKind kind);

struct GridConfig {
  double t0 = 0.0;
  double t1 = 1.0;
  int points = 101;
};

struct OptimizeConfig {
  Objective objective = Objective::TauMax;
  double epsilon = 0.1;
  double horizon = 1.0;
  RealVector p0;
  std::vector<RealMatrix> directions_energy;
  std::vector<RealMatrix> directions_coupling;
  OptimizerSettings settings;
};

struct RunConfig {
  ModelKind kind = ModelKind::OqhoRaw;
  std::optional<OqhoModel> oqho;
  std::optional<FiniteLevelModel> finite_level;
  std::optional<GridConfig> grid;
  std::vector<double> epsilons;
  std::vector<double> horizons;
  double t_cap = kDefaultSearchHorizon;
  int n_eps = 256;
  std::optional<OptimizeConfig> optimize;
};

/// Parses and validates a configuration document. Throws ValidationError
/// whose field() is the JSON path of the offending entry.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Serializes an OQHO (physical or raw mode) together with the non-model
/// settings of `settings` as a document that parse_config accepts.
std::string model_document(const OqhoModel& model, const RunConfig& settings);

/// Number formatting used by every emitted file: 17 significant digits.
std::string format_number(double value);

}  // namespace qmem
