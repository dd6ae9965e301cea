#include "qmem/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace qmem {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path, what);
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  double v = node.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double get_positive(const json& node, const std::string& path) {
  double v = get_number(node, path);
  if (!(v > 0.0)) fail(path, "must be positive");
  return v;
}

int get_int(const json& node, const std::string& path) {
  if (!node.is_number_integer()) fail(path, "expected an integer");
  return node.get<int>();
}

std::vector<double> get_number_list(const json& node, const std::string& path) {
  std::vector<double> out;
  if (node.is_number()) {
    out.push_back(get_number(node, path));
    return out;
  }
  if (!node.is_array()) fail(path, "expected a number or an array of numbers");
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(get_number(node[i], fmt::format("{}[{}]", path, i)));
  return out;
}

RealMatrix get_real_matrix(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = node.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row_path = fmt::format("{}[{}]", path, i);
    if (!node[i].is_array()) fail(row_path, "expected an array");
    if (i == 0) cols = node[i].size();
    if (node[i].size() != cols) fail(row_path, "ragged matrix");
  }
  if (cols == 0) fail(path, "matrix has no columns");
  RealMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          get_number(node[i][j], fmt::format("{}[{}][{}]", path, i, j));
  return out;
}

// Real entries, or [re, im] pairs when `complex` is set.
ComplexMatrix get_complex_matrix(const json& node, const std::string& path, bool complex) {
  if (!complex) return get_real_matrix(node, path).cast<Complex>();
  if (!node.is_array() || node.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = node.size();
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  if (cols == 0) fail(path, "matrix has no columns");
  ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row_path = fmt::format("{}[{}]", path, i);
    if (!node[i].is_array() || node[i].size() != cols) fail(row_path, "ragged matrix");
    for (std::size_t j = 0; j < cols; ++j) {
      const auto entry_path = fmt::format("{}[{}][{}]", path, i, j);
      const json& e = node[i][j];
      if (!e.is_array() || e.size() != 2) fail(entry_path, "expected a [re, im] pair");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          Complex(get_number(e[0], entry_path + "[0]"), get_number(e[1], entry_path + "[1]"));
    }
  }
  return out;
}

std::vector<RealMatrix> get_matrix_list(const json& node, const std::string& path) {
  if (!node.is_array()) fail(path, "expected an array of matrices");
  std::vector<RealMatrix> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(get_real_matrix(node[i], fmt::format("{}[{}]", path, i)));
  return out;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

// Shape problems inside the builders carry no field name; attach the model path.
template <class Fn>
auto build_model(Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError("model." + e.field(), e.what());
  } catch (const DimensionError& e) {
    throw ValidationError("model", e.what());
  }
}

void parse_model(const json& node, RunConfig& cfg) {
  if (!node.is_object()) fail("model", "expected an object");
  const json& kind = require(node, "kind", "model");
  if (!kind.is_string()) fail("model.kind", "expected a string");
  const auto tag = kind.get<std::string>();

  if (tag == "oqho-physical") {
    cfg.kind = ModelKind::OqhoPhysical;
    RealMatrix energy = get_real_matrix(require(node, "R", "model"), "model.R");
    RealMatrix coupling = get_real_matrix(require(node, "M", "model"), "model.M");
    RealMatrix weight = get_real_matrix(require(node, "F", "model"), "model.F");
    RealMatrix p0 = get_real_matrix(require(node, "P", "model"), "model.P");
    RealMatrix theta;
    if (node.contains("theta")) {
      theta = get_real_matrix(node["theta"], "model.theta");
    } else {
      if (energy.rows() % 2 != 0) fail("model.R", "dimension must be even");
      theta = canonical_ccr(energy.rows());
    }
    cfg.oqho = build_model([&] { return build_oqho(theta, energy, coupling, weight, p0); });
  } else if (tag == "oqho-raw") {
    cfg.kind = ModelKind::OqhoRaw;
    RealMatrix drift = get_real_matrix(require(node, "A", "model"), "model.A");
    RealMatrix dispersion = get_real_matrix(require(node, "B", "model"), "model.B");
    RealMatrix weight = get_real_matrix(require(node, "F", "model"), "model.F");
    RealMatrix p0 = get_real_matrix(require(node, "P", "model"), "model.P");
    cfg.oqho = build_model([&] { return build_oqho_raw(drift, dispersion, weight, p0); });
  } else if (tag == "finite-level") {
    cfg.kind = ModelKind::FiniteLevel;
    bool complex = false;
    if (node.contains("complex")) {
      if (!node["complex"].is_boolean()) fail("model.complex", "expected a boolean");
      complex = node["complex"].get<bool>();
    }
    ComplexMatrix h0 = get_complex_matrix(require(node, "H0", "model"), "model.H0", complex);
    const json& ls = require(node, "L", "model");
    if (!ls.is_array()) fail("model.L", "expected an array of matrices");
    std::vector<ComplexMatrix> couplings;
    for (std::size_t i = 0; i < ls.size(); ++i)
      couplings.push_back(get_complex_matrix(ls[i], fmt::format("model.L[{}]", i), complex));
    ComplexMatrix sigma0 =
        get_complex_matrix(require(node, "sigma0", "model"), "model.sigma0", complex);
    cfg.finite_level = build_model([&] { return build_finite_level(h0, couplings, sigma0); });
  } else {
    fail("model.kind", "unknown model kind '" + tag +
                           "' (expected oqho-physical, oqho-raw or finite-level)");
  }
}

GridConfig parse_grid(const json& node) {
  if (!node.is_object()) fail("grid", "expected an object");
  GridConfig g;
  if (node.contains("t0")) g.t0 = get_number(node["t0"], "grid.t0");
  if (node.contains("t1")) g.t1 = get_number(node["t1"], "grid.t1");
  if (node.contains("points")) g.points = get_int(node["points"], "grid.points");
  if (g.t0 < 0.0) fail("grid.t0", "must be nonnegative");
  if (!(g.t1 >= g.t0)) fail("grid.t1", "must not precede t0");
  if (g.points < 1) fail("grid.points", "must be at least 1");
  return g;
}

OptimizeConfig parse_optimize(const json& node) {
  if (!node.is_object()) fail("optimize", "expected an object");
  OptimizeConfig o;
  const json& objective = require(node, "objective", "optimize");
  if (!objective.is_string()) fail("optimize.objective", "expected a string");
  try {
    o.objective = objective_from_string(objective.get<std::string>());
  } catch (const Error& e) {
    fail("optimize.objective", e.what());
  }
  if (node.contains("epsilon")) o.epsilon = get_positive(node["epsilon"], "optimize.epsilon");
  if (node.contains("horizon")) o.horizon = get_positive(node["horizon"], "optimize.horizon");
  if (node.contains("directions_R"))
    o.directions_energy = get_matrix_list(node["directions_R"], "optimize.directions_R");
  if (node.contains("directions_M"))
    o.directions_coupling = get_matrix_list(node["directions_M"], "optimize.directions_M");

  std::size_t k = std::max(o.directions_energy.size(), o.directions_coupling.size());
  if (node.contains("p0")) {
    auto p = get_number_list(node["p0"], "optimize.p0");
    o.p0 = Eigen::Map<const RealVector>(p.data(), static_cast<Eigen::Index>(p.size()));
    k = std::max(k, p.size());
  } else {
    o.p0 = RealVector::Zero(static_cast<Eigen::Index>(k));
  }
  if (static_cast<std::size_t>(o.p0.size()) != k)
    fail("optimize.p0", fmt::format("expected {} entries", k));

  auto& s = o.settings;
  if (node.contains("lower")) s.lower = get_number_list(node["lower"], "optimize.lower");
  if (node.contains("upper")) s.upper = get_number_list(node["upper"], "optimize.upper");
  if (!s.lower.empty() && s.lower.size() != k)
    fail("optimize.lower", fmt::format("expected {} entries", k));
  if (!s.upper.empty() && s.upper.size() != k)
    fail("optimize.upper", fmt::format("expected {} entries", k));
  for (std::size_t i = 0; i < s.lower.size() && i < s.upper.size(); ++i)
    if (s.lower[i] > s.upper[i]) fail(fmt::format("optimize.lower[{}]", i), "exceeds upper bound");
  if (node.contains("max_iterations")) {
    s.max_iterations = get_int(node["max_iterations"], "optimize.max_iterations");
    if (s.max_iterations < 0) fail("optimize.max_iterations", "must be nonnegative");
  }
  if (node.contains("gradient_tolerance"))
    s.gradient_tolerance =
        get_positive(node["gradient_tolerance"], "optimize.gradient_tolerance");
  if (node.contains("initial_step"))
    s.initial_step = get_positive(node["initial_step"], "optimize.initial_step");
  if (node.contains("nelder_mead_steps")) {
    s.nelder_mead_steps = get_int(node["nelder_mead_steps"], "optimize.nelder_mead_steps");
    if (s.nelder_mead_steps < 0) fail("optimize.nelder_mead_steps", "must be nonnegative");
  }
  return o;
}

ordered_json matrix_json(const RealMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json matrix_list_json(const std::vector<RealMatrix>& ms) {
  ordered_json out = ordered_json::array();
  for (const auto& m : ms) out.push_back(matrix_json(m));
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::OqhoPhysical: return "oqho-physical";
    case ModelKind::OqhoRaw: return "oqho-raw";
    case ModelKind::FiniteLevel: return "finite-level";
  }
  return "unknown";
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("config", "expected a JSON object");

  RunConfig cfg;
  parse_model(require(doc, "model", "config"), cfg);
  if (doc.contains("grid")) cfg.grid = parse_grid(doc["grid"]);
  if (doc.contains("epsilon")) {
    cfg.epsilons = get_number_list(doc["epsilon"], "epsilon");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
      if (!(cfg.epsilons[i] > 0.0)) fail(fmt::format("epsilon[{}]", i), "must be positive");
  }
  if (doc.contains("horizon")) {
    cfg.horizons = get_number_list(doc["horizon"], "horizon");
    for (std::size_t i = 0; i < cfg.horizons.size(); ++i)
      if (!(cfg.horizons[i] > 0.0)) fail(fmt::format("horizon[{}]", i), "must be positive");
  }
  if (doc.contains("t_cap")) cfg.t_cap = get_positive(doc["t_cap"], "t_cap");
  if (doc.contains("n_eps")) {
    cfg.n_eps = get_int(doc["n_eps"], "n_eps");
    if (cfg.n_eps < 2) fail("n_eps", "must be at least 2");
  }
  if (doc.contains("optimize")) {
    cfg.optimize = parse_optimize(doc["optimize"]);
    cfg.optimize->settings.t_cap = cfg.t_cap;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string model_document(const OqhoModel& model, const RunConfig& settings) {
  ordered_json m;
  if (model.is_physical()) {
    const auto& phys = *model.physical();
    m["kind"] = "oqho-physical";
    m["theta"] = matrix_json(phys.theta);
    m["R"] = matrix_json(phys.energy);
    m["M"] = matrix_json(phys.coupling);
  } else {
    m["kind"] = "oqho-raw";
    m["A"] = matrix_json(model.drift());
    m["B"] = matrix_json(model.dispersion());
  }
  m["F"] = matrix_json(model.weight());
  m["P"] = matrix_json(model.p0());

  ordered_json doc;
  doc["model"] = std::move(m);
  if (settings.grid) {
    doc["grid"] = {{"t0", settings.grid->t0},
                   {"t1", settings.grid->t1},
                   {"points", settings.grid->points}};
  }
  if (!settings.epsilons.empty()) doc["epsilon"] = settings.epsilons;
  if (!settings.horizons.empty()) doc["horizon"] = settings.horizons;
  doc["t_cap"] = settings.t_cap;
  doc["n_eps"] = settings.n_eps;
  if (settings.optimize) {
    const auto& o = *settings.optimize;
    ordered_json opt;
    opt["objective"] = std::string(to_string(o.objective));
    opt["epsilon"] = o.epsilon;
    opt["horizon"] = o.horizon;
    opt["p0"] = std::vector<double>(o.p0.data(), o.p0.data() + o.p0.size());
    opt["directions_R"] = matrix_list_json(o.directions_energy);
    opt["directions_M"] = matrix_list_json(o.directions_coupling);
    if (!o.settings.lower.empty()) opt["lower"] = o.settings.lower;
    if (!o.settings.upper.empty()) opt["upper"] = o.settings.upper;
    opt["max_iterations"] = o.settings.max_iterations;
    opt["gradient_tolerance"] = o.settings.gradient_tolerance;
    opt["initial_step"] = o.settings.initial_step;
    opt["nelder_mead_steps"] = o.settings.nelder_mead_steps;
    doc["optimize"] = std::move(opt);
  }
  return doc.dump(2) + "\n";
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

}  // namespace qmem
