#pragma once

// Parameter optimization of memory performance over affine (R, M) families:
// maximize tau(eps, p), minimize Delta_T(p), minimize M_T Delta(p), and the
// second-order check that a maximizer of tau minimizes Delta(T*, .).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/discounted.hpp"

namespace qmem {

/// R(p) = base_R + sum p_i directions_R[i], M(p) = base_M + sum p_i directions_M[i],
/// with Theta, F and P held fixed.
class ParamMap {
 public:
  ParamMap(RealMatrix theta, RealMatrix base_energy, RealMatrix base_coupling, RealMatrix weight,
           RealMatrix p0, std::vector<RealMatrix> directions_energy,
           std::vector<RealMatrix> directions_coupling);

  /// Family anchored at a physical-mode model. An empty direction list on either
  /// side holds that matrix fixed. Throws ValidationError for raw models.
  static ParamMap from_model(const OqhoModel& model, std::vector<RealMatrix> directions_energy,
                             std::vector<RealMatrix> directions_coupling);

  Eigen::Index size() const { return static_cast<Eigen::Index>(directions_energy_.size()); }

  RealMatrix energy_at(const RealVector& p) const;
  RealMatrix coupling_at(const RealVector& p) const;
  OqhoModel model_at(const RealVector& p) const;

  const RealMatrix& theta() const { return theta_; }
  const RealMatrix& base_energy() const { return base_energy_; }
  const RealMatrix& base_coupling() const { return base_coupling_; }
  const RealMatrix& weight() const { return weight_; }
  const RealMatrix& p0() const { return p0_; }
  const std::vector<RealMatrix>& directions_energy() const { return directions_energy_; }
  const std::vector<RealMatrix>& directions_coupling() const { return directions_coupling_; }

  /// True when every direction is the zero matrix.
  bool is_trivial() const;

 private:
  RealMatrix theta_;
  RealMatrix base_energy_;
  RealMatrix base_coupling_;
  RealMatrix weight_;
  RealMatrix p0_;
  std::vector<RealMatrix> directions_energy_;
  std::vector<RealMatrix> directions_coupling_;
};

/// dDelta(t, p)/dp by central differences, h_i = 1e-6 max(1, |p_i|).
RealVector grad_delta_p(const ParamMap& map, const RealVector& p, double t);

/// d/dp of Delta'(t, p) (time derivative), central differences.
RealVector grad_delta_dot_p(const ParamMap& map, const RealVector& p, double t);

/// Finite-difference Hessian of Delta(t, .) at p, symmetric.
RealMatrix hessian_delta_p(const ParamMap& map, const RealVector& p, double t);

/// dtau/dp = -dDelta/dp / Delta'(tau). Throws RegularityError at irregular eps.
RealVector grad_tau(const ParamMap& map, const RealVector& p, double epsilon,
                    double t_cap = kDefaultSearchHorizon);

/// d^2 tau/dp^2 = -(D'' g g^T + 2 sym(g dD'/dp^T) + d^2 D/dp^2) / D'.
RealMatrix hessian_tau(const ParamMap& map, const RealVector& p, double epsilon,
                       double t_cap = kDefaultSearchHorizon);

/// tau(eps, p), or nullopt when never reached within t_cap.
std::optional<double> tau_at(const ParamMap& map, const RealVector& p, double epsilon,
                             double t_cap = kDefaultSearchHorizon);

enum class Objective { TauMax, DeltaSupMin, DiscountedMin };

std::string_view to_string(Objective objective);
/// Throws Error for unknown tags.
Objective objective_from_string(std::string_view tag);

struct OptimizerSettings {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  double initial_step = 1.0;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
  int nelder_mead_steps = 200;
  double t_cap = kDefaultSearchHorizon;
  /// Optional box bounds; empty means unbounded.
  std::vector<double> lower;
  std::vector<double> upper;
};

struct TraceEntry {
  RealVector p;
  double value = 0.0;
  double gradient_norm = 0.0;
};

struct DualityRecord {
  double t_star = 0.0;
  double scale = 0.0;
  double grad_norm = 0.0;
  double hessian_min_eigenvalue = 0.0;
  bool stationary = false;
  bool curvature_ok = false;
  /// The Hessian vanishes identically (e.g. a map without directions).
  bool degenerate = false;
  bool passed() const { return stationary && curvature_ok; }
};

struct OptimizationReport {
  Objective objective = Objective::TauMax;
  RealVector p_init;
  RealVector p_final;
  std::vector<TraceEntry> trace;
  bool converged = false;
  int iterations = 0;
  int nelder_mead_steps = 0;
  /// False when some coordinate of p_final sits on an active box bound.
  bool interior = true;
  std::vector<int> active_bounds;  // -1 lower, +1 upper, 0 free
  std::string message;
  std::optional<DualityRecord> duality;

  double final_value() const { return trace.empty() ? 0.0 : trace.back().value; }
};

OptimizationReport maximize_tau(const ParamMap& map, const RealVector& p0, double epsilon,
                                const OptimizerSettings& settings = {});

OptimizationReport minimize_delta_sup(const ParamMap& map, const RealVector& p0, double horizon,
                                      const OptimizerSettings& settings = {});

OptimizationReport minimize_discounted(const ParamMap& map, const RealVector& p0, double horizon,
                                       const OptimizerSettings& settings = {});

/// Gradient of p -> M_T Delta(p) by central differences (inadmissible points throw).
RealVector grad_discounted_p(const ParamMap& map, const RealVector& p, double horizon);

/// At T* = tau(eps, p_star): ||dDelta(T*)/dp|| <= 1e-4 scale and
/// lambda_min(d^2 Delta(T*)/dp^2) >= -1e-6 scale.
DualityRecord verify_duality(const ParamMap& map, const RealVector& p_star, double epsilon,
                             double t_cap = kDefaultSearchHorizon);

}  // namespace qmem
