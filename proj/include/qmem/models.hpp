#pragma once

// The two system classes: open quantum harmonic oscillators (linear QSDEs with
// drift A and dispersion B) and finite-level systems described by a
// Hamiltonian, Hermitian coupling operators and the quantum Ito matrix.

#include <optional>
#include <string>
#include <vector>

#include "qmem/matops.hpp"

namespace qmem {

/// J = I_{m/2} (x) [[0, 1], [-1, 0]]. `m` must be even.
RealMatrix symplectic_j(Eigen::Index m);

/// Theta = J_n / 2, the CCR matrix of n/2 position-momentum pairs.
RealMatrix canonical_ccr(Eigen::Index n);

/// Omega = I_m + i J_m.
ComplexMatrix ito_matrix(Eigen::Index m);

/// Linear open quantum system dX = A X dt + B dW with a quadratic storage
/// criterion weighted by Sigma = F^T F. Immutable once built.
class OqhoModel {
 public:
  /// (Theta, R, M) realization; present only for models built in physical mode.
  struct Physical {
    RealMatrix theta;
    RealMatrix energy;
    RealMatrix coupling;
  };

  Eigen::Index n() const { return drift_.rows(); }
  Eigen::Index m() const { return dispersion_.cols(); }

  const RealMatrix& drift() const { return drift_; }
  const RealMatrix& dispersion() const { return dispersion_; }
  const RealMatrix& weight() const { return weight_; }
  const RealMatrix& p0() const { return p0_; }
  const RealMatrix& sigma_weight() const { return sigma_weight_; }
  /// B B^T, cached.
  const RealMatrix& diffusion() const { return diffusion_; }

  bool is_physical() const { return physical_.has_value(); }
  const std::optional<Physical>& physical() const { return physical_; }

  /// Non-fatal diagnostics gathered at construction (e.g. P + i Theta not PSD).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend OqhoModel build_oqho(const RealMatrix&, const RealMatrix&, const RealMatrix&,
                              const RealMatrix&, const RealMatrix&);
  friend OqhoModel build_oqho_raw(const RealMatrix&, const RealMatrix&, const RealMatrix&,
                                  const RealMatrix&);
  OqhoModel() = default;

  RealMatrix drift_;
  RealMatrix dispersion_;
  RealMatrix weight_;
  RealMatrix p0_;
  RealMatrix sigma_weight_;
  RealMatrix diffusion_;
  std::optional<Physical> physical_;
  std::vector<std::string> warnings_;
};

/// Physical mode: A = 2 Theta (R + M^T J M), B = 2 Theta M^T.
/// Throws ValidationError naming the offending field.
OqhoModel build_oqho(const RealMatrix& theta, const RealMatrix& energy,
                     const RealMatrix& coupling, const RealMatrix& weight,
                     const RealMatrix& p0);

/// Analysis mode: drift and dispersion given directly.
OqhoModel build_oqho_raw(const RealMatrix& drift, const RealMatrix& dispersion,
                         const RealMatrix& weight, const RealMatrix& p0);

/// Finite-level system with Hermitian Hamiltonian H0, an even number of
/// Hermitian couplings L_k and initial density matrix sigma0.
class FiniteLevelModel {
 public:
  Eigen::Index d() const { return hamiltonian_.rows(); }
  Eigen::Index m() const { return static_cast<Eigen::Index>(couplings_.size()); }

  const ComplexMatrix& hamiltonian() const { return hamiltonian_; }
  const std::vector<ComplexMatrix>& couplings() const { return couplings_; }
  const ComplexMatrix& ito() const { return ito_; }
  const ComplexMatrix& sigma0() const { return sigma0_; }

 private:
  friend FiniteLevelModel build_finite_level(const ComplexMatrix&,
                                             const std::vector<ComplexMatrix>&,
                                             const ComplexMatrix&);
  FiniteLevelModel() = default;

  ComplexMatrix hamiltonian_;
  std::vector<ComplexMatrix> couplings_;
  ComplexMatrix ito_;
  ComplexMatrix sigma0_;
};

/// Validates and stores the model. H0, L_k and sigma0 are stored Hermitized so
/// that downstream quantities vanish exactly where they should.
FiniteLevelModel build_finite_level(const ComplexMatrix& hamiltonian,
                                    const std::vector<ComplexMatrix>& couplings,
                                    const ComplexMatrix& sigma0);

/// GKSL generator and its Hilbert-Schmidt adjoint as d^2 x d^2 matrices acting
/// on column-stacked operators.
struct Lindbladian {
  Eigen::Index dim = 0;
  ComplexMatrix matrix;
  ComplexMatrix adjoint_matrix;

  ComplexMatrix apply(const ComplexMatrix& x) const;
  ComplexMatrix apply_adjoint(const ComplexMatrix& x) const;
};

/// L(s) = -i[H0, s] + sum_jk conj(Omega_jk) L_j s L_k - {sum_jk Omega_jk L_j L_k, s}/2.
/// The adjoint is assembled from its own formula and checked against the
/// conjugate transpose; a mismatch beyond 1e-10 raises NumericalError.
Lindbladian assemble_lindbladian(const FiniteLevelModel& model);

}  // namespace qmem
