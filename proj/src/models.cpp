#include "qmem/models.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace qmem {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPsdTol = 1e-10;
constexpr double kRankTol = 1e-10;

double scaled_tol(double tol, double magnitude) { return tol * std::max(1.0, magnitude); }

void require_symmetric(const RealMatrix& m, const std::string& field) {
  require_square(m, field);
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > scaled_tol(kSymmetryTol, m.cwiseAbs().maxCoeff())) {
    throw ValidationError(field, "matrix is not symmetric");
  }
}

void require_hermitian(const ComplexMatrix& m, const std::string& field) {
  require_square(m, field);
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > scaled_tol(kSymmetryTol, m.cwiseAbs().maxCoeff())) {
    throw ValidationError(field, "matrix is not Hermitian");
  }
}

void require_even(Eigen::Index k, const std::string& field) {
  if (k <= 0 || k % 2 != 0) {
    throw ValidationError(field, "dimension must be a positive even integer, got " +
                                     std::to_string(k));
  }
}

// Shared checks on the storage weight F and the initial second moments P.
void validate_weight_and_moments(const RealMatrix& weight, const RealMatrix& p0, Eigen::Index n) {
  require_finite(weight, "F");
  require_finite(p0, "P");
  if (weight.cols() != n || weight.rows() < 1 || weight.rows() > n) {
    throw ValidationError("F", "expected s x " + std::to_string(n) + " with 1 <= s <= n, got " +
                                   std::to_string(weight.rows()) + "x" +
                                   std::to_string(weight.cols()));
  }
  Eigen::JacobiSVD<RealMatrix> svd(weight);
  const auto& sv = svd.singularValues();
  if (!(sv.maxCoeff() > 0.0) || sv.minCoeff() <= kRankTol * sv.maxCoeff()) {
    throw ValidationError("F", "matrix does not have full row rank");
  }
  if (p0.rows() != n || p0.cols() != n) {
    throw ValidationError("P", "expected " + std::to_string(n) + "x" + std::to_string(n));
  }
  require_symmetric(p0, "P");
  if (min_hermitian_eigenvalue(p0) < -kPsdTol) {
    throw ValidationError("P", "matrix is not positive semi-definite");
  }
}

}  // namespace

RealMatrix symplectic_j(Eigen::Index m) {
  require_even(m, "J");
  RealMatrix j = RealMatrix::Zero(m, m);
  for (Eigen::Index k = 0; k < m; k += 2) {
    j(k, k + 1) = 1.0;
    j(k + 1, k) = -1.0;
  }
  return j;
}

RealMatrix canonical_ccr(Eigen::Index n) { return 0.5 * symplectic_j(n); }

ComplexMatrix ito_matrix(Eigen::Index m) {
  ComplexMatrix omega = ComplexMatrix::Identity(m, m);
  omega.imag() = symplectic_j(m);
  return omega;
}

OqhoModel build_oqho(const RealMatrix& theta, const RealMatrix& energy,
                     const RealMatrix& coupling, const RealMatrix& weight,
                     const RealMatrix& p0) {
  require_finite(theta, "theta");
  require_finite(energy, "R");
  require_finite(coupling, "M");
  const Eigen::Index n = theta.rows();
  require_even(n, "theta");
  if (theta.cols() != n) throw ValidationError("theta", "matrix is not square");
  if ((theta + theta.transpose()).cwiseAbs().maxCoeff() >
      scaled_tol(kSymmetryTol, theta.cwiseAbs().maxCoeff())) {
    throw ValidationError("theta", "CCR matrix is not antisymmetric");
  }
  if (energy.rows() != n || energy.cols() != n) {
    throw ValidationError("R", "expected " + std::to_string(n) + "x" + std::to_string(n));
  }
  require_symmetric(energy, "R");
  require_even(coupling.rows(), "M");
  if (coupling.cols() != n) {
    throw ValidationError("M", "expected m x " + std::to_string(n) + ", got " +
                                   std::to_string(coupling.rows()) + "x" +
                                   std::to_string(coupling.cols()));
  }
  validate_weight_and_moments(weight, p0, n);

  const RealMatrix j = symplectic_j(coupling.rows());
  OqhoModel model;
  model.drift_ = 2.0 * theta * (energy + coupling.transpose() * j * coupling);
  model.dispersion_ = 2.0 * theta * coupling.transpose();
  model.weight_ = weight;
  model.p0_ = symmetrize(p0);
  model.sigma_weight_ = weight.transpose() * weight;
  model.diffusion_ = model.dispersion_ * model.dispersion_.transpose();
  model.physical_ = OqhoModel::Physical{theta, energy, coupling};

  // Heisenberg uncertainty P + i Theta >= 0 is advisory only.
  ComplexMatrix uncertainty(n, n);
  uncertainty.real() = model.p0_;
  uncertainty.imag() = theta;
  if (min_hermitian_eigenvalue(uncertainty) < -kPsdTol) {
    model.warnings_.push_back("P + i*theta is not positive semi-definite (unphysical state)");
  }
  return model;
}

OqhoModel build_oqho_raw(const RealMatrix& drift, const RealMatrix& dispersion,
                         const RealMatrix& weight, const RealMatrix& p0) {
  require_finite(drift, "A");
  require_finite(dispersion, "B");
  if (drift.rows() < 1 || drift.rows() != drift.cols()) {
    throw DimensionError("A: expected a non-empty square matrix, got " +
                         std::to_string(drift.rows()) + "x" + std::to_string(drift.cols()));
  }
  const Eigen::Index n = drift.rows();
  if (dispersion.rows() != n) {
    throw DimensionError("B: expected " + std::to_string(n) + " rows, got " +
                         std::to_string(dispersion.rows()));
  }
  validate_weight_and_moments(weight, p0, n);

  OqhoModel model;
  model.drift_ = drift;
  model.dispersion_ = dispersion;
  model.weight_ = weight;
  model.p0_ = symmetrize(p0);
  model.sigma_weight_ = weight.transpose() * weight;
  model.diffusion_ = dispersion * dispersion.transpose();
  return model;
}

FiniteLevelModel build_finite_level(const ComplexMatrix& hamiltonian,
                                    const std::vector<ComplexMatrix>& couplings,
                                    const ComplexMatrix& sigma0) {
  require_finite(hamiltonian, "H0");
  require_finite(sigma0, "sigma0");
  const Eigen::Index d = hamiltonian.rows();
  if (d < 2 || hamiltonian.cols() != d) {
    throw ValidationError("H0", "expected a square matrix of order >= 2");
  }
  require_hermitian(hamiltonian, "H0");
  require_even(static_cast<Eigen::Index>(couplings.size()), "L");

  FiniteLevelModel model;
  model.hamiltonian_ = hermitize(hamiltonian);
  model.couplings_.reserve(couplings.size());
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    const std::string field = "L[" + std::to_string(k) + "]";
    require_finite(couplings[k], field);
    if (couplings[k].rows() != d || couplings[k].cols() != d) {
      throw ValidationError(field, "expected " + std::to_string(d) + "x" + std::to_string(d));
    }
    require_hermitian(couplings[k], field);
    model.couplings_.push_back(hermitize(couplings[k]));
  }

  if (sigma0.rows() != d || sigma0.cols() != d) {
    throw ValidationError("sigma0", "expected " + std::to_string(d) + "x" + std::to_string(d));
  }
  require_hermitian(sigma0, "sigma0");
  const ComplexMatrix state = hermitize(sigma0);
  if (std::abs(state.trace().real() - 1.0) > 1e-12) {
    throw ValidationError("sigma0", "trace differs from 1");
  }
  if (min_hermitian_eigenvalue(state) < -kPsdTol) {
    throw ValidationError("sigma0", "matrix is not positive semi-definite");
  }
  model.sigma0_ = state;
  model.ito_ = ito_matrix(model.m());
  return model;
}

ComplexMatrix Lindbladian::apply(const ComplexMatrix& x) const {
  return unvec(matrix * vec(x), dim);
}

ComplexMatrix Lindbladian::apply_adjoint(const ComplexMatrix& x) const {
  return unvec(adjoint_matrix * vec(x), dim);
}

Lindbladian assemble_lindbladian(const FiniteLevelModel& model) {
  const Eigen::Index d = model.d();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix& h = model.hamiltonian();
  const auto& ls = model.couplings();
  const ComplexMatrix& omega = model.ito();
  const Complex i_unit(0.0, 1.0);

  // K = sum_jk Omega_jk L_j L_k is Hermitian because Omega is.
  ComplexMatrix k_sum = ComplexMatrix::Zero(d, d);
  for (std::size_t j = 0; j < ls.size(); ++j) {
    for (std::size_t k = 0; k < ls.size(); ++k) {
      k_sum += omega(j, k) * ls[j] * ls[k];
    }
  }

  // vec(A X B) = (B^T (x) A) vec(X).
  const ComplexMatrix anticomm =
      -0.5 * (kron(id, k_sum) + kron(k_sum.transpose(), id));
  const ComplexMatrix comm = kron(id, h) - kron(h.transpose(), id);

  ComplexMatrix gen = -i_unit * comm + anticomm;
  ComplexMatrix adj = i_unit * comm + anticomm;
  for (std::size_t j = 0; j < ls.size(); ++j) {
    for (std::size_t k = 0; k < ls.size(); ++k) {
      const ComplexMatrix sandwich = kron(ls[k].transpose(), ls[j]);
      gen += std::conj(omega(j, k)) * sandwich;
      adj += omega(j, k) * sandwich;
    }
  }

  const double mismatch = (adj - gen.adjoint()).cwiseAbs().maxCoeff();
  if (mismatch > 1e-10 * std::max(1.0, gen.cwiseAbs().maxCoeff())) {
    throw NumericalError("assemble_lindbladian: adjoint does not match conjugate transpose");
  }
  return Lindbladian{d, std::move(gen), std::move(adj)};
}

}  // namespace qmem
