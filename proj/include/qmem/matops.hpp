#pragma once

// Dense kernels shared by the rest of the library. Everything here is a pure
// function of its arguments.

#include <complex>
#include <string_view>

#include <Eigen/Dense>

#include "qmem/errors.hpp"

namespace qmem {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Throws ValidationError naming `what` if any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw ValidationError(std::string(what), "non-finite entry");
  }
}

/// Throws DimensionError if `m` is not square.
template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

/// Matrix exponential e^M by scaling and squaring with a Pade core.
RealMatrix expm(const RealMatrix& m);
ComplexMatrix expm(const ComplexMatrix& m);

/// Solves A X + X A^* + Q = 0 for X. A must be Hurwitz; throws StabilityError
/// otherwise. When Q is Hermitian the returned X is exactly Hermitian.
RealMatrix solve_lyapunov(const RealMatrix& a, const RealMatrix& q);
ComplexMatrix solve_lyapunov(const ComplexMatrix& a, const ComplexMatrix& q);

/// Largest real part over the spectrum of M.
double spectral_abscissa(const RealMatrix& m);
double spectral_abscissa(const ComplexMatrix& m);

/// <X, Y> = sum conj(X_jk) Y_jk.
double frobenius_inner(const RealMatrix& x, const RealMatrix& y);
Complex frobenius_inner(const ComplexMatrix& x, const ComplexMatrix& y);

/// (M + M^T) / 2.
RealMatrix symmetrize(const RealMatrix& m);

/// (M + M^*) / 2.
ComplexMatrix hermitize(const ComplexMatrix& m);

/// Kronecker product a (x) b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
RealMatrix kron(const RealMatrix& a, const RealMatrix& b);

/// Column-stacking vectorization and its inverse.
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows);

/// Smallest eigenvalue of the Hermitian part of M.
double min_hermitian_eigenvalue(const RealMatrix& m);
double min_hermitian_eigenvalue(const ComplexMatrix& m);

}  // namespace qmem
