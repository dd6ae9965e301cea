#include "qmem/matops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace qmem {

namespace {

template <typename Matrix>
Matrix expm_impl(const Matrix& m) {
  require_square(m, "expm");
  if (m.size() == 0) return m;
  Matrix out = m.exp();
  if (!out.allFinite()) {
    throw NumericalError("expm: result overflowed");
  }
  return out;
}

template <typename Matrix>
bool is_hermitian(const Matrix& q) {
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  return (q - q.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

// Kronecker form of X -> A X + X A^*:  (I (x) A) + (conj(A) (x) I).
template <typename Matrix>
Matrix lyapunov_operator(const Matrix& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index n2 = n * n;
  Matrix op = Matrix::Zero(n2, n2);
  for (Eigen::Index j = 0; j < n; ++j) {
    op.block(j * n, j * n, n, n) += a;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto c = Eigen::numext::conj(a(i, k));
      if (c == typename Matrix::Scalar(0)) continue;
      op.block(i * n, k * n, n, n).diagonal().array() += c;
    }
  }
  return op;
}

template <typename Matrix>
Matrix solve_lyapunov_impl(const Matrix& a, const Matrix& q) {
  require_square(a, "solve_lyapunov: A");
  require_square(q, "solve_lyapunov: Q");
  if (a.rows() != q.rows()) {
    throw DimensionError("solve_lyapunov: A and Q differ in dimension");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return q;
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0)) {
    throw StabilityError("solve_lyapunov: matrix is not Hurwitz (spectral abscissa " +
                         std::to_string(abscissa) + ")");
  }
  const Matrix op = lyapunov_operator(a);
  Eigen::PartialPivLU<Matrix> lu(op);
  if (!(lu.rcond() > 1e-14)) {
    throw StabilityError("solve_lyapunov: Kronecker system is numerically singular");
  }
  using Vector = Eigen::Matrix<typename Matrix::Scalar, Eigen::Dynamic, 1>;
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
  const Vector x = lu.solve(rhs);
  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  if (is_hermitian(q)) {
    out = (0.5 * (out + out.adjoint())).eval();
  }
  return out;
}

}  // namespace

RealMatrix expm(const RealMatrix& m) { return expm_impl(m); }
ComplexMatrix expm(const ComplexMatrix& m) { return expm_impl(m); }

RealMatrix solve_lyapunov(const RealMatrix& a, const RealMatrix& q) {
  return solve_lyapunov_impl(a, q);
}

ComplexMatrix solve_lyapunov(const ComplexMatrix& a, const ComplexMatrix& q) {
  return solve_lyapunov_impl(a, q);
}

double spectral_abscissa(const RealMatrix& m) {
  require_square(m, "spectral_abscissa");
  if (m.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<RealMatrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_abscissa: eigenvalue iteration failed");
  }
  return solver.eigenvalues().real().maxCoeff();
}

double spectral_abscissa(const ComplexMatrix& m) {
  require_square(m, "spectral_abscissa");
  if (m.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral_abscissa: eigenvalue iteration failed");
  }
  return solver.eigenvalues().real().maxCoeff();
}

double frobenius_inner(const RealMatrix& x, const RealMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("frobenius_inner: shape mismatch");
  }
  return x.cwiseProduct(y).sum();
}

Complex frobenius_inner(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("frobenius_inner: shape mismatch");
  }
  return x.conjugate().cwiseProduct(y).sum();
}

RealMatrix symmetrize(const RealMatrix& m) {
  require_square(m, "symmetrize");
  return 0.5 * (m + m.transpose());
}

ComplexMatrix hermitize(const ComplexMatrix& m) {
  require_square(m, "hermitize");
  return 0.5 * (m + m.adjoint());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

RealMatrix kron(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexVector vec(const ComplexMatrix& m) {
  return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0) {
    throw DimensionError("unvec: length is not a multiple of the row count");
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), rows, v.size() / rows);
}

double min_hermitian_eigenvalue(const RealMatrix& m) {
  require_square(m, "min_hermitian_eigenvalue");
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(symmetrize(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double min_hermitian_eigenvalue(const ComplexMatrix& m) {
  require_square(m, "min_hermitian_eigenvalue");
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitize(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace qmem
