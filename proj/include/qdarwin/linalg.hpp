// linalg.hpp — dense complex matrix helpers shared by every module.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qdarwin {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

namespace tol {
// Algebraic identities (projector/unit algebra, unitarity, reconstruction).
inline constexpr double algebra = 1e-10;
// Eigenvalue grouping into degenerate blocks.
inline constexpr double grouping = 1e-9;
// Correlation residuals accumulate products of evolved operators.
inline constexpr double correlation = 1e-8;
}  // namespace tol

// Desk-scale cap: every exhaustive check stays under seconds up to here.
inline constexpr Eigen::Index kMaxTotalDim = 64;

inline double max_abs(const ComplexMatrix& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const ComplexMatrix& a) {
    return max_abs(a - a.adjoint());
}

inline bool is_hermitian_matrix(const ComplexMatrix& a, double t = tol::algebra) {
    return a.rows() == a.cols() && hermiticity_error(a) <= t;
}

inline ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b - b * a;
}

inline void require_square(const ComplexMatrix& a, const std::string& who) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(who + ": matrix must be square");
}

inline void require_finite(const ComplexMatrix& a, const std::string& who) {
    if (!a.allFinite())
        throw std::invalid_argument(who + ": matrix has non-finite entries");
}

inline void require_dim(const ComplexMatrix& a, Eigen::Index n, const std::string& who) {
    if (a.rows() != n || a.cols() != n)
        throw std::invalid_argument(who + ": dimension mismatch (" +
                                    std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    " vs " + std::to_string(n) + ")");
}

// Kronecker product with row-major index fusion: (A⊗B)[i*rB+k, j*cB+l] = A[i,j]B[k,l].
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace qdarwin
