#pragma once

#include "pfa/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pfa {

/// Symmetric, unit-diagonal correlation matrix. Positive semidefiniteness is
/// checked lazily by spectral_decompose.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    /// Throws NotSymmetric unless m is square and exactly symmetric, and
    /// DomainError unless every diagonal entry is 1 and |m(k,l)| <= 1.
    explicit CorrelationMatrix(Matrix m);

    static CorrelationMatrix identity(std::size_t p);
    static CorrelationMatrix equicorrelation(std::size_t p, double rho);

    std::size_t dim() const noexcept { return m_.rows(); }
    double operator()(std::size_t k, std::size_t l) const noexcept { return m_(k, l); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

/// Eigenpairs sorted by decreasing eigenvalue. `values` always has length p.
/// `vectors` holds the eigenvectors as rows (r x p). A full decomposition
/// has r = p; the thin route from a data factor stores only the r vectors
/// with nonzero eigenvalue, and values[r..p) are 0.
struct EigenSystem {
    std::vector<double> values;
    Matrix vectors;

    std::size_t dim() const noexcept { return values.size(); }
    std::size_t stored() const noexcept { return vectors.rows(); }
    std::span<const double> vector(std::size_t i) const noexcept { return vectors.row(i); }
};

/// Full eigendecomposition by Householder tridiagonalisation and implicit QL.
/// Eigenvalues in (-1e-8 p, 0) are clamped to 0; anything lower throws NotPSD.
EigenSystem spectral_decompose(const CorrelationMatrix& sigma);

/// Eigendecomposition of Sigma = Y^T Y for an n x p factor Y, computed via
/// the n x n Gram matrix Y Y^T when n <= p and from Y^T Y directly otherwise.
/// Eigenvalues at or below 1e-10 * max(1, lambda_1) are treated as exact zeros.
EigenSystem spectral_decompose_factored(const Matrix& y);

/// Symmetric eigendecomposition of a small dense matrix (used for the Gram
/// route). Returns eigenvectors as rows, eigenvalues descending, no clamping.
EigenSystem symmetric_eigen(const Matrix& a);

/// sqrt(lambda_{k+1}^2 + ... + lambda_p^2). Throws IndexOutOfRange unless
/// 0 <= k <= p.
double tail_energy(std::span<const double> values, std::ptrdiff_t k);

/// M = sum_i sqrt(lambda_i) gamma_i gamma_i^T, so that M M = Sigma.
Matrix symmetric_sqrt(const EigenSystem& system);

/// sum_i lambda_i gamma_i gamma_i^T.
Matrix reconstruct(const EigenSystem& system);

double frobenius_distance(const Matrix& a, const Matrix& b);

}  // namespace pfa
