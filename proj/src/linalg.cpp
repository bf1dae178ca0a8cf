#include "pfa/linalg.hpp"

#include "pfa/error.hpp"
#include "pfa/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pfa {

namespace {

struct Tridiagonal {
    std::vector<double> d;  // diagonal
    std::vector<double> e;  // e[i] couples i and i+1; e[n-1] = 0
    Matrix qt;              // transpose of the accumulated reflectors
};

// Householder reduction. `a` is overwritten: row k keeps the k-th
// reflector in columns k+1.. after the step.
Tridiagonal tridiagonalize(Matrix a) {
    const std::size_t n = a.rows();
    Tridiagonal out;
    out.d.assign(n, 0.0);
    out.e.assign(n, 0.0);
    std::vector<double> h(n, 0.0);
    std::vector<double> p(n);
    std::vector<double> q(n);

    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1;
        out.d[k] = a(k, k);
        auto v = a.row(k).subspan(k + 1, m);
        const double norm2 = simd::dot(v, v);
        if (norm2 == 0.0) continue;
        const double alpha = v[0] > 0.0 ? -std::sqrt(norm2) : std::sqrt(norm2);
        const double hk = norm2 - alpha * v[0];
        v[0] -= alpha;
        out.e[k] = alpha;
        h[k] = hk;

        auto pv = std::span<double>(p).first(m);
        for (std::size_t i = 0; i < m; ++i)
            pv[i] = simd::dot(a.row(k + 1 + i).subspan(k + 1, m), v) / hk;
        const double kk = simd::dot(v, pv) / (2.0 * hk);
        auto qv = std::span<double>(q).first(m);
        for (std::size_t i = 0; i < m; ++i) qv[i] = pv[i] - kk * v[i];
        for (std::size_t i = 0; i < m; ++i) {
            auto row = a.row(k + 1 + i).subspan(k + 1, m);
            simd::axpy(-v[i], qv, row);
            simd::axpy(-qv[i], v, row);
        }
    }
    if (n >= 2) {
        out.d[n - 2] = a(n - 2, n - 2);
        out.e[n - 2] = a(n - 2, n - 1);
    }
    if (n >= 1) out.d[n - 1] = a(n - 1, n - 1);

    // Q = H_0 H_1 ... H_{n-3}, accumulated from the right end so each
    // reflector only touches the trailing block.
    Matrix qm = Matrix::identity(n);
    std::vector<double> w(n);
    for (std::size_t j = n >= 3 ? n - 3 + 1 : 0; j-- > 0;) {
        if (h[j] == 0.0) continue;
        const std::size_t m = n - j - 1;
        auto v = a.row(j).subspan(j + 1, m);
        auto wv = std::span<double>(w).first(m);
        std::fill(wv.begin(), wv.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i)
            if (v[i] != 0.0) simd::axpy(v[i], qm.row(j + 1 + i).subspan(j + 1, m), wv);
        for (std::size_t i = 0; i < m; ++i)
            if (v[i] != 0.0) simd::axpy(-v[i] / h[j], wv, qm.row(j + 1 + i).subspan(j + 1, m));
    }
    out.qt = qm.transposed();
    return out;
}

// Implicit QL with Wilkinson-style shifts on the tridiagonal (d, e).
// Rotations are applied to rows of zt, whose rows end up as eigenvectors.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Matrix& zt) {
    const std::size_t n = d.size();
    const double eps = std::numeric_limits<double>::epsilon();
    const int max_iter = 60 + 30 * static_cast<int>(n);
    double f = 0.0;
    double tst1 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
        std::size_t m = l;
        while (m < n && std::fabs(e[m]) > eps * tst1) ++m;
        if (m >= n) m = n - 1;

        if (m > l) {
            int iter = 0;
            do {
                if (++iter > max_iter)
                    throw Error(ErrorCode::NotConverged, "QL iteration did not converge");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t i = m; i-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = std::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    simd::rotate(zt.row(i), zt.row(i + 1), c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::fabs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

}  // namespace

CorrelationMatrix::CorrelationMatrix(Matrix m) : m_(std::move(m)) {
    const std::size_t p = m_.rows();
    if (m_.cols() != p) throw Error(ErrorCode::NotSymmetric, "correlation matrix is not square");
    if (p == 0) throw Error(ErrorCode::DimensionMismatch, "correlation matrix is empty");
    for (std::size_t k = 0; k < p; ++k) {
        if (m_(k, k) != 1.0)
            throw Error(ErrorCode::DomainError,
                        "diagonal entry " + std::to_string(k) + " is not 1");
        for (std::size_t l = k + 1; l < p; ++l) {
            if (m_(k, l) != m_(l, k))
                throw Error(ErrorCode::NotSymmetric, "entries (" + std::to_string(k) + "," +
                                                         std::to_string(l) + ") differ from transpose");
            if (!(std::fabs(m_(k, l)) <= 1.0))
                throw Error(ErrorCode::DomainError, "correlation outside [-1,1] at (" +
                                                        std::to_string(k) + "," + std::to_string(l) + ")");
        }
    }
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t p) { return CorrelationMatrix(Matrix::identity(p)); }

CorrelationMatrix CorrelationMatrix::equicorrelation(std::size_t p, double rho) {
    Matrix m(p, p, rho);
    for (std::size_t i = 0; i < p; ++i) m(i, i) = 1.0;
    return CorrelationMatrix(std::move(m));
}

EigenSystem symmetric_eigen(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw Error(ErrorCode::DimensionMismatch, "eigendecomposition needs a square matrix");
    EigenSystem out;
    if (n == 0) return out;

    Tridiagonal tri = tridiagonalize(a);
    tridiagonal_ql(tri.d, tri.e, tri.qt);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return tri.d[x] > tri.d[y]; });
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = tri.d[order[i]];
        auto src = tri.qt.row(order[i]);
        std::copy(src.begin(), src.end(), out.vectors.row(i).begin());
    }
    return out;
}

EigenSystem spectral_decompose(const CorrelationMatrix& sigma) {
    EigenSystem sys = symmetric_eigen(sigma.matrix());
    const double tol = 1e-8 * static_cast<double>(sigma.dim());
    for (double& v : sys.values) {
        if (v < -tol)
            throw Error(ErrorCode::NotPSD, "eigenvalue " + std::to_string(v) + " below -1e-8 p");
        if (v < 0.0) v = 0.0;
    }
    return sys;
}

EigenSystem spectral_decompose_factored(const Matrix& y) {
    const std::size_t n = y.rows();
    const std::size_t p = y.cols();
    if (n > p) {
        // tall factor: the p x p side is the smaller problem
        Matrix cross(p, p);
        for (std::size_t a = 0; a < n; ++a) {
            auto row = y.row(a);
            for (std::size_t i = 0; i < p; ++i)
                if (row[i] != 0.0) simd::axpy(row[i], row, cross.row(i));
        }
        EigenSystem full = symmetric_eigen(cross);
        const double cut = 1e-10 * std::max(1.0, full.values.empty() ? 0.0 : full.values.front());
        std::size_t r = 0;
        while (r < p && full.values[r] > cut) ++r;
        EigenSystem out;
        out.values.assign(p, 0.0);
        std::copy(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(r), out.values.begin());
        out.vectors = Matrix(r, p);
        for (std::size_t h = 0; h < r; ++h) std::copy(full.vectors.row(h).begin(), full.vectors.row(h).end(), out.vectors.row(h).begin());
        return out;
    }
    Matrix gram(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b <= a; ++b) gram(a, b) = gram(b, a) = simd::dot(y.row(a), y.row(b));

    const EigenSystem small = symmetric_eigen(gram);
    const double top = small.values.empty() ? 0.0 : small.values.front();
    const double cutoff = 1e-10 * std::max(1.0, top);
    std::size_t r = 0;
    while (r < std::min(n, p) && small.values[r] > cutoff) ++r;

    EigenSystem out;
    out.values.assign(p, 0.0);
    out.vectors = Matrix(r, p);
    for (std::size_t h = 0; h < r; ++h) {
        out.values[h] = small.values[h];
        const double scale = 1.0 / std::sqrt(small.values[h]);
        auto u = small.vector(h);
        auto g = out.vectors.row(h);
        for (std::size_t a = 0; a < n; ++a) simd::axpy(u[a] * scale, y.row(a), g);
    }
    return out;
}

double tail_energy(std::span<const double> values, std::ptrdiff_t k) {
    const auto p = static_cast<std::ptrdiff_t>(values.size());
    if (k < 0 || k > p)
        throw Error(ErrorCode::IndexOutOfRange,
                    "factor count " + std::to_string(k) + " outside [0," + std::to_string(p) + "]");
    double acc = 0.0;
    for (std::ptrdiff_t i = p; i-- > k;) acc += values[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)];
    return std::sqrt(acc);
}

namespace {

Matrix weighted_outer_sum(const EigenSystem& sys, bool take_sqrt) {
    const std::size_t p = sys.dim();
    Matrix m(p, p);
    for (std::size_t h = 0; h < sys.stored(); ++h) {
        const double lam = sys.values[h];
        if (lam < 0.0) throw Error(ErrorCode::NotPSD, "negative eigenvalue in square root");
        const double wgt = take_sqrt ? std::sqrt(lam) : lam;
        if (wgt == 0.0) continue;
        auto g = sys.vector(h);
        for (std::size_t i = 0; i < p; ++i)
            if (g[i] != 0.0) simd::axpy(wgt * g[i], g, m.row(i));
    }
    return m;
}

}  // namespace

Matrix symmetric_sqrt(const EigenSystem& system) { return weighted_outer_sum(system, true); }

Matrix reconstruct(const EigenSystem& system) { return weighted_outer_sum(system, false); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorCode::DimensionMismatch, "matrix shapes differ");
    double acc = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(acc);
}

}  // namespace pfa
