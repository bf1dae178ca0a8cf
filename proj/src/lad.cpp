#include "pfa/lad.hpp"

#include "pfa/error.hpp"
#include "pfa/simd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pfa {

namespace {

// Dense LU with partial pivoting for the k x k vertex systems.
class Lu {
public:
    explicit Lu(Matrix a) : a_(std::move(a)), piv_(a_.rows()) {
        const std::size_t n = a_.rows();
        std::iota(piv_.begin(), piv_.end(), std::size_t{0});
        double amax = 0.0;
        for (double v : a_.data()) amax = std::max(amax, std::fabs(v));
        const double tiny = 1e-12 * std::max(amax, 1e-300);
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t best = c;
            for (std::size_t r = c + 1; r < n; ++r)
                if (std::fabs(a_(r, c)) > std::fabs(a_(best, c))) best = r;
            if (std::fabs(a_(best, c)) <= tiny) {
                singular_ = true;
                return;
            }
            a_.swap_rows(c, best);
            std::swap(piv_[c], piv_[best]);
            const double inv = 1.0 / a_(c, c);
            for (std::size_t r = c + 1; r < n; ++r) {
                const double f = a_(r, c) * inv;
                a_(r, c) = f;
                if (f != 0.0)
                    simd::axpy(-f, a_.row(c).subspan(c + 1), a_.row(r).subspan(c + 1));
            }
        }
    }

    bool singular() const noexcept { return singular_; }

    // A x = b
    std::vector<double> solve(std::span<const double> b) const {
        const std::size_t n = a_.rows();
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[piv_[i]];
            for (std::size_t j = 0; j < i; ++j) s -= a_(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = x[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= a_(i, j) * x[j];
            x[i] = s / a_(i, i);
        }
        return x;
    }

    // A^T x = b
    std::vector<double> solve_transposed(std::span<const double> b) const {
        const std::size_t n = a_.rows();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < i; ++j) s -= a_(j, i) * y[j];
            y[i] = s / a_(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = y[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= a_(j, i) * y[j];
            y[i] = s;
        }
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[piv_[i]] = y[i];
        return x;
    }

private:
    Matrix a_;
    std::vector<std::size_t> piv_;
    bool singular_ = false;
};

// In-place Cholesky of a symmetric positive definite matrix; false if a
// pivot falls below rel * (original diagonal).
bool cholesky(Matrix& a, double rel) {
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < n; ++j) {
        const double orig = a(j, j);
        double d = orig;
        for (std::size_t c = 0; c < j; ++c) d -= a(j, c) * a(j, c);
        if (!(d > rel * orig) || !(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t c = 0; c < j; ++c) s -= a(i, c) * a(j, c);
            a(i, j) = s / ljj;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const Matrix& l, std::vector<double> b) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t c = 0; c < i; ++c) s -= l(i, c) * b[c];
        b[i] = s / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= l(c, i) * b[c];
        b[i] = s / l(i, i);
    }
    return b;
}

// Weighted least squares through the normal equations. xt is the k x m
// transposed design; weights may be null for ordinary least squares.
bool weighted_ls(const Matrix& xt, std::span<const double> y, std::span<const double> w,
                 std::vector<double>& beta) {
    const std::size_t k = xt.rows();
    Matrix a(k, k);
    std::vector<double> b(k);
    for (std::size_t g = 0; g < k; ++g) {
        for (std::size_t h = 0; h <= g; ++h)
            a(g, h) = a(h, g) = simd::wdot(w, xt.row(g), xt.row(h));
        b[g] = simd::wdot(w, xt.row(g), y);
    }
    if (!cholesky(a, 1e-13)) return false;
    beta = cholesky_solve(a, std::move(b));
    return true;
}

void residuals(const Matrix& x, std::span<const double> y, std::span<const double> beta, std::vector<double>& r) {
    r.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) r[i] = y[i] - simd::dot(x.row(i), beta);
}

double abs_sum(std::span<const double> r) {
    double s = 0.0;
    for (double v : r) s += std::fabs(v);
    return s;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Up to k rows in order of increasing |r| that are linearly independent,
// picked by Gram-Schmidt.
std::vector<std::size_t> pick_basis(const Matrix& x, std::span<const double> r) {
    const std::size_t m = x.rows();
    const std::size_t k = x.cols();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::fabs(r[a]) < std::fabs(r[b]); });
    std::vector<std::size_t> basis;
    Matrix q(k, k);
    std::vector<double> v(k);
    for (std::size_t i : order) {
        if (basis.size() == k) break;
        auto xi = x.row(i);
        std::copy(xi.begin(), xi.end(), v.begin());
        const double n0 = std::sqrt(simd::dot(v, v));
        if (n0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t b = 0; b < basis.size(); ++b) simd::axpy(-simd::dot(q.row(b), v), q.row(b), v);
        const double n1 = std::sqrt(simd::dot(v, v));
        if (n1 <= 1e-8 * n0) continue;
        auto qb = q.row(basis.size());
        for (std::size_t c = 0; c < k; ++c) qb[c] = v[c] / n1;
        basis.push_back(i);
    }
    return basis;
}

struct VertexResult {
    std::vector<double> beta;
    double objective;
    std::size_t iterations;
    bool optimal;
};

// Basis-exchange descent over vertices of the L1 problem (a reduced
// gradient simplex). Each step frees the basis row whose multiplier
// violates |u_j| <= 1 most and line-searches to the next breakpoint.
VertexResult vertex_descent(const Matrix& x, std::span<const double> y, std::vector<std::size_t> basis,
                            double tol, double ztol, std::size_t max_iter) {
    const std::size_t m = x.rows();
    const std::size_t k = x.cols();
    VertexResult best{{}, 0.0, 0, false};
    std::vector<char> in_basis(m, 0);
    for (std::size_t i : basis) in_basis[i] = 1;
    std::vector<double> r;
    std::vector<double> c(m);
    std::vector<double> rhs(k);

    for (std::size_t it = 0;; ++it) {
        Matrix xb(k, k);
        std::vector<double> yb(k);
        for (std::size_t j = 0; j < k; ++j) {
            auto src = x.row(basis[j]);
            std::copy(src.begin(), src.end(), xb.row(j).begin());
            yb[j] = y[basis[j]];
        }
        const Lu lu(std::move(xb));
        if (lu.singular()) break;
        std::vector<double> beta = lu.solve(yb);
        residuals(x, y, beta, r);
        for (std::size_t i : basis) r[i] = 0.0;
        const double obj = abs_sum(r);
        if (best.beta.empty() || obj <= best.objective) {
            best.beta = beta;
            best.objective = obj;
        }
        best.iterations = it;
        if (it >= max_iter) break;

        std::vector<double> g(k, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            if (!in_basis[i] && std::fabs(r[i]) > ztol) simd::axpy(sign(r[i]), x.row(i), g);
        std::vector<double> u = lu.solve_transposed(g);
        for (double& v : u) v = -v;

        std::vector<std::size_t> cand;
        for (std::size_t j = 0; j < k; ++j)
            if (std::fabs(u[j]) > 1.0 + tol) cand.push_back(j);
        if (cand.empty()) {
            best.optimal = true;
            break;
        }
        std::stable_sort(cand.begin(), cand.end(),
                         [&](std::size_t a, std::size_t b) { return std::fabs(u[a]) > std::fabs(u[b]); });

        bool moved = false;
        for (std::size_t j : cand) {
            const double sigma = u[j] > 0.0 ? -1.0 : 1.0;
            std::fill(rhs.begin(), rhs.end(), 0.0);
            rhs[j] = sigma;
            const std::vector<double> d = lu.solve(rhs);
            double slope = 1.0;
            std::vector<std::pair<double, double>> breaks;
            for (std::size_t i = 0; i < m; ++i) {
                if (in_basis[i]) continue;
                c[i] = simd::dot(x.row(i), d);
                if (std::fabs(r[i]) <= ztol) {
                    slope += std::fabs(c[i]);
                } else {
                    slope -= sign(r[i]) * c[i];
                    if (c[i] != 0.0 && r[i] / c[i] > 0.0) breaks.emplace_back(r[i] / c[i], static_cast<double>(i));
                }
            }
            if (slope >= -1e-12) continue;
            std::sort(breaks.begin(), breaks.end());
            for (const auto& [tau, idx] : breaks) {
                const auto i = static_cast<std::size_t>(idx);
                slope += 2.0 * std::fabs(c[i]);
                if (slope >= 0.0) {
                    in_basis[basis[j]] = 0;
                    basis[j] = i;
                    in_basis[i] = 1;
                    moved = true;
                    break;
                }
            }
            if (moved) break;
        }
        if (!moved) break;
    }
    return best;
}

}  // namespace

CalibrationSet select_calibration_set(std::span<const double> z, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(ErrorCode::DomainError, "calibration fraction must lie in (0,1]");
    const auto m = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(z.size())));
    if (m == 0) throw Error(ErrorCode::EmptySet, "calibration set is empty");
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::fabs(z[a]) < std::fabs(z[b]); });
    order.resize(m);
    return {std::move(order), fraction};
}

double lad_objective(const Matrix& x, std::span<const double> y, std::span<const double> beta) {
    std::vector<double> r;
    residuals(x, y, beta, r);
    return abs_sum(r);
}

bool lad_certificate(const Matrix& x, std::span<const double> y, std::span<const double> beta, double tol) {
    const std::size_t m = x.rows();
    const std::size_t k = x.cols();
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::fabs(v));
    const double ztol = 1e-9 * (1.0 + ymax);
    std::vector<double> r;
    residuals(x, y, beta, r);
    for (std::size_t h = 0; h < k; ++h) {
        double s = 0.0, slack = 0.0, total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double b = x(i, h);
            total += std::fabs(b);
            if (std::fabs(r[i]) <= ztol)
                slack += std::fabs(b);
            else
                s += b * sign(r[i]);
        }
        if (std::fabs(s) > slack + tol * total) return false;
    }
    return true;
}

FactorFit lad_regress(const Matrix& x, std::span<const double> y, double tol, std::size_t max_iter) {
    const std::size_t m = x.rows();
    const std::size_t k = x.cols();
    if (k == 0 || m < k)
        throw Error(ErrorCode::DimensionMismatch, "LAD needs m >= k >= 1 (m=" + std::to_string(m) +
                                                      ", k=" + std::to_string(k) + ")");
    if (y.size() != m) throw Error(ErrorCode::DimensionMismatch, "response length differs from design rows");

    const Matrix xt = x.transposed();
    std::vector<double> w(m, 1.0);
    std::vector<double> beta;
    if (!weighted_ls(xt, y, w, beta)) throw Error(ErrorCode::RankDeficient, "design lacks full column rank");

    FactorFit fit;
    std::vector<double> r;
    residuals(x, y, beta, r);

    // Smoothing scale tied to the typical residual size.
    std::vector<double> ar(m);
    for (std::size_t i = 0; i < m; ++i) ar[i] = std::fabs(r[i]);
    std::nth_element(ar.begin(), ar.begin() + static_cast<std::ptrdiff_t>(m / 2), ar.end());
    double scale = ar[m / 2];
    if (scale == 0.0) scale = abs_sum(r) / static_cast<double>(m);
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::fabs(v));
    const double ztol = 1e-11 * (1.0 + ymax);

    std::size_t iters = 0;
    if (scale > 0.0) {
        for (double level = 1e-2; level >= 1e-8 * 0.999 && iters < max_iter; level *= 0.1) {
            const double mu = level * scale;
            for (int inner = 0; inner < 12 && iters < max_iter; ++inner, ++iters) {
                for (std::size_t i = 0; i < m; ++i) w[i] = 1.0 / std::sqrt(r[i] * r[i] + mu * mu);
                std::vector<double> next;
                if (!weighted_ls(xt, y, w, next)) break;
                double delta = 0.0, size = 1.0;
                for (std::size_t h = 0; h < k; ++h) {
                    delta = std::max(delta, std::fabs(next[h] - beta[h]));
                    size = std::max(size, std::fabs(next[h]));
                }
                beta = std::move(next);
                residuals(x, y, beta, r);
                if (delta <= 1e-6 * size) break;
            }
        }
    }
    fit.w_hat = beta;
    fit.objective = abs_sum(r);

    const std::vector<std::size_t> basis = pick_basis(x, r);
    if (basis.size() == k) {
        const std::size_t budget = max_iter > iters ? max_iter - iters : 0;
        VertexResult v = vertex_descent(x, y, basis, tol, ztol, std::max<std::size_t>(budget, 1));
        iters += v.iterations;
        if (!v.beta.empty() && v.objective <= fit.objective) {
            fit.w_hat = std::move(v.beta);
            fit.objective = lad_objective(x, y, fit.w_hat);
        }
    }

    const double zero_obj = abs_sum(y);
    if (fit.objective > zero_obj) {
        fit.w_hat.assign(k, 0.0);
        fit.objective = zero_obj;
    }
    fit.iterations = iters;
    fit.converged = lad_certificate(x, y, fit.w_hat, tol);
    return fit;
}

FactorFit fit_factors(const FactorModel& model, std::span<const double> z, const CalibrationSet& cal,
                      double tol, std::size_t max_iter) {
    if (z.size() != model.p) throw Error(ErrorCode::DimensionMismatch, "z length differs from p");
    const std::size_t m = cal.indices.size();
    std::vector<double> y(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (cal.indices[j] >= model.p) throw Error(ErrorCode::IndexOutOfRange, "calibration index >= p");
        y[j] = z[cal.indices[j]];
    }
    if (model.k == 0) return {{}, abs_sum(y), 0, true};
    Matrix x(m, model.k);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t h = 0; h < model.k; ++h) x(j, h) = model.loadings_t(h, cal.indices[j]);
    return lad_regress(x, y, tol, max_iter);
}

std::vector<double> ls_regress(const FactorModel& model, std::span<const double> z) {
    if (z.size() != model.p) throw Error(ErrorCode::DimensionMismatch, "z length differs from p");
    std::vector<double> w(model.k);
    for (std::size_t h = 0; h < model.k; ++h) {
        const double lam = model.eigenvalues[h];
        if (!(lam > 0.0)) throw Error(ErrorCode::ZeroEigenvalue, "lambda_" + std::to_string(h + 1) + " is zero");
        w[h] = simd::dot(model.loadings_t.row(h), z) / lam;
    }
    return w;
}

double misspecification_bound(const FactorModel& model, std::span<const double> mu) {
    double inv = 0.0;
    for (std::size_t h = 0; h < model.k; ++h) {
        const double lam = model.eigenvalues[h];
        if (!(lam > 0.0)) throw Error(ErrorCode::ZeroEigenvalue, "lambda_" + std::to_string(h + 1) + " is zero");
        inv += 1.0 / lam;
    }
    return std::sqrt(simd::dot(mu, mu)) * std::sqrt(inv);
}

}  // namespace pfa
