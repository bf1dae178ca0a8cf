#include "pfa/fdr.hpp"

#include "pfa/error.hpp"
#include "pfa/gauss.hpp"
#include "pfa/parallel.hpp"
#include "pfa/rng.hpp"
#include "pfa/simd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pfa {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr std::size_t kEtaCacheLimit = 25'000'000;

void check_t(double t) {
    if (!(t > 0.0 && t < 1.0))
        throw Error(ErrorCode::DomainError, "threshold t must lie in (0,1), got " + std::to_string(t));
}

std::vector<std::size_t> order_by_pvalue(std::span<const double> pvalues) {
    std::vector<std::size_t> order(pvalues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    return order;
}

// Reject the first `count` entries of `order`.
RejectionSet take_first(const std::vector<std::size_t>& order, std::size_t count, double threshold) {
    RejectionSet out;
    out.threshold = threshold;
    out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(out.indices.begin(), out.indices.end());
    return out;
}

}  // namespace

FdrCurve::FdrCurve(const FactorModel& model, std::size_t p1, std::size_t n_mc, std::uint64_t seed)
    : model_(model), p1_(p1), n_mc_(n_mc), seed_(seed) {
    if (n_mc == 0) throw Error(ErrorCode::DomainError, "need at least one Monte Carlo draw");
    if (p1 > model.p) throw Error(ErrorCode::DomainError, "p1 exceeds p");
    if (model.k == 0) return;
    w_ = Matrix(n_mc, model.k);
    for (std::size_t d = 0; d < n_mc; ++d) {
        Rng rng(seed, {stream::kControl, d});
        for (double& v : w_.row(d)) v = rng.normal();
    }
    if (n_mc * model.p <= kEtaCacheLimit) {
        eta_ = Matrix(n_mc, model.p);
        parallel_for(n_mc, [&](std::size_t d) { compute_eta(model_, w_.row(d), eta_.row(d)); });
    }
}

void FdrCurve::fill_eta(std::size_t d, std::span<double> eta) const {
    compute_eta(model_, w_.row(d), eta);
}

double FdrCurve::operator()(double t) const {
    check_t(t);
    const double p1 = static_cast<double>(p1_);
    if (model_.k == 0) {
        const double n = static_cast<double>(model_.p) * t;
        return n + p1 > 0.0 ? n / (n + p1) : 0.0;
    }
    const double zt = critical_value(t);
    std::vector<double> ratios(n_mc_);
    parallel_for(n_mc_, [&](std::size_t d) {
        double n;
        if (!eta_.empty()) {
            n = simd::cdf_pair_sum(model_.a, eta_.row(d), zt);
        } else {
            std::vector<double> eta(model_.p);
            fill_eta(d, eta);
            n = simd::cdf_pair_sum(model_.a, eta, zt);
        }
        ratios[d] = n + p1 > 0.0 ? n / (n + p1) : 0.0;
    });
    double sum = 0.0;
    for (double r : ratios) sum += r;
    return std::clamp(sum / static_cast<double>(n_mc_), 0.0, 1.0);
}

double approx_fdr(double t, const FactorModel& model, std::size_t p1, std::size_t n_mc, std::uint64_t seed) {
    check_t(t);
    return FdrCurve(model, p1, n_mc, seed)(t);
}

ControlResult solve_threshold(double alpha, const FdrCurve& curve, double tol) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::DomainError, "alpha must lie in (0,1), got " + std::to_string(alpha));
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    ControlResult res;
    res.alpha = alpha;
    res.mc_draws = curve.draws();
    res.seed = curve.seed();

    double lo = kThresholdLow;
    double hi = kThresholdHigh;
    const double f_lo = curve(lo);
    const double f_hi = curve(hi);
    if (f_hi < alpha - tol) {
        res.t_star = hi;
        res.fdr_at_t = f_hi;
        res.status = ControlStatus::AboveRange;
        return res;
    }
    if (f_lo > alpha + tol) {
        res.t_star = lo;
        res.fdr_at_t = f_lo;
        res.status = ControlStatus::BelowRange;
        return res;
    }
    if (std::fabs(f_lo - alpha) <= tol) {
        res.t_star = lo;
        res.fdr_at_t = f_lo;
        return res;
    }
    if (std::fabs(f_hi - alpha) <= tol) {
        res.t_star = hi;
        res.fdr_at_t = f_hi;
        return res;
    }
    double t = lo;
    double f = f_lo;
    for (std::size_t it = 1; it <= 400; ++it) {
        t = std::sqrt(lo * hi);
        f = curve(t);
        res.iterations = it;
        if (std::fabs(f - alpha) <= tol || hi - lo < 1e-14) break;
        if (f < alpha)
            lo = t;
        else
            hi = t;
    }
    res.t_star = t;
    res.fdr_at_t = f;
    return res;
}

ControlResult solve_threshold(double alpha, const FactorModel& model, std::size_t p1, std::size_t n_mc,
                              double tol, std::uint64_t seed) {
    const FdrCurve curve(model, p1, n_mc, seed);
    return solve_threshold(alpha, curve, tol);
}

RejectionSet bh_procedure(std::span<const double> pvalues, double alpha) {
    const std::size_t p = pvalues.size();
    const auto order = order_by_pvalue(pvalues);
    std::size_t k = 0;
    for (std::size_t i = p; i >= 1; --i) {
        if (pvalues[order[i - 1]] <= static_cast<double>(i) * alpha / static_cast<double>(p)) {
            k = i;
            break;
        }
    }
    return take_first(order, k, p == 0 ? 0.0 : static_cast<double>(k) * alpha / static_cast<double>(p));
}

RejectionSet threshold_rejections(std::span<const double> pvalues, double t) {
    RejectionSet out;
    out.threshold = t;
    for (std::size_t i = 0; i < pvalues.size(); ++i)
        if (pvalues[i] <= t) out.indices.push_back(i);
    return out;
}

double storey_null_count(std::span<const double> pvalues, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::DomainError, "lambda must lie in (0,1)");
    std::size_t above = 0;
    for (double pv : pvalues)
        if (pv > lambda) ++above;
    return std::min(static_cast<double>(above) / (1.0 - lambda), static_cast<double>(pvalues.size()));
}

double storey_estimate(std::span<const double> pvalues, double t, double lambda) {
    const double p0_hat = storey_null_count(pvalues, lambda);
    if (t <= 0.0) return 0.0;
    std::size_t r = 0;
    for (double pv : pvalues)
        if (pv <= t) ++r;
    return p0_hat * t / static_cast<double>(std::max<std::size_t>(r, 1));
}

RejectionSet storey_procedure(std::span<const double> pvalues, double alpha, double lambda) {
    const double p0_hat = storey_null_count(pvalues, lambda);
    const auto order = order_by_pvalue(pvalues);
    // R(p_(i)) >= i, with equality unless p_(i) is tied with p_(i+1); the
    // step-up scan below compares at the last index of each tie block.
    std::size_t k = 0;
    for (std::size_t i = order.size(); i >= 1; --i) {
        const double pv = pvalues[order[i - 1]];
        if (i < order.size() && pvalues[order[i]] == pv) continue;
        if (p0_hat * pv <= alpha * static_cast<double>(i)) {
            k = i;
            break;
        }
    }
    return take_first(order, k, k == 0 ? 0.0 : pvalues[order[k - 1]]);
}

TruncatedMoments truncated_normal_moments(double x0) {
    if (!(x0 > 0.0)) throw Error(ErrorCode::DomainError, "x0 must be positive");
    // Composite Simpson on [-x0, x0]; the integrands are entire functions so
    // 4000 panels are far beyond double precision needs.
    constexpr int kPanels = 4000;
    const double h = 2.0 * x0 / kPanels;
    double z0 = 0.0, m2 = 0.0, d0 = 0.0, d2 = 0.0;
    for (int j = 0; j <= kPanels; ++j) {
        const double x = -x0 + h * j;
        const double wgt = (j == 0 || j == kPanels) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        const double f = norm_pdf(x);
        const double g = 0.5 * (x * x - 1.0);
        z0 += wgt * f;
        m2 += wgt * x * x * f;
        d0 += wgt * f * g;
        d2 += wgt * x * x * f * g;
    }
    TruncatedMoments tm;
    tm.v0 = m2 / z0;
    tm.dv = d2 / z0 - tm.v0 * d0 / z0;
    return tm;
}

double efron_dispersion(std::span<const double> z, double x0) {
    const TruncatedMoments tm = truncated_normal_moments(x0);
    double s2 = 0.0;
    std::size_t n = 0;
    for (double v : z)
        if (std::fabs(v) <= x0) {
            s2 += v * v;
            ++n;
        }
    if (n == 0) return 0.0;
    s2 /= static_cast<double>(n);
    return (s2 - tm.v0) / (kSqrt2 * tm.dv);
}

double efron_estimate_given(std::span<const double> z, double t, std::size_t p0, double dispersion) {
    check_t(t);
    const std::size_t r = count_rejections(z, t);
    if (r == 0) return 0.0;
    const double zt = critical_value(t);
    const double v = static_cast<double>(p0) * t * (1.0 + 2.0 * dispersion * (-zt) * norm_pdf(zt) / (kSqrt2 * t));
    return std::clamp(v / static_cast<double>(r), 0.0, 1.0);
}

double efron_estimate(std::span<const double> z, double t, std::size_t p0, double x0) {
    return efron_estimate_given(z, t, p0, efron_dispersion(z, x0));
}

double factor_dispersion(const FactorModel& model, std::span<const double> eta,
                         std::span<const std::size_t> true_nulls) {
    if (eta.size() != model.p) throw Error(ErrorCode::DimensionMismatch, "eta length differs from p");
    if (true_nulls.empty()) throw Error(ErrorCode::EmptySet, "no true nulls");
    double s = 0.0;
    for (std::size_t i : true_nulls) {
        if (i >= model.p) throw Error(ErrorCode::IndexOutOfRange, "index >= p");
        double energy = 0.0;
        for (std::size_t h = 0; h < model.k; ++h) energy += model.loading(i, h) * model.loading(i, h);
        s += eta[i] * eta[i] - energy;
    }
    return s / (kSqrt2 * static_cast<double>(true_nulls.size()));
}

}  // namespace pfa
