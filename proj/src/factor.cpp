#include "pfa/factor.hpp"

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

void check_threshold(double t) {
    if (!(t > 0.0 && t < 1.0))
        throw Error(ErrorCode::DomainError, "threshold t must lie in (0,1), got " + std::to_string(t));
}

void check_subset(std::span<const std::size_t> subset, std::size_t p) {
    for (std::size_t i : subset)
        if (i >= p) throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i) + " >= p");
}

void fill_scales(FactorModel& m) {
    std::vector<double> energy(m.p, 0.0);
    for (std::size_t h = 0; h < m.k; ++h) {
        auto row = m.loadings_t.row(h);
        for (std::size_t i = 0; i < m.p; ++i) energy[i] += row[i] * row[i];
    }
    m.a.assign(m.p, 1.0);
    m.degenerate_rows.clear();
    for (std::size_t i = 0; i < m.p; ++i) {
        const double resid = 1.0 - energy[i];
        if (resid < kDegenerateResidual) {
            m.a[i] = kDegenerateScale;
            m.degenerate_rows.push_back(i);
        } else {
            m.a[i] = 1.0 / std::sqrt(resid);
        }
    }
}

double subset_sum(double zt, std::span<const double> a, std::span<const double> eta,
                  std::span<const std::size_t> subset) {
    std::vector<double> as(subset.size());
    std::vector<double> es(subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) {
        as[j] = a[subset[j]];
        es[j] = eta[subset[j]];
    }
    return simd::cdf_pair_sum(as, es, zt);
}

}  // namespace

std::vector<std::size_t> all_indices(std::size_t p) {
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

std::size_t select_num_factors(std::span<const double> values, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw Error(ErrorCode::DomainError, "epsilon must lie in (0,1)");
    const std::size_t p = values.size();
    // suffix[k] = lambda_{k+1}^2 + ... + lambda_p^2, summed from the small end
    std::vector<double> suffix(p + 1, 0.0);
    for (std::size_t i = p; i-- > 0;) suffix[i] = suffix[i + 1] + values[i] * values[i];
    double total = 0.0;
    for (std::size_t i = p; i-- > 0;) total += values[i];
    const double bound = epsilon * total;
    for (std::size_t k = 0; k <= p; ++k)
        if (std::sqrt(suffix[k]) < bound) return k;
    return p;
}

FactorModel build_factor_model(const EigenSystem& system, std::size_t k) {
    const std::size_t p = system.dim();
    if (k > p)
        throw Error(ErrorCode::IndexOutOfRange, "k=" + std::to_string(k) + " exceeds p=" + std::to_string(p));
    FactorModel m;
    m.p = p;
    m.k = k;
    m.eigenvalues = system.values;
    m.loadings_t = Matrix(k, p);
    for (std::size_t h = 0; h < k; ++h) {
        const double lam = system.values[h];
        if (lam < 0.0) throw Error(ErrorCode::NotPSD, "negative eigenvalue among retained factors");
        if (h >= system.stored() || lam == 0.0) continue;
        const double s = std::sqrt(lam);
        auto src = system.vector(h);
        auto dst = m.loadings_t.row(h);
        for (std::size_t i = 0; i < p; ++i) dst[i] = s * src[i];
    }
    fill_scales(m);
    return m;
}

FactorModel factor_model_from_loadings(Matrix loadings_t) {
    FactorModel m;
    m.k = loadings_t.rows();
    m.p = loadings_t.cols();
    m.loadings_t = std::move(loadings_t);
    m.eigenvalues.resize(m.k);
    for (std::size_t h = 0; h < m.k; ++h)
        m.eigenvalues[h] = simd::dot(m.loadings_t.row(h), m.loadings_t.row(h));
    fill_scales(m);
    return m;
}

void compute_eta(const FactorModel& model, std::span<const double> w, std::span<double> eta) {
    if (w.size() != model.k || eta.size() != model.p)
        throw Error(ErrorCode::DimensionMismatch, "factor vector length does not match the model");
    std::fill(eta.begin(), eta.end(), 0.0);
    for (std::size_t h = 0; h < model.k; ++h) simd::axpy(w[h], model.loadings_t.row(h), eta);
}

FactorRealization realize(const FactorModel& model, std::span<const double> w) {
    FactorRealization r;
    r.w.assign(w.begin(), w.end());
    r.eta.resize(model.p);
    compute_eta(model, r.w, r.eta);
    return r;
}

FactorRealization draw_realization(const FactorModel& model, Rng& rng) {
    std::vector<double> w(model.k);
    for (double& x : w) x = rng.normal();
    return realize(model, w);
}

double fdp_numerator(double t, const FactorModel& model, const FactorRealization& real,
                     std::span<const std::size_t> subset) {
    check_threshold(t);
    check_subset(subset, model.p);
    if (model.k == 0) return static_cast<double>(subset.size()) * t;
    return subset_sum(critical_value(t), model.a, real.eta, subset);
}

double fdp_numerator(double t, const FactorModel& model, std::span<const double> eta) {
    check_threshold(t);
    if (model.k == 0) return static_cast<double>(model.p) * t;
    if (eta.size() != model.p) throw Error(ErrorCode::DimensionMismatch, "eta length differs from p");
    return simd::cdf_pair_sum(model.a, eta, critical_value(t));
}

double fdp_limit(double t, const FactorModel& model, std::span<const double> mu,
                 std::span<const std::size_t> true_nulls, const FactorRealization& real) {
    check_threshold(t);
    check_subset(true_nulls, model.p);
    if (mu.size() != model.p) throw Error(ErrorCode::DimensionMismatch, "mu length differs from p");
    const double zt = critical_value(t);
    std::vector<double> eta(model.p, 0.0);
    if (model.k > 0) {
        if (real.eta.size() != model.p)
            throw Error(ErrorCode::DimensionMismatch, "eta length differs from p");
        eta = real.eta;
    }
    const double num = subset_sum(zt, model.a, eta, true_nulls);
    for (std::size_t i = 0; i < model.p; ++i) eta[i] += mu[i];
    const double den = simd::cdf_pair_sum(model.a, eta, zt);
    if (den < 1e-300) return 0.0;
    return std::clamp(num / den, 0.0, 1.0);
}

std::size_t count_rejections(std::span<const double> z, double t) {
    std::size_t r = 0;
    for (double x : z)
        if (two_sided_pvalue(x) <= t) ++r;
    return r;
}

FdpReport estimate_fdp(double t, std::span<const double> z, const FactorModel& model,
                       std::span<const double> w_hat) {
    if (z.size() != model.p) throw Error(ErrorCode::DimensionMismatch, "z length differs from p");
    FdpReport rep;
    rep.t = t;
    std::vector<double> eta(model.p, 0.0);
    if (model.k > 0) compute_eta(model, w_hat, eta);
    rep.numerator = fdp_numerator(t, model, eta);
    rep.rejections = count_rejections(z, t);
    const double r = static_cast<double>(rep.rejections);
    rep.v_hat = std::min(rep.numerator, r);
    rep.fdp_hat = rep.rejections == 0 ? 0.0 : rep.v_hat / r;
    return rep;
}

double variance_of_false_count(double t, const FactorModel& model, std::span<const std::size_t> subset,
                               std::size_t n_mc, std::uint64_t seed) {
    if (n_mc < 2) throw Error(ErrorCode::DomainError, "variance needs at least two draws");
    check_threshold(t);
    check_subset(subset, model.p);
    if (model.k == 0 || subset.empty()) return 0.0;

    const double zt = critical_value(t);
    std::vector<double> as(subset.size());
    for (std::size_t j = 0; j < subset.size(); ++j) as[j] = model.a[subset[j]];

    std::vector<double> values(n_mc);
    parallel_for(n_mc, [&](std::size_t d) {
        Rng rng(seed, {stream::kVariance, d});
        std::vector<double> w(model.k);
        for (double& x : w) x = rng.normal();
        std::vector<double> eta(model.p);
        compute_eta(model, w, eta);
        std::vector<double> es(subset.size());
        for (std::size_t j = 0; j < subset.size(); ++j) es[j] = eta[subset[j]];
        values[d] = simd::cdf_pair_sum(as, es, zt);
    });

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n_mc);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(n_mc - 1);
}

}  // namespace pfa
