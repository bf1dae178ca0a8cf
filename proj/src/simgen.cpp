#include "pfa/simgen.hpp"

#include "pfa/error.hpp"
#include "pfa/gauss.hpp"
#include "pfa/rng.hpp"
#include "pfa/simd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace pfa {

namespace {

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 6> kNames{{
    {ScenarioKind::EqualCorrelation, "equal_correlation"},
    {ScenarioKind::FanSong, "fan_song"},
    {ScenarioKind::IndependentCauchy, "independent_cauchy"},
    {ScenarioKind::ThreeFactor, "three_factor"},
    {ScenarioKind::TwoFactor, "two_factor"},
    {ScenarioKind::NonlinearFactor, "nonlinear_factor"},
}};

constexpr std::size_t kFanSongSources = 10;

std::vector<double> uniform_coefficients(std::size_t p, Rng& rng) {
    std::vector<double> c(p);
    for (double& v : c) v = 2.0 * rng.uniform() - 1.0;
    return c;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string_view to_string(ScenarioKind kind) noexcept {
    for (const auto& [k, name] : kNames)
        if (k == kind) return name;
    return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + std::string(name) + "'");
}

std::size_t fan_song_dependent_columns(std::size_t p) {
    return static_cast<std::size_t>(std::lround(0.05 * static_cast<double>(p)));
}

void Scenario::validate() const {
    if (p == 0) throw Error(ErrorCode::InvalidConfig, "p must be positive");
    if (n < 2) throw Error(ErrorCode::InvalidConfig, "n must be at least 2");
    if (p1 > p) throw Error(ErrorCode::InvalidConfig, "p1 exceeds p");
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma must be positive");
    if (!std::isfinite(beta)) throw Error(ErrorCode::InvalidConfig, "beta must be finite");
    if (kind == ScenarioKind::EqualCorrelation && !(rho >= 0.0 && rho <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "rho must lie in [0,1]");
    if (kind == ScenarioKind::FanSong && p < kFanSongSources + fan_song_dependent_columns(p))
        throw Error(ErrorCode::InvalidConfig, "fan_song needs p >= 10 + 5% of p");
}

Matrix generate_design(const Scenario& sc, Rng& rng) {
    sc.validate();
    const std::size_t n = sc.n;
    const std::size_t p = sc.p;
    Matrix x(n, p);
    switch (sc.kind) {
        case ScenarioKind::EqualCorrelation: {
            const double a = std::sqrt(sc.rho);
            const double b = std::sqrt(1.0 - sc.rho);
            for (std::size_t r = 0; r < n; ++r) {
                const double w = rng.normal();
                for (double& v : x.row(r)) v = a * w + b * rng.normal();
            }
            break;
        }
        case ScenarioKind::FanSong: {
            const std::size_t dep = fan_song_dependent_columns(p);
            const double resid = std::sqrt(1.0 - 10.0 / 25.0);
            for (std::size_t r = 0; r < n; ++r) {
                auto row = x.row(r);
                for (std::size_t c = 0; c < p - dep; ++c) row[c] = rng.normal();
                double s = 0.0;
                for (std::size_t l = 0; l < kFanSongSources; ++l) s += row[l] * (l % 2 == 0 ? 1.0 : -1.0) / 5.0;
                for (std::size_t c = p - dep; c < p; ++c) row[c] = s + resid * rng.normal();
            }
            break;
        }
        case ScenarioKind::IndependentCauchy: {
            for (double& v : x.data()) v = std::tan(std::numbers::pi * (rng.uniform() - 0.5));
            break;
        }
        case ScenarioKind::ThreeFactor: {
            const auto c1 = uniform_coefficients(p, rng);
            const auto c2 = uniform_coefficients(p, rng);
            const auto c3 = uniform_coefficients(p, rng);
            for (std::size_t r = 0; r < n; ++r) {
                const double w1 = -2.0 + rng.normal();
                const double w2 = 1.0 + rng.normal();
                const double w3 = 4.0 + rng.normal();
                auto row = x.row(r);
                for (std::size_t j = 0; j < p; ++j) row[j] = c1[j] * w1 + c2[j] * w2 + c3[j] * w3 + rng.normal();
            }
            break;
        }
        case ScenarioKind::TwoFactor: {
            const auto c1 = uniform_coefficients(p, rng);
            const auto c2 = uniform_coefficients(p, rng);
            for (std::size_t r = 0; r < n; ++r) {
                const double w1 = rng.normal();
                const double w2 = rng.normal();
                auto row = x.row(r);
                for (std::size_t j = 0; j < p; ++j) row[j] = c1[j] * w1 + c2[j] * w2 + rng.normal();
            }
            break;
        }
        case ScenarioKind::NonlinearFactor: {
            const auto c1 = uniform_coefficients(p, rng);
            const auto c2 = uniform_coefficients(p, rng);
            for (std::size_t r = 0; r < n; ++r) {
                const double w1 = rng.normal();
                const double w2 = rng.normal();
                auto row = x.row(r);
                for (std::size_t j = 0; j < p; ++j)
                    row[j] = std::sin(c1[j] * w1) + sgn(c2[j]) * std::exp(std::fabs(c2[j]) * w2) + rng.normal();
            }
            break;
        }
    }
    return x;
}

CorrelationFactor sample_correlation_factor(const Matrix& design) {
    const std::size_t n = design.rows();
    const std::size_t p = design.cols();
    if (n < 2) throw Error(ErrorCode::DimensionMismatch, "need at least two observations");
    std::vector<double> mean(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) simd::axpy(1.0, design.row(r), mean);
    for (double& m : mean) m /= static_cast<double>(n);

    CorrelationFactor f;
    f.y = Matrix(n, p);
    f.sds.assign(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        auto src = design.row(r);
        auto dst = f.y.row(r);
        for (std::size_t c = 0; c < p; ++c) {
            dst[c] = src[c] - mean[c];
            f.sds[c] += dst[c] * dst[c];
        }
    }
    std::vector<double> scale(p);
    for (std::size_t c = 0; c < p; ++c) {
        const double ss = f.sds[c];
        if (!(ss > 0.0))
            throw Error(ErrorCode::ConstantColumn, "column " + std::to_string(c) + " has zero variance");
        f.sds[c] = std::sqrt(ss / static_cast<double>(n - 1));
        scale[c] = 1.0 / std::sqrt(ss);
    }
    for (std::size_t r = 0; r < n; ++r) {
        auto row = f.y.row(r);
        for (std::size_t c = 0; c < p; ++c) row[c] *= scale[c];
    }
    return f;
}

CorrelationMatrix materialize(const CorrelationFactor& factor) {
    const std::size_t p = factor.y.cols();
    Matrix s(p, p);
    for (std::size_t r = 0; r < factor.y.rows(); ++r) {
        auto y = factor.y.row(r);
        for (std::size_t i = 0; i < p; ++i)
            if (y[i] != 0.0) simd::axpy(y[i], y, s.row(i));
    }
    for (std::size_t i = 0; i < p; ++i) {
        s(i, i) = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            const double v = std::clamp(s(i, j), -1.0, 1.0);
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return CorrelationMatrix(std::move(s));
}

std::pair<CorrelationMatrix, std::vector<double>> sample_correlation(const Matrix& design) {
    CorrelationFactor f = sample_correlation_factor(design);
    return {materialize(f), std::move(f.sds)};
}

std::vector<std::size_t> place_false_nulls(const Scenario& sc, Rng& rng) {
    std::vector<std::size_t> idx(sc.p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (sc.random_placement) {
        // partial Fisher-Yates
        for (std::size_t i = 0; i < sc.p1; ++i) {
            const std::size_t span = sc.p - i;
            const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(span));
            std::swap(idx[i], idx[std::min(j, sc.p - 1)]);
        }
    }
    idx.resize(sc.p1);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<double> mean_shifts(const Scenario& sc, std::span<const double> sds,
                                std::span<const std::size_t> false_nulls) {
    if (sds.size() != sc.p) throw Error(ErrorCode::DimensionMismatch, "sds length differs from p");
    std::vector<double> mu(sc.p, 0.0);
    const double scale = std::sqrt(static_cast<double>(sc.n)) * sc.beta / sc.sigma;
    for (std::size_t i : false_nulls) mu[i] = scale * sds[i];
    return mu;
}

namespace {

GeneratedInstance start_instance(const Scenario& sc, std::span<const double> sds, Rng& rng) {
    GeneratedInstance g;
    g.false_nulls = place_false_nulls(sc, rng);
    g.mu = mean_shifts(sc, sds, g.false_nulls);
    std::vector<char> is_false(sc.p, 0);
    for (std::size_t i : g.false_nulls) is_false[i] = 1;
    for (std::size_t i = 0; i < sc.p; ++i)
        if (!is_false[i]) g.true_nulls.push_back(i);
    g.z = g.mu;
    return g;
}

}  // namespace

GeneratedInstance make_test_statistics(const CorrelationMatrix& sigma, std::span<const double> sds,
                                       const Scenario& sc, Rng& rng) {
    sc.validate();
    if (sigma.dim() != sc.p) throw Error(ErrorCode::DimensionMismatch, "Sigma dimension differs from p");
    const Matrix m = symmetric_sqrt(spectral_decompose(sigma));
    GeneratedInstance g = start_instance(sc, sds, rng);
    std::vector<double> xi(sc.p);
    for (double& v : xi) v = rng.normal();
    for (std::size_t i = 0; i < sc.p; ++i) g.z[i] += simd::dot(m.row(i), xi);
    return g;
}

GeneratedInstance make_test_statistics(const CorrelationFactor& factor, const Scenario& sc, Rng& rng) {
    sc.validate();
    if (factor.y.cols() != sc.p) throw Error(ErrorCode::DimensionMismatch, "factor dimension differs from p");
    GeneratedInstance g = start_instance(sc, factor.sds, rng);
    for (std::size_t r = 0; r < factor.y.rows(); ++r) simd::axpy(rng.normal(), factor.y.row(r), g.z);
    return g;
}

DiscoveryCounts realized_counts(std::span<const double> z, std::span<const double> mu,
                                std::span<const std::size_t> true_nulls, double t) {
    if (mu.size() != z.size()) throw Error(ErrorCode::DimensionMismatch, "mu length differs from z");
    DiscoveryCounts c;
    for (double v : z)
        if (two_sided_pvalue(v) <= t) ++c.r;
    for (std::size_t i : true_nulls) {
        if (i >= z.size()) throw Error(ErrorCode::IndexOutOfRange, "true-null index out of range");
        if (two_sided_pvalue(z[i]) <= t) ++c.v;
    }
    c.s = c.r - c.v;
    return c;
}

double realized_fdp(const DiscoveryCounts& c) {
    return c.r == 0 ? 0.0 : static_cast<double>(c.v) / static_cast<double>(c.r);
}

}  // namespace pfa
