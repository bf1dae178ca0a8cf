#pragma once

// FDR control through the factor model, plus the baselines it is compared
// against: Benjamini-Hochberg, Storey's estimator and Efron's dispersion
// adjustment.

#include "pfa/factor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pfa {

inline constexpr double kThresholdLow = 1e-12;
inline constexpr double kThresholdHigh = 0.5;

/// Monte Carlo estimate of FDR(t) = E[N(t) / (N(t) + p1)] with
/// N(t) = sum_i Phi(a_i(z_{t/2} + eta_i)) + Phi(a_i(z_{t/2} - eta_i)).
/// The factor draws are fixed at construction (common random numbers), so
/// the curve is nondecreasing in t.
class FdrCurve {
public:
    FdrCurve(const FactorModel& model, std::size_t p1, std::size_t n_mc, std::uint64_t seed);

    double operator()(double t) const;

    std::size_t draws() const noexcept { return n_mc_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    void fill_eta(std::size_t d, std::span<double> eta) const;

    const FactorModel& model_;
    std::size_t p1_;
    std::size_t n_mc_;
    std::uint64_t seed_;
    Matrix w_;    // n_mc x k
    Matrix eta_;  // n_mc x p when small enough to cache, else empty
};

double approx_fdr(double t, const FactorModel& model, std::size_t p1, std::size_t n_mc, std::uint64_t seed);

enum class ControlStatus {
    Solved,
    /// FDR(1e-12) already exceeds alpha.
    BelowRange,
    /// FDR(0.5) is still below alpha.
    AboveRange,
};

struct ControlResult {
    double alpha = 0.0;
    double t_star = 0.0;
    double fdr_at_t = 0.0;
    std::size_t mc_draws = 0;
    std::uint64_t seed = 0;
    ControlStatus status = ControlStatus::Solved;
    std::size_t iterations = 0;
};

/// Bisection (geometric midpoints) on [1e-12, 0.5] until |FDR(t) - alpha| <= tol
/// or the bracket is narrower than 1e-14. Unreachable targets are reported
/// through `status` with t_star at the violated end.
ControlResult solve_threshold(double alpha, const FactorModel& model, std::size_t p1, std::size_t n_mc,
                              double tol, std::uint64_t seed);
ControlResult solve_threshold(double alpha, const FdrCurve& curve, double tol);

struct RejectionSet {
    std::vector<std::size_t> indices;  // ascending
    double threshold = 0.0;            // P-value cutoff used
};

/// Step-up: k = max{i : p_(i) <= i alpha / p}; rejects p_(1..k).
RejectionSet bh_procedure(std::span<const double> pvalues, double alpha);

/// {i : P_i <= t}
RejectionSet threshold_rejections(std::span<const double> pvalues, double t);

/// Estimated number of true nulls, #{P_i > lambda} / (1 - lambda), capped at p.
double storey_null_count(std::span<const double> pvalues, double lambda);

/// p0_hat * t / max(R(t), 1).
double storey_estimate(std::span<const double> pvalues, double t, double lambda);

/// Largest observed P-value cutoff whose Storey estimate is <= alpha; rejects
/// everything at or below it.
RejectionSet storey_procedure(std::span<const double> pvalues, double alpha, double lambda);

/// Constants of N(0,1) truncated to [-x0, x0]: v0 is the variance and
/// dv the derivative of that variance with respect to a small inflation
/// delta of the parent variance (density phi(x)(1 + delta (x^2 - 1)/2)).
struct TruncatedMoments {
    double v0 = 0.0;
    double dv = 0.0;
};
TruncatedMoments truncated_normal_moments(double x0);

/// Dispersion variate by moment matching on {|z_i| <= x0}:
/// A = (mean z_i^2 - v0) / (sqrt 2 dv).
double efron_dispersion(std::span<const double> z, double x0);

/// p0 t [1 + 2 A (-z_{t/2}) phi(z_{t/2}) / (sqrt 2 t)] / R(t), clipped to [0,1];
/// 0 when R(t) = 0.
double efron_estimate(std::span<const double> z, double t, std::size_t p0, double x0);
double efron_estimate_given(std::span<const double> z, double t, std::size_t p0, double dispersion);

/// (1 / (sqrt 2 p0)) sum_{i true null} (eta_i^2 - sum_h b_ih^2): the
/// dispersion implied by a factor realization.
double factor_dispersion(const FactorModel& model, std::span<const double> eta,
                         std::span<const std::size_t> true_nulls);

}  // namespace pfa
