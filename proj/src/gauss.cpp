#include "pfa/gauss.hpp"

#include "pfa/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace pfa {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Acklam (2003), relative error 1.15e-9 before refinement.
constexpr std::array<double, 6> kA{-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kB{-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
constexpr std::array<double, 6> kC{-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kD{7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
constexpr double kLowBreak = 0.02425;

// Lower half only (q <= 0.5); the upper half follows by symmetry.
double acklam_lower(double q) {
    if (q < kLowBreak) {
        const double r = std::sqrt(-2.0 * std::log(q));
        return (((((kC[0] * r + kC[1]) * r + kC[2]) * r + kC[3]) * r + kC[4]) * r + kC[5]) /
               ((((kD[0] * r + kD[1]) * r + kD[2]) * r + kD[3]) * r + 1.0);
    }
    const double u = q - 0.5;
    const double r = u * u;
    return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * u /
           (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

double quantile_lower(double q) {
    double x = acklam_lower(q);
    // Newton on Phi(x) - q. Phi(x) is evaluated in the lower tail, so the
    // residual keeps relative precision even for q near 1e-300.
    const double pdf = norm_pdf(x);
    if (pdf > 0.0) x -= (norm_cdf(x) - q) / pdf;
    return x;
}

}  // namespace

Probability::Probability(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::DomainError, "probability outside [0,1]: " + std::to_string(v));
}

double norm_cdf(double x) noexcept { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_quantile(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw Error(ErrorCode::DomainError, "quantile level must lie in (0,1), got " + std::to_string(q));
    if (q == 0.5) return 0.0;
    if (q < 0.5) return quantile_lower(q);
    return -quantile_lower(1.0 - q);
}

double two_sided_pvalue(double z) noexcept { return std::erfc(std::fabs(z) * kInvSqrt2); }

}  // namespace pfa
