#pragma once

// Standard normal distribution: Phi, phi, Phi^-1 and two-sided P-values.

namespace pfa {

/// A probability in [0, 1]. Construction validates the range.
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double v);

    constexpr double value() const noexcept { return value_; }
    constexpr operator double() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

/// Phi(x). Absolute error below 1e-12; lower-tail values keep full relative
/// precision because they are computed as erfc(-x/sqrt 2)/2.
double norm_cdf(double x) noexcept;

/// phi(x) = exp(-x^2/2)/sqrt(2 pi).
double norm_pdf(double x) noexcept;

/// Phi^-1(q) for 0 < q < 1; throws Error(DomainError) otherwise.
/// Acklam's rational approximation followed by one Newton step on Phi.
double norm_quantile(double q);

/// 2 Phi(-|z|).
double two_sided_pvalue(double z) noexcept;

/// z_{t/2} = Phi^-1(t/2): the (negative) two-sided critical value for
/// P-value threshold t.
inline double critical_value(double t) { return norm_quantile(t / 2.0); }

}  // namespace pfa
