#include "simd_detail.hpp"

#include <cmath>

namespace pfa::simd::detail {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

}  // namespace

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double wdot_scalar(const double* w, const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void rotate_scalar(double* x, double* y, double c, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi - s * yi;
        y[i] = s * xi + c * yi;
    }
}

void cdf_pair_scalar(const double* a, const double* s, double z, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = phi_cdf(a[i] * (z + s[i])) + phi_cdf(a[i] * (z - s[i]));
}

double cdf_pair_sum_scalar(const double* a, const double* s, double z, std::size_t n) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) {
        acc.add(phi_cdf(a[i] * (z + s[i])));
        acc.add(phi_cdf(a[i] * (z - s[i])));
    }
    return acc.value();
}

}  // namespace pfa::simd::detail
