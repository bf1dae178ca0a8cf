#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2+FMA variant; the variant is chosen
// once at runtime from the CPU feature bits. Setting PFA_SIMD=scalar in the
// environment forces the reference kernels.

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace pfa::simd {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b) noexcept;

struct KernelTable {
    Backend backend;
    // sum_i x_i y_i
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i w_i x_i y_i
    double (*wdot)(const double* w, const double* x, const double* y, std::size_t n);
    // y += a x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // (x, y) <- (c x - s y, s x + c y)
    void (*rotate)(double* x, double* y, double c, double s, std::size_t n);
    // out_i = Phi(a_i (z + s_i)) + Phi(a_i (z - s_i))
    void (*cdf_pair)(const double* a, const double* s, double z, double* out, std::size_t n);
    // compensated sum over i of the cdf_pair terms
    double (*cdf_pair_sum)(const double* a, const double* s, double z, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels() noexcept;

/// The table selected for this process.
const KernelTable& active() noexcept;
/// Override the selection (tests, benchmarks). Returns false if the
/// requested backend is unavailable; the selection is then unchanged.
bool select(Backend b) noexcept;

inline double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    return active().dot(x.data(), y.data(), x.size());
}

inline double wdot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
    assert(w.size() == x.size() && x.size() == y.size());
    return active().wdot(w.data(), x.data(), y.data(), x.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(a, x.data(), y.data(), x.size());
}

inline void rotate(std::span<double> x, std::span<double> y, double c, double s) {
    assert(x.size() == y.size());
    active().rotate(x.data(), y.data(), c, s, x.size());
}

inline void cdf_pair(std::span<const double> a, std::span<const double> s, double z, std::span<double> out) {
    assert(a.size() == s.size() && s.size() == out.size());
    active().cdf_pair(a.data(), s.data(), z, out.data(), a.size());
}

inline double cdf_pair_sum(std::span<const double> a, std::span<const double> s, double z) {
    assert(a.size() == s.size());
    return active().cdf_pair_sum(a.data(), s.data(), z, a.size());
}

}  // namespace pfa::simd
