#pragma once

#include <cstddef>

namespace pfa::simd::detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
double wdot_scalar(const double* w, const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void rotate_scalar(double* x, double* y, double c, double s, std::size_t n);
void cdf_pair_scalar(const double* a, const double* s, double z, double* out, std::size_t n);
double cdf_pair_sum_scalar(const double* a, const double* s, double z, std::size_t n);

#if defined(PFA_HAVE_AVX2_KERNELS)
double dot_avx2(const double* x, const double* y, std::size_t n);
double wdot_avx2(const double* w, const double* x, const double* y, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void rotate_avx2(double* x, double* y, double c, double s, std::size_t n);
void cdf_pair_avx2(const double* a, const double* s, double z, double* out, std::size_t n);
double cdf_pair_sum_avx2(const double* a, const double* s, double z, std::size_t n);
#endif

}  // namespace pfa::simd::detail
