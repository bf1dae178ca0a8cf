// AVX2 + FMA variants (4 doubles per register). Compiled with -mavx2 -mfma;
// only reached through the dispatch table after a CPU feature check.

#include "simd_detail.hpp"

#include <immintrin.h>

#include <cmath>

#if defined(PFA_HAVE_LIBMVEC_ERFC)
extern "C" __m256d _ZGVdN4v_erfc(__m256d);
#endif

namespace pfa::simd::detail {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d erfc4(__m256d x) {
#if defined(PFA_HAVE_LIBMVEC_ERFC)
    return _ZGVdN4v_erfc(x);
#else
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, x);
    for (double& v : lanes) v = std::erfc(v);
    return _mm256_load_pd(lanes);
#endif
}

// Phi(x) = erfc(-x / sqrt 2) / 2
inline __m256d phi4(__m256d x) {
    const __m256d neg_inv_sqrt2 = _mm256_set1_pd(-0.70710678118654752440);
    return _mm256_mul_pd(_mm256_set1_pd(0.5), erfc4(_mm256_mul_pd(x, neg_inv_sqrt2)));
}

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

// Lane-wise Neumaier summation.
struct CompensatedSum4 {
    __m256d sum = _mm256_setzero_pd();
    __m256d carry = _mm256_setzero_pd();
    void add(__m256d v) {
        const __m256d t = _mm256_add_pd(sum, v);
        const __m256d big_sum = _mm256_cmp_pd(vabs(sum), vabs(v), _CMP_GE_OQ);
        const __m256d c1 = _mm256_add_pd(_mm256_sub_pd(sum, t), v);
        const __m256d c2 = _mm256_add_pd(_mm256_sub_pd(v, t), sum);
        carry = _mm256_add_pd(carry, _mm256_blendv_pd(c2, c1, big_sum));
        sum = t;
    }
};

}  // namespace

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double wdot_avx2(const double* w, const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d wx0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        const __m256d wx1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(x + i + 4));
        acc0 = _mm256_fmadd_pd(wx0, _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(wx1, _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        acc0 = _mm256_fmadd_pd(wx, _mm256_loadu_pd(y + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void rotate_avx2(double* x, double* y, double c, double s, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xi = _mm256_loadu_pd(x + i);
        const __m256d yi = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(x + i, _mm256_fmsub_pd(vc, xi, _mm256_mul_pd(vs, yi)));
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vs, xi, _mm256_mul_pd(vc, yi)));
    }
    for (; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi - s * yi;
        y[i] = s * xi + c * yi;
    }
}

void cdf_pair_avx2(const double* a, const double* s, double z, double* out, std::size_t n) {
    const __m256d vz = _mm256_set1_pd(z);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        const __m256d lo = phi4(_mm256_mul_pd(va, _mm256_add_pd(vz, vs)));
        const __m256d hi = phi4(_mm256_mul_pd(va, _mm256_sub_pd(vz, vs)));
        _mm256_storeu_pd(out + i, _mm256_add_pd(lo, hi));
    }
    if (i < n) cdf_pair_scalar(a + i, s + i, z, out + i, n - i);
}

double cdf_pair_sum_avx2(const double* a, const double* s, double z, std::size_t n) {
    const __m256d vz = _mm256_set1_pd(z);
    CompensatedSum4 acc;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vs = _mm256_loadu_pd(s + i);
        acc.add(phi4(_mm256_mul_pd(va, _mm256_add_pd(vz, vs))));
        acc.add(phi4(_mm256_mul_pd(va, _mm256_sub_pd(vz, vs))));
    }
    alignas(32) double sums[4];
    alignas(32) double carries[4];
    _mm256_store_pd(sums, acc.sum);
    _mm256_store_pd(carries, acc.carry);
    double total = 0.0;
    double carry = 0.0;
    for (int l = 0; l < 4; ++l) {
        total += sums[l];
        carry += carries[l];
    }
    if (i < n) total += cdf_pair_sum_scalar(a + i, s + i, z, n - i);
    return total + carry;
}

}  // namespace pfa::simd::detail
