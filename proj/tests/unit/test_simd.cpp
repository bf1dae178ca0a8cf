#include "helpers.hpp"
#include "pfa/gauss.hpp"
#include "pfa/simd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pfa;

namespace {

const simd::KernelTable* vector_table() { return simd::avx2_kernels(); }

std::vector<double> uniform(std::size_t n, std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(gen);
    return v;
}

// lengths covering empty input, partial vectors and the unrolled main loop
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 127, 1000, 4099};

}  // namespace

TEST(SimdDispatch, ScalarAlwaysAvailable) {
    EXPECT_EQ(simd::scalar_kernels().backend, simd::Backend::Scalar);
    EXPECT_TRUE(simd::select(simd::Backend::Scalar));
    EXPECT_EQ(simd::active().backend, simd::Backend::Scalar);
    if (vector_table()) {
        EXPECT_TRUE(simd::select(simd::Backend::Avx2));
        EXPECT_EQ(simd::active().backend, simd::Backend::Avx2);
    } else {
        EXPECT_FALSE(simd::select(simd::Backend::Avx2));
    }
}

TEST(SimdEquivalence, DotAndWeightedDot) {
    const auto* v = vector_table();
    if (!v) GTEST_SKIP() << "no AVX2 kernels";
    const auto& s = simd::scalar_kernels();
    std::mt19937_64 gen(1);
    for (std::size_t n : kLengths) {
        const auto x = uniform(n, gen, -3, 3), y = uniform(n, gen, -3, 3), w = uniform(n, gen, 0, 2);
        double mag = 0.0, wmag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mag += std::fabs(x[i] * y[i]);
            wmag += std::fabs(w[i] * x[i] * y[i]);
        }
        EXPECT_NEAR(v->dot(x.data(), y.data(), n), s.dot(x.data(), y.data(), n), 1e-14 * (1 + mag)) << n;
        EXPECT_NEAR(v->wdot(w.data(), x.data(), y.data(), n), s.wdot(w.data(), x.data(), y.data(), n),
                    1e-14 * (1 + wmag))
            << n;
    }
}

TEST(SimdEquivalence, AxpyAndRotate) {
    const auto* v = vector_table();
    if (!v) GTEST_SKIP() << "no AVX2 kernels";
    const auto& s = simd::scalar_kernels();
    std::mt19937_64 gen(2);
    for (std::size_t n : kLengths) {
        const auto x = uniform(n, gen, -5, 5), y = uniform(n, gen, -5, 5);
        auto y1 = y, y2 = y;
        s.axpy(0.37, x.data(), y1.data(), n);
        v->axpy(0.37, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14 * (1 + std::fabs(y1[i])));

        const double th = 0.9;
        auto a1 = x, b1 = y, a2 = x, b2 = y;
        s.rotate(a1.data(), b1.data(), std::cos(th), std::sin(th), n);
        v->rotate(a2.data(), b2.data(), std::cos(th), std::sin(th), n);
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(a1[i], a2[i], 1e-14 * 10);
            EXPECT_NEAR(b1[i], b2[i], 1e-14 * 10);
        }
    }
}

TEST(SimdEquivalence, CdfPair) {
    const auto* v = vector_table();
    if (!v) GTEST_SKIP() << "no AVX2 kernels";
    const auto& s = simd::scalar_kernels();
    std::mt19937_64 gen(3);
    for (std::size_t n : kLengths) {
        const auto a = uniform(n, gen, 1.0, 5.0), sh = uniform(n, gen, -8.0, 8.0);
        for (double z : {-3.29, -2.0, -0.5, 0.0}) {
            std::vector<double> o1(n), o2(n);
            s.cdf_pair(a.data(), sh.data(), z, o1.data(), n);
            v->cdf_pair(a.data(), sh.data(), z, o2.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_NEAR(o1[i], o2[i], 1e-15 + 1e-13 * o1[i]) << n << " " << i;
                const double ref = norm_cdf(a[i] * (z + sh[i])) + norm_cdf(a[i] * (z - sh[i]));
                EXPECT_NEAR(o1[i], ref, 1e-15 + 1e-14 * ref);
            }
            const double t1 = s.cdf_pair_sum(a.data(), sh.data(), z, n);
            const double t2 = v->cdf_pair_sum(a.data(), sh.data(), z, n);
            EXPECT_NEAR(t1, t2, 1e-12 * (1 + t1)) << n;
        }
    }
}

TEST(SimdEquivalence, CdfPairExtremeArguments) {
    const auto* v = vector_table();
    if (!v) GTEST_SKIP() << "no AVX2 kernels";
    const auto& s = simd::scalar_kernels();
    const std::vector<double> a{1.0, 1e6, 1e6, 1.0, 50.0, 1.0, 1.0, 1.0};
    const std::vector<double> sh{0.0, 0.0, 1e-3, 40.0, -40.0, 1e300, -1e300, 0.0};
    std::vector<double> o1(a.size()), o2(a.size());
    s.cdf_pair(a.data(), sh.data(), -3.0, o1.data(), a.size());
    v->cdf_pair(a.data(), sh.data(), -3.0, o2.data(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(std::isfinite(o2[i])) << i;
        EXPECT_NEAR(o1[i], o2[i], 1e-15 + 1e-13 * o1[i]) << i;
    }
}

TEST(SimdEquivalence, ActiveWrappersUseSelection) {
    std::mt19937_64 gen(4);
    const auto x = uniform(101, gen, -1, 1), y = uniform(101, gen, -1, 1);
    ASSERT_TRUE(simd::select(simd::Backend::Scalar));
    const double ds = simd::dot(x, y);
    EXPECT_EQ(ds, simd::scalar_kernels().dot(x.data(), y.data(), x.size()));
    if (vector_table()) {
        ASSERT_TRUE(simd::select(simd::Backend::Avx2));
        EXPECT_NEAR(simd::dot(x, y), ds, 1e-13);
    }
}
