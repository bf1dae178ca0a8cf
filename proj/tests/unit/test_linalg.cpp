#include "helpers.hpp"
#include "pfa/error.hpp"
#include "pfa/linalg.hpp"
#include "pfa/rng.hpp"
#include "pfa/simgen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace pfa;
using testing_util::from_dense;
using testing_util::max_abs_diff;

namespace {

double orthonormality_error(const Matrix& v) {
    double worst = 0.0;
    for (std::size_t a = 0; a < v.rows(); ++a)
        for (std::size_t b = a; b < v.rows(); ++b) {
            double d = 0.0;
            for (std::size_t c = 0; c < v.cols(); ++c) d += v(a, c) * v(b, c);
            worst = std::max(worst, std::fabs(d - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

}  // namespace

TEST(CorrelationMatrix, RejectsBadInput) {
    Matrix asym = Matrix::identity(3);
    asym(0, 1) = 0.2;
    asym(1, 0) = 0.2000001;
    try {
        CorrelationMatrix c(asym);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotSymmetric);
    }
    EXPECT_THROW(CorrelationMatrix(Matrix(2, 3)), Error);
    Matrix diag = Matrix::identity(3);
    diag(2, 2) = 1.5;
    try {
        CorrelationMatrix c(diag);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DomainError);
    }
    Matrix big = Matrix::identity(2);
    big(0, 1) = big(1, 0) = 1.2;
    EXPECT_THROW(CorrelationMatrix{big}, Error);
}

TEST(SpectralDecompose, Identity) {
    const EigenSystem es = spectral_decompose(CorrelationMatrix::identity(3));
    for (double v : es.values) EXPECT_NEAR(v, 1.0, 1e-15);
    EXPECT_LT(orthonormality_error(es.vectors), 1e-14);
}

TEST(SpectralDecompose, SmallEquicorrelation) {
    const EigenSystem es = spectral_decompose(CorrelationMatrix::equicorrelation(4, 0.5));
    ASSERT_EQ(es.values.size(), 4u);
    EXPECT_NEAR(es.values[0], 2.5, 1e-13);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(es.values[i], 0.5, 1e-13);
    // top eigenvector is the normalised ones vector up to sign
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::fabs(es.vectors(0, i)), 0.5, 1e-13);
}

TEST(SpectralDecompose, MatchesJacobiOracle) {
    std::mt19937_64 gen(11);
    for (std::size_t p : {2u, 5u, 17u, 40u}) {
        const CorrelationMatrix c = testing_util::random_correlation(p, p + 3, gen);
        const EigenSystem es = spectral_decompose(c);
        const auto [values, vectors] = oracle::jacobi_eigen(testing_util::to_dense(c.matrix()));
        for (std::size_t i = 0; i < p; ++i) EXPECT_NEAR(es.values[i], values[i], 1e-11) << p << " " << i;
        // eigenvectors agree up to sign where the eigenvalue is simple
        for (std::size_t i = 0; i < p; ++i) {
            const bool simple = (i == 0 || values[i - 1] - values[i] > 1e-6) &&
                                (i + 1 == p || values[i] - values[i + 1] > 1e-6);
            if (!simple) continue;
            double d = 0.0;
            for (std::size_t c2 = 0; c2 < p; ++c2) d += es.vectors(i, c2) * vectors[i][c2];
            EXPECT_NEAR(std::fabs(d), 1.0, 1e-9) << p << " " << i;
        }
    }
}

TEST(SpectralDecompose, RandomReconstructionAndTrace) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t p = 2 + trial * 7;
        const CorrelationMatrix c = testing_util::random_correlation(p, 3 + trial % 5 * p, gen);
        const EigenSystem es = spectral_decompose(c);
        EXPECT_LE(frobenius_distance(reconstruct(es), c.matrix()), 1e-7 * p);
        EXPECT_NEAR(std::accumulate(es.values.begin(), es.values.end(), 0.0), static_cast<double>(p), 1e-6 * p);
        EXPECT_LT(orthonormality_error(es.vectors), 1e-10);
        for (std::size_t i = 1; i < p; ++i) EXPECT_GE(es.values[i - 1], es.values[i]);
        for (double v : es.values) EXPECT_GE(v, 0.0);
    }
}

TEST(SpectralDecompose, ScenarioMatrices) {
    for (ScenarioKind kind : {ScenarioKind::EqualCorrelation, ScenarioKind::FanSong, ScenarioKind::IndependentCauchy,
                              ScenarioKind::ThreeFactor, ScenarioKind::TwoFactor, ScenarioKind::NonlinearFactor}) {
        Scenario sc;
        sc.kind = kind;
        sc.p = 220;
        sc.n = 60;
        Rng rng(3, {static_cast<std::uint64_t>(kind)});
        const CorrelationFactor f = sample_correlation_factor(generate_design(sc, rng));
        const CorrelationMatrix c = materialize(f);
        const EigenSystem es = spectral_decompose(c);
        EXPECT_LE(frobenius_distance(reconstruct(es), c.matrix()), 1e-7 * sc.p) << to_string(kind);
        double trace = 0.0;
        for (double v : es.values) trace += v;
        EXPECT_NEAR(trace, static_cast<double>(sc.p), 1e-6 * sc.p);
    }
}

TEST(SpectralDecompose, RejectsIndefinite) {
    Matrix m = Matrix::identity(3);
    m(0, 1) = m(1, 0) = 0.9;
    m(0, 2) = m(2, 0) = 0.9;
    m(1, 2) = m(2, 1) = -0.9;
    try {
        spectral_decompose(CorrelationMatrix(m));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotPSD);
    }
}

TEST(SpectralDecompose, FactoredRouteMatchesDense) {
    Scenario sc;
    sc.kind = ScenarioKind::TwoFactor;
    sc.p = 150;
    sc.n = 40;
    Rng rng(17, {1});
    const CorrelationFactor f = sample_correlation_factor(generate_design(sc, rng));
    const EigenSystem dense = spectral_decompose(materialize(f));
    const EigenSystem thin = spectral_decompose_factored(f.y);
    ASSERT_EQ(thin.values.size(), sc.p);
    EXPECT_LE(thin.stored(), sc.n);
    for (std::size_t i = 0; i < sc.p; ++i) EXPECT_NEAR(thin.values[i], dense.values[i], 1e-10) << i;
    for (std::size_t i = 0; i < 10; ++i) {
        double d = 0.0;
        for (std::size_t c = 0; c < sc.p; ++c) d += thin.vectors(i, c) * dense.vectors(i, c);
        EXPECT_NEAR(std::fabs(d), 1.0, 1e-8) << i;
    }
    EXPECT_LT(orthonormality_error(thin.vectors), 1e-10);
}

TEST(TailEnergy, Examples) {
    const std::vector<double> ones{1, 1, 1};
    EXPECT_EQ(tail_energy(ones, 3), 0.0);
    EXPECT_NEAR(tail_energy(ones, 0), std::sqrt(3.0), 1e-15);
    const std::vector<double> eq{2.5, 0.5, 0.5, 0.5};
    EXPECT_NEAR(tail_energy(eq, 1), std::sqrt(0.75), 1e-15);
}

TEST(TailEnergy, NonincreasingAndFullSum) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> v(60);
    for (double& x : v) x = u(gen);
    std::sort(v.rbegin(), v.rend());
    double sq = 0.0;
    for (double x : v) sq += x * x;
    EXPECT_NEAR(tail_energy(v, 0) * tail_energy(v, 0), sq, 1e-12 * sq);
    for (std::ptrdiff_t k = 1; k <= 60; ++k) EXPECT_LE(tail_energy(v, k), tail_energy(v, k - 1));
    EXPECT_THROW(tail_energy(v, 61), Error);
    EXPECT_THROW(tail_energy(v, -1), Error);
}

TEST(SymmetricSqrt, Examples) {
    const Matrix id = symmetric_sqrt(spectral_decompose(CorrelationMatrix::identity(4)));
    EXPECT_LT(max_abs_diff(id, Matrix::identity(4)), 1e-15);

    EigenSystem diag;
    diag.values = {4.0, 1.0};
    diag.vectors = Matrix::identity(2);
    const Matrix d = symmetric_sqrt(diag);
    EXPECT_NEAR(d(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(d(1, 1), 1.0, 1e-15);
    EXPECT_EQ(d(0, 1), 0.0);

    const CorrelationMatrix eq = CorrelationMatrix::equicorrelation(4, 0.5);
    const Matrix m = symmetric_sqrt(spectral_decompose(eq));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += m(i, k) * m(k, j);
            EXPECT_NEAR(s, eq(i, j), 1e-10);
        }
}

TEST(SymmetricSqrt, SquaresBackOnRandomMatrices) {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<std::size_t> dim(1, 50);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = dim(gen);
        const CorrelationMatrix c = testing_util::random_correlation(p, 2 + trial % 60, gen);
        const Matrix m = symmetric_sqrt(spectral_decompose(c));
        Matrix sq(p, p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t k = 0; k < p; ++k) sq(i, j) += m(i, k) * m(k, j);
        ASSERT_LE(frobenius_distance(sq, c.matrix()), 1e-6 * p) << trial;
    }
}
