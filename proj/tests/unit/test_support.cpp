#include "pfa/error.hpp"
#include "pfa/io.hpp"
#include "pfa/parallel.hpp"
#include "pfa/rng.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>

using namespace pfa;

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Rng a(1, {2, 3}), b(1, {2, 3}), c(1, {2, 4}), d(1, {2}), e(2, {2, 3});
    const auto x = a.bits();
    EXPECT_EQ(x, b.bits());
    EXPECT_NE(x, c.bits());
    EXPECT_NE(x, d.bits());
    EXPECT_NE(x, e.bits());
}

TEST(Rng, UniformOpenInterval) {
    Rng r(3);
    double lo = 1.0, hi = 0.0, mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u / 100000;
    }
    EXPECT_NEAR(mean, 0.5, 0.005);
}

TEST(Rng, NormalMoments) {
    Rng r(4);
    double m = 0.0, s = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = r.normal();
        m += v;
        s += v * v;
    }
    EXPECT_NEAR(m / n, 0.0, 0.01);
    EXPECT_NEAR(s / n, 1.0, 0.01);
}

TEST(Parallel, CoversEveryIndexOnce) {
    setenv("PFA_THREADS", "4", 1);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(1000, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    unsetenv("PFA_THREADS");
}

TEST(Parallel, NestedCallsRunSerially) {
    setenv("PFA_THREADS", "3", 1);
    std::vector<std::size_t> sums(20, 0);
    parallel_for(20, [&](std::size_t i) { parallel_for(10, [&](std::size_t j) { sums[i] += j; }); });
    for (auto s : sums) EXPECT_EQ(s, 45u);
    unsetenv("PFA_THREADS");
}

TEST(Parallel, LowestIndexExceptionWins) {
    setenv("PFA_THREADS", "4", 1);
    try {
        parallel_for(100, [](std::size_t i) {
            if (i % 10 == 7) throw std::runtime_error(std::to_string(i));
        });
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "7");
    }
    unsetenv("PFA_THREADS");
}

TEST(Parallel, ThreadCountFromEnvironment) {
    setenv("PFA_THREADS", "5", 1);
    EXPECT_EQ(thread_count(), 5u);
    setenv("PFA_THREADS", "zero", 1);
    EXPECT_GE(thread_count(), 1u);
    unsetenv("PFA_THREADS");
}

TEST(Io, DoubleRoundTrip) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 10000; ++i) {
        const double v = u(gen) * std::pow(10.0, static_cast<int>(gen() % 40) - 20);
        ASSERT_EQ(parse_double(format_double(v), "x"), v);
    }
    EXPECT_EQ(parse_double(" +1.5 ", "x"), 1.5);
    EXPECT_EQ(parse_double("1e-320", "x"), 1e-320);
}

TEST(Io, ParseErrorsCarryLocation) {
    try {
        parse_matrix_csv("1,0\n0,abc\n", "sigma.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
        EXPECT_NE(std::string(e.what()).find("sigma.csv:2"), std::string::npos) << e.what();
    }
    try {
        parse_matrix_csv("1,0\n\n0\n", "s.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("s.csv:3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_vector_csv("1\n2,3\n", "z.csv"), Error);
    EXPECT_THROW(parse_vector_csv("\n\n", "z.csv"), Error);
    EXPECT_THROW(parse_double("1.0x", "c"), Error);
    EXPECT_THROW(parse_double("", "c"), Error);
}

TEST(Io, MatrixAndVectorFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "pfa_io_test";
    std::filesystem::create_directories(dir);
    Matrix m(3, 2);
    m(0, 0) = 0.1;
    m(1, 1) = -1.0 / 3.0;
    m(2, 0) = 1e-300;
    write_matrix_csv(dir / "m.csv", m);
    EXPECT_TRUE(read_matrix_csv(dir / "m.csv") == m);
    const std::vector<double> v{1.0 / 7.0, -2.5, 0.0};
    write_vector_csv(dir / "v.csv", v);
    EXPECT_EQ(read_vector_csv(dir / "v.csv"), v);
    try {
        read_text(dir / "missing.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
        EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST(Errors, InputVersusNumeric) {
    EXPECT_TRUE(is_input_error(ErrorCode::Parse));
    EXPECT_TRUE(is_input_error(ErrorCode::DimensionMismatch));
    EXPECT_TRUE(is_input_error(ErrorCode::NotSymmetric));
    EXPECT_FALSE(is_input_error(ErrorCode::RankDeficient));
    EXPECT_FALSE(is_input_error(ErrorCode::NotConverged));
    EXPECT_FALSE(is_input_error(ErrorCode::ZeroEigenvalue));
}
