#pragma once

#include "oracles.hpp"
#include "pfa/linalg.hpp"
#include "pfa/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testing_util {

inline pfa::Matrix from_dense(const oracle::Dense& d) {
    pfa::Matrix m(d.size(), d.empty() ? 0 : d[0].size());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = d[r][c];
    return m;
}

inline oracle::Dense to_dense(const pfa::Matrix& m) {
    oracle::Dense d(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) d[r][c] = m(r, c);
    return d;
}

// Random correlation matrix: normalised Gram matrix of a random n x p design.
inline pfa::CorrelationMatrix random_correlation(std::size_t p, std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    oracle::Dense rows(n, std::vector<double>(p));
    for (auto& r : rows)
        for (auto& v : r) v = nd(gen);
    oracle::Dense c = oracle::correlation(rows);
    for (std::size_t i = 0; i < p; ++i) {
        c[i][i] = 1.0;
        for (std::size_t j = 0; j < i; ++j) c[i][j] = c[j][i];
    }
    return pfa::CorrelationMatrix(from_dense(c));
}

inline double max_abs_diff(const pfa::Matrix& a, const pfa::Matrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) d = std::max(d, std::fabs(a.data()[i] - b.data()[i]));
    return d;
}

inline std::vector<double> normals(std::size_t n, std::mt19937_64& gen, double sd = 1.0) {
    std::normal_distribution<double> nd(0.0, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = nd(gen);
    return v;
}

}  // namespace testing_util
