#pragma once

// Principal factor approximation: factor-count selection, the factor model
// Z_i = mu_i + sum_h b_ih W_h + K_i, and the FDP formulas built on it.

#include "pfa/linalg.hpp"
#include "pfa/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pfa {

class Rng;

/// Residual variances below this are treated as zero and the row's scale
/// is capped at kDegenerateScale.
inline constexpr double kDegenerateResidual = 1e-12;
inline constexpr double kDegenerateScale = 1e6;

struct FactorModel {
    std::size_t p = 0;
    std::size_t k = 0;
    /// k x p, row h = sqrt(lambda_h) gamma_h. Stored transposed so that
    /// eta = sum_h w_h row_h is a sequence of axpy calls.
    Matrix loadings_t;
    /// a_i = (1 - sum_h b_ih^2)^(-1/2), capped for degenerate rows.
    std::vector<double> a;
    std::vector<double> eigenvalues;
    /// Rows whose residual variance fell below kDegenerateResidual.
    std::vector<std::size_t> degenerate_rows;

    double loading(std::size_t i, std::size_t h) const noexcept { return loadings_t(h, i); }
    /// p x k loading matrix.
    Matrix loadings() const { return loadings_t.transposed(); }
};

struct FactorRealization {
    std::vector<double> w;
    std::vector<double> eta;
};

/// Smallest k in [0, p] with tail_energy(values, k) < epsilon * sum(values).
std::size_t select_num_factors(std::span<const double> values, double epsilon);

FactorModel build_factor_model(const EigenSystem& system, std::size_t k);

/// Model with arbitrary (not necessarily orthogonal) loadings, k x p.
/// `eigenvalues` is filled with the squared row norms.
FactorModel factor_model_from_loadings(Matrix loadings_t);

/// eta = loadings * w.
FactorRealization realize(const FactorModel& model, std::span<const double> w);
void compute_eta(const FactorModel& model, std::span<const double> w, std::span<double> eta);
/// W ~ N_k(0, I) drawn from rng, with its eta.
FactorRealization draw_realization(const FactorModel& model, Rng& rng);

/// sum over the subset of Phi(a_i(z_{t/2} + eta_i)) + Phi(a_i(z_{t/2} - eta_i)).
double fdp_numerator(double t, const FactorModel& model, const FactorRealization& real,
                     std::span<const std::size_t> subset);
/// Same sum over all p indices.
double fdp_numerator(double t, const FactorModel& model, std::span<const double> eta);

/// Limiting FDP given the realized factors: true-null sum over the sum of all
/// indices with the mean shifts mu_i added to eta_i.
double fdp_limit(double t, const FactorModel& model, std::span<const double> mu,
                 std::span<const std::size_t> true_nulls, const FactorRealization& real);

struct FdpReport {
    double t = 0.0;
    std::size_t rejections = 0;  // R(t)
    double numerator = 0.0;      // uncapped false-discovery surrogate
    double v_hat = 0.0;          // min(numerator, R)
    double fdp_hat = 0.0;
};

/// #{i : 2 Phi(-|z_i|) <= t}
std::size_t count_rejections(std::span<const double> z, double t);

FdpReport estimate_fdp(double t, std::span<const double> z, const FactorModel& model,
                       std::span<const double> w_hat);

/// Unbiased sample variance of the subset numerator over n_mc independent
/// W ~ N_k(0, I). Draw d uses the substream (seed, d).
double variance_of_false_count(double t, const FactorModel& model, std::span<const std::size_t> subset,
                               std::size_t n_mc, std::uint64_t seed);

std::vector<std::size_t> all_indices(std::size_t p);

}  // namespace pfa
