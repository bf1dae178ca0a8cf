#pragma once

// Simulation designs: data-generating processes for the covariates X, the
// sample correlation of a design, and test statistics Z ~ N(mu, Sigma).

#include "pfa/linalg.hpp"
#include "pfa/matrix.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace pfa {

class Rng;

enum class ScenarioKind {
    EqualCorrelation,
    FanSong,
    IndependentCauchy,
    ThreeFactor,
    TwoFactor,
    NonlinearFactor,
};

std::string_view to_string(ScenarioKind kind) noexcept;
/// Accepts the names produced by to_string; throws InvalidConfig otherwise.
ScenarioKind parse_scenario_kind(std::string_view name);

struct Scenario {
    ScenarioKind kind = ScenarioKind::EqualCorrelation;
    std::size_t p = 2000;
    std::size_t n = 100;
    std::size_t p1 = 10;
    double beta = 1.0;
    double sigma = 2.0;
    double rho = 0.5;  // EqualCorrelation only
    bool random_placement = false;

    /// Throws InvalidConfig on p1 > p, n < 2, sigma <= 0 and similar.
    void validate() const;
};

/// n x p design, one independent draw of X per row. Factor coefficients
/// are drawn fresh on every call.
Matrix generate_design(const Scenario& scenario, Rng& rng);

/// Number of trailing columns built from the first ten in the FanSong design.
std::size_t fan_song_dependent_columns(std::size_t p);

/// Standardised design: Sigma_hat = y^T y with y(a, k) = (x_ak - mean_k) / (sd_k sqrt(n-1)).
struct CorrelationFactor {
    Matrix y;                 // n x p
    std::vector<double> sds;  // sample SDs, denominator n-1
};

/// Throws ConstantColumn if a column has zero sample SD.
CorrelationFactor sample_correlation_factor(const Matrix& design);

/// Dense sample correlation matrix and the column SDs.
std::pair<CorrelationMatrix, std::vector<double>> sample_correlation(const Matrix& design);
CorrelationMatrix materialize(const CorrelationFactor& factor);

struct GeneratedInstance {
    std::vector<double> mu;
    std::vector<double> z;
    std::vector<std::size_t> true_nulls;   // ascending
    std::vector<std::size_t> false_nulls;  // ascending
};

/// False-null positions: the first p1 indices, or a uniformly random subset.
std::vector<std::size_t> place_false_nulls(const Scenario& scenario, Rng& rng);

/// mu_i = sqrt(n) beta sd_i / sigma on the false nulls, 0 elsewhere.
std::vector<double> mean_shifts(const Scenario& scenario, std::span<const double> sds,
                                std::span<const std::size_t> false_nulls);

/// Z = mu + M xi with M the symmetric square root of sigma.
GeneratedInstance make_test_statistics(const CorrelationMatrix& sigma, std::span<const double> sds,
                                       const Scenario& scenario, Rng& rng);
/// Z = mu + y^T xi with xi ~ N_n(0, I); same law as the dense route.
GeneratedInstance make_test_statistics(const CorrelationFactor& factor, const Scenario& scenario, Rng& rng);

struct DiscoveryCounts {
    std::size_t v = 0;  // false discoveries
    std::size_t s = 0;  // true discoveries
    std::size_t r = 0;  // total
};

/// Counts by two-sided P-value <= t.
DiscoveryCounts realized_counts(std::span<const double> z, std::span<const double> mu,
                                std::span<const std::size_t> true_nulls, double t);

/// V / R, and 0 when R = 0.
double realized_fdp(const DiscoveryCounts& c);

}  // namespace pfa
