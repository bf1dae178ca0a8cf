#pragma once

// Recovery of the realized factors W from observed statistics: calibration
// set selection, least absolute deviation regression, and the closed-form
// least-squares variant.

#include "pfa/factor.hpp"
#include "pfa/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pfa {

struct CalibrationSet {
    std::vector<std::size_t> indices;  // ascending |z|, ties by index
    double fraction = 0.0;
};

/// The m = round(fraction * p) indices with smallest |z_i|.
CalibrationSet select_calibration_set(std::span<const double> z, double fraction);

struct FactorFit {
    std::vector<double> w_hat;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// argmin_beta sum_i |y_i - x_i^T beta| for an m x k design x (m >= k >= 1).
/// Smoothed IRLS gives a starting point, which is snapped to a vertex of
/// the L1 problem and improved by basis exchange until the subgradient
/// certificate holds. converged is false if the certificate fails within
/// max_iter iterations; the best iterate is still returned.
/// Throws RankDeficient if x does not have full column rank.
FactorFit lad_regress(const Matrix& x, std::span<const double> y, double tol = 1e-8,
                      std::size_t max_iter = 500);

/// LAD fit of the model's loadings on the calibration subset of z.
FactorFit fit_factors(const FactorModel& model, std::span<const double> z, const CalibrationSet& cal,
                      double tol = 1e-8, std::size_t max_iter = 500);

double lad_objective(const Matrix& x, std::span<const double> y, std::span<const double> beta);

/// Coordinate-wise subgradient check:
/// |sum_i x_ih sign(r_i)| <= sum_{r_i = 0} |x_ih| + tol * sum_i |x_ih| for every h.
bool lad_certificate(const Matrix& x, std::span<const double> y, std::span<const double> beta, double tol);

/// Least squares on all p statistics. The loading columns are orthogonal
/// with squared norms lambda_h, so w_h = (gamma_h . z) / sqrt(lambda_h).
/// Throws ZeroEigenvalue if a retained lambda_h is 0.
std::vector<double> ls_regress(const FactorModel& model, std::span<const double> z);

/// ||mu||_2 * (sum_{h<=k} 1/lambda_h)^(1/2): bound on the shift of the
/// least-squares factor estimate caused by nonzero means.
double misspecification_bound(const FactorModel& model, std::span<const double> mu);

}  // namespace pfa
