#pragma once

// Experiment orchestration behind the command line tool: simulation runs,
// the estimation and control pipelines for user-supplied inputs, and the
// convergence study. Everything is deterministic for a given seed.

#include "pfa/factor.hpp"
#include "pfa/fdr.hpp"
#include "pfa/lad.hpp"
#include "pfa/linalg.hpp"
#include "pfa/simgen.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pfa {

using Json = nlohmann::json;

std::string version();

struct ExperimentConfig {
    Scenario scenario;
    std::vector<double> t_grid{0.001};
    std::size_t n_reps = 1;
    /// Monte Carlo draws per replication for the variance and control
    /// computations.
    std::size_t n_mc = 100;
    double epsilon = 0.01;
    double calibration_fraction = 0.75;
    std::uint64_t seed = 0;
    std::string output_path;

    bool estimate_fdp = true;      // LAD fit, PFA and Efron estimates
    bool compute_variance = false; // MC variance of the numerator over all p
    bool compute_control = false;  // approx FDR at t, BH and Storey procedures
    /// Level for the BH and Storey procedures; unset means each
    /// replication's approx FDR at t.
    std::optional<double> alpha;
    double efron_x0 = 1.0;
    double storey_lambda = 0.5;
    double lad_tol = 1e-8;
    std::size_t lad_max_iter = 500;

    /// Only used by the convergence study.
    std::vector<std::size_t> p_grid{100, 500, 1000};

    void validate() const;
    Json to_json() const;
    /// Missing fields keep their defaults; unknown fields are rejected.
    static ExperimentConfig from_json(const Json& j);
};

Json to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

struct ReplicationRecord {
    std::size_t rep = 0;
    double t = 0.0;
    std::size_t k = 0;
    std::size_t r = 0;
    std::size_t v = 0;
    std::size_t s = 0;
    double fdp_true = 0.0;
    double fdp_pfa = 0.0;
    double fdp_efron = 0.0;
    double fdp_storey = 0.0;     // Storey's estimate at t
    double dispersion = 0.0;     // Efron's A estimate
    bool lad_converged = true;
    std::size_t degenerate_rows = 0;
    double var_numerator = 0.0;  // MC variance of the numerator (if computed)
    double fdr_pfa = 0.0;        // approx FDR at t (if computed)
    double alpha_used = 0.0;
    std::size_t bh_r = 0;
    std::size_t bh_v = 0;
    double fdp_bh = 0.0;
    std::size_t storey_r = 0;
    std::size_t storey_v = 0;
    double fdp_storey_proc = 0.0;
};

/// (estimate - truth) / truth, or 0 when truth is 0.
double relative_error(double estimate, double truth);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;
};
Summary summarize(std::span<const double> x);

struct ExperimentOutput {
    ExperimentConfig config;
    std::vector<ReplicationRecord> records;  // rep-major, t-minor
    Json aggregates;
};

/// Per-threshold aggregates recomputed from records.
Json compute_aggregates(const ExperimentConfig& config, std::span<const ReplicationRecord> records);

/// All records of one replication (one per t in the grid).
std::vector<ReplicationRecord> run_replication(const ExperimentConfig& config, std::size_t rep);

ExperimentOutput run_simulation(const ExperimentConfig& config);

std::string records_to_csv(std::span<const ReplicationRecord> records);
std::vector<ReplicationRecord> records_from_csv(std::string_view text, std::string_view source);

/// Writes records.csv and aggregates.json into `dir` (created if needed).
void write_output(const ExperimentOutput& out, const std::filesystem::path& dir);
/// Reads an output directory back and checks the aggregates against a
/// recomputation from the records; throws Parse on mismatch.
ExperimentOutput load_output(const std::filesystem::path& dir);

struct EstimateResult {
    FdpReport report;
    std::size_t k = 0;
    std::size_t m = 0;
    std::vector<double> w_hat;
    FactorFit fit;
    std::vector<std::size_t> degenerate_rows;
};

/// Decompose, select k, build the model, fit W on the calibration set and
/// estimate FDP(t).
EstimateResult estimate_pipeline(const CorrelationMatrix& sigma, std::span<const double> z, double t,
                                 double epsilon, double fraction);
Json to_json(const EstimateResult& r, double epsilon, double fraction);

struct ControlOutcome {
    ControlResult result;
    std::size_t k = 0;
    std::vector<std::pair<double, double>> curve;  // (t, FDR(t)) on a log grid
};

ControlOutcome control_pipeline(const CorrelationMatrix& sigma, std::size_t p1, double alpha, double epsilon,
                                std::size_t n_mc, double tol, std::uint64_t seed);
Json to_json(const ControlOutcome& c, double epsilon);

std::string_view to_string(ControlStatus s) noexcept;

struct ConvergenceCell {
    std::size_t p = 0;
    double t = 0.0;
    std::vector<double> fdp;        // realized FDP per replication
    std::vector<double> fdp_limit;  // limiting FDP at the realized factors
    std::vector<std::size_t> hist_fdp;
    std::vector<std::size_t> hist_limit;
    double ks = 0.0;
};

inline constexpr std::size_t kHistogramBins = 50;

std::vector<std::size_t> histogram(std::span<const double> x, std::size_t bins);
/// sup_x |F_a(x) - F_b(x)| over the two empirical distributions.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// One cell per (p in p_grid, t in t_grid); replications share seeds
/// across t within the same p.
std::vector<ConvergenceCell> run_convergence(const ExperimentConfig& config);
void write_convergence(const ExperimentConfig& config, std::span<const ConvergenceCell> cells,
                       const std::filesystem::path& dir);

}  // namespace pfa
