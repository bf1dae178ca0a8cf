// Command line front end.
//
//   pfa simulate    --seed S [--config f.json] [--out dir] ...
//   pfa estimate    --sigma S.csv --z z.csv --t 0.01
//   pfa control     --sigma S.csv --p1 10 --alpha 0.1
//   pfa convergence --seed S [--config f.json] [--out dir]
//   pfa instance    --seed S --out dir [--scenario ...]
//
// Exit status: 0 success, 2 input error, 3 unreachable alpha, 4 numeric failure.

#include "pfa/error.hpp"
#include "pfa/harness.hpp"
#include "pfa/io.hpp"
#include "pfa/rng.hpp"
#include "pfa/simd.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnreachable = 3;
constexpr int kExitNumeric = 4;

struct ScenarioFlags {
    std::optional<std::string> kind;
    std::optional<std::size_t> p, n, p1;
    std::optional<double> beta, noise_sd, rho;
    bool random_placement = false;

    void add(CLI::App* app) {
        app->add_option("--scenario", kind, "equal_correlation, fan_song, independent_cauchy, three_factor, "
                                            "two_factor or nonlinear_factor");
        app->add_option("--p", p, "Number of hypotheses");
        app->add_option("--n", n, "Observations per design");
        app->add_option("--p1", p1, "Number of false nulls");
        app->add_option("--beta", beta, "Signal coefficient");
        app->add_option("--noise-sd", noise_sd, "Response noise standard deviation");
        app->add_option("--rho", rho, "Equal-correlation parameter");
        app->add_flag("--random-placement", random_placement, "Place false nulls at random indices");
    }

    void apply(pfa::Scenario& s) const {
        if (kind) s.kind = pfa::parse_scenario_kind(*kind);
        if (p) s.p = *p;
        if (n) s.n = *n;
        if (p1) s.p1 = *p1;
        if (beta) s.beta = *beta;
        if (noise_sd) s.sigma = *noise_sd;
        if (rho) s.rho = *rho;
        if (random_placement) s.random_placement = true;
    }
};

struct RunFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    std::optional<std::size_t> reps, mc;
    std::vector<double> t_grid;
    std::optional<double> epsilon, fraction, alpha;
    std::vector<std::size_t> p_grid;
    bool variance = false, control = false, no_estimate = false;
    ScenarioFlags scenario;

    pfa::ExperimentConfig build() const {
        pfa::ExperimentConfig c;
        if (!config_path.empty()) {
            pfa::Json j;
            try {
                j = pfa::Json::parse(pfa::read_text(config_path));
            } catch (const nlohmann::json::exception& e) {
                throw pfa::Error(pfa::ErrorCode::Parse, config_path + ": " + e.what());
            }
            c = pfa::ExperimentConfig::from_json(j);
        }
        scenario.apply(c.scenario);
        c.seed = seed;
        if (!out.empty()) c.output_path = out;
        if (c.output_path.empty()) c.output_path = ".";
        if (reps) c.n_reps = *reps;
        if (mc) c.n_mc = *mc;
        if (!t_grid.empty()) c.t_grid = t_grid;
        if (epsilon) c.epsilon = *epsilon;
        if (fraction) c.calibration_fraction = *fraction;
        if (alpha) c.alpha = *alpha;
        if (!p_grid.empty()) c.p_grid = p_grid;
        if (variance) c.compute_variance = true;
        if (control) c.compute_control = true;
        if (no_estimate) c.estimate_fdp = false;
        c.validate();
        return c;
    }
};

void add_run_flags(CLI::App* app, RunFlags& f, bool convergence) {
    app->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "Master seed")->required();
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--reps", f.reps, "Replications");
    app->add_option("--t", f.t_grid, "P-value thresholds");
    app->add_option("--epsilon", f.epsilon, "Tolerance for choosing the number of factors");
    f.scenario.add(app);
    if (convergence) {
        app->add_option("--p-grid", f.p_grid, "Dimensions to compare");
        return;
    }
    app->add_option("--mc", f.mc, "Monte Carlo draws per replication");
    app->add_option("--fraction", f.fraction, "Calibration fraction for the factor fit");
    app->add_option("--alpha", f.alpha, "Level for the BH and Storey procedures");
    app->add_flag("--variance", f.variance, "Monte Carlo variance of the false-discovery count");
    app->add_flag("--control", f.control, "Approximate FDR and the BH / Storey procedures");
    app->add_flag("--no-estimate", f.no_estimate, "Skip the factor fit and FDP estimates");
}

void emit(const pfa::Json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        pfa::write_text(out, text);
}

pfa::CorrelationMatrix load_sigma(const std::string& path) { return pfa::CorrelationMatrix(pfa::read_matrix_csv(path)); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Principal factor approximation for FDP and FDR under dependence"};
    app.set_version_flag("--version", pfa::version());
    app.require_subcommand(1);
    std::string simd_backend;
    app.add_option("--simd", simd_backend, "Kernel backend: scalar or avx2")->check(CLI::IsMember({"scalar", "avx2"}));

    RunFlags sim_flags;
    CLI::App* sim = app.add_subcommand("simulate", "Run replicated simulations, write records.csv and aggregates.json");
    add_run_flags(sim, sim_flags, false);

    RunFlags conv_flags;
    CLI::App* conv = app.add_subcommand("convergence", "Histograms of realized FDP and its limit across p");
    add_run_flags(conv, conv_flags, true);

    std::string sigma_path, z_path, out_path;
    double t = 0.0, alpha = 0.0, epsilon = 0.01, fraction = 0.75, tol = 1e-4;
    std::size_t p1 = 0, n_mc = 10000;
    std::uint64_t seed = 0;

    CLI::App* est = app.add_subcommand("estimate", "Estimate FDP(t) for observed statistics");
    est->add_option("--sigma", sigma_path, "Correlation matrix CSV")->required()->check(CLI::ExistingFile);
    est->add_option("--z", z_path, "Test statistics, one per line")->required()->check(CLI::ExistingFile);
    est->add_option("--t", t, "P-value threshold")->required();
    est->add_option("--epsilon", epsilon, "Tolerance for choosing the number of factors")->capture_default_str();
    est->add_option("--fraction", fraction, "Calibration fraction")->capture_default_str();
    est->add_option("--out", out_path, "Write the JSON report here instead of stdout");

    CLI::App* ctl = app.add_subcommand("control", "Threshold with approximate FDR equal to alpha (p1 known)");
    ctl->add_option("--sigma", sigma_path, "Correlation matrix CSV")->required()->check(CLI::ExistingFile);
    ctl->add_option("--p1", p1, "Number of false nulls")->required();
    ctl->add_option("--alpha", alpha, "Target FDR")->required();
    ctl->add_option("--epsilon", epsilon, "Tolerance for choosing the number of factors")->capture_default_str();
    ctl->add_option("--mc", n_mc, "Monte Carlo draws")->capture_default_str();
    ctl->add_option("--tol", tol, "Bisection tolerance on FDR")->capture_default_str();
    ctl->add_option("--seed", seed, "Seed for the Monte Carlo draws")->capture_default_str();
    ctl->add_option("--out", out_path, "Write the JSON report here instead of stdout");

    ScenarioFlags inst_scenario;
    std::string inst_out;
    CLI::App* inst = app.add_subcommand("instance", "Write one simulated instance (sigma.csv, z.csv, mu.csv)");
    inst->add_option("--seed", seed, "Seed")->required();
    inst->add_option("--out", inst_out, "Output directory")->required();
    inst_scenario.add(inst);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    if (simd_backend == "scalar") pfa::simd::select(pfa::simd::Backend::Scalar);
    if (simd_backend == "avx2" && !pfa::simd::select(pfa::simd::Backend::Avx2)) {
        std::cerr << "error: AVX2 kernels are not available on this machine\n";
        return kExitInput;
    }

    try {
        if (*sim) {
            const pfa::ExperimentConfig config = sim_flags.build();
            const pfa::ExperimentOutput out = pfa::run_simulation(config);
            pfa::write_output(out, config.output_path);
            std::cout << out.aggregates.at("per_threshold").dump(2) << "\n";
        } else if (*conv) {
            pfa::ExperimentConfig config = conv_flags.build();
            if (conv_flags.t_grid.empty() && conv_flags.config_path.empty()) config.t_grid = {0.01, 0.001};
            const auto cells = pfa::run_convergence(config);
            pfa::write_convergence(config, cells, config.output_path);
            for (const auto& c : cells)
                std::cout << "p=" << c.p << " t=" << c.t << " ks=" << c.ks << "\n";
        } else if (*est) {
            const pfa::CorrelationMatrix sigma = load_sigma(sigma_path);
            const std::vector<double> z = pfa::read_vector_csv(z_path);
            const pfa::EstimateResult r = pfa::estimate_pipeline(sigma, z, t, epsilon, fraction);
            pfa::Json j = pfa::to_json(r, epsilon, fraction);
            j["config"] = {{"sigma", sigma_path}, {"z", z_path}, {"t", t}, {"epsilon", epsilon}, {"fraction", fraction}};
            j["seed"] = nullptr;
            emit(j, out_path);
        } else if (*ctl) {
            const pfa::CorrelationMatrix sigma = load_sigma(sigma_path);
            const pfa::ControlOutcome c = pfa::control_pipeline(sigma, p1, alpha, epsilon, n_mc, tol, seed);
            pfa::Json j = pfa::to_json(c, epsilon);
            j["config"] = {{"sigma", sigma_path}, {"p1", p1},   {"alpha", alpha}, {"epsilon", epsilon},
                           {"mc", n_mc},          {"tol", tol}, {"seed", seed}};
            emit(j, out_path);
            if (c.result.status != pfa::ControlStatus::Solved) {
                std::cerr << "alpha " << alpha << " is not attainable on [1e-12, 0.5]; reported the boundary\n";
                return kExitUnreachable;
            }
        } else if (*inst) {
            pfa::Scenario sc;
            inst_scenario.apply(sc);
            sc.validate();
            pfa::Rng design_rng(seed, {pfa::stream::kDesign, 0});
            const pfa::CorrelationFactor factor = pfa::sample_correlation_factor(pfa::generate_design(sc, design_rng));
            pfa::Rng stat_rng(seed, {pfa::stream::kStatistics, 0});
            const pfa::GeneratedInstance g = pfa::make_test_statistics(factor, sc, stat_rng);
            std::filesystem::create_directories(inst_out);
            const std::filesystem::path dir(inst_out);
            pfa::write_matrix_csv(dir / "sigma.csv", pfa::materialize(factor).matrix());
            pfa::write_vector_csv(dir / "z.csv", g.z);
            pfa::write_vector_csv(dir / "mu.csv", g.mu);
            const pfa::Json meta{{"scenario", pfa::to_json(sc)}, {"seed", seed}, {"version", pfa::version()}};
            pfa::write_text(dir / "instance.json", meta.dump(2) + "\n");
        }
    } catch (const pfa::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pfa::is_input_error(e.code()) ? kExitInput : kExitNumeric;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
