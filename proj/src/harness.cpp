#include "pfa/harness.hpp"

#include "pfa/error.hpp"
#include "pfa/gauss.hpp"
#include "pfa/io.hpp"
#include "pfa/parallel.hpp"
#include "pfa/rng.hpp"
#include "pfa/simd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#ifndef PFA_VERSION
#define PFA_VERSION "unknown"
#endif

namespace pfa {

std::string version() { return PFA_VERSION; }

namespace {

constexpr const char* kRecordsFile = "records.csv";
constexpr const char* kAggregatesFile = "aggregates.json";

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

template <class T>
T get_field(const Json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        config_error(std::string("field '") + key + "': " + e.what());
    }
}

void reject_unknown(const Json& j, std::initializer_list<std::string_view> known, const char* where) {
    if (!j.is_object()) config_error(std::string(where) + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            config_error(std::string("unknown field '") + key + "' in " + where);
}

}  // namespace

Json to_json(const Scenario& s) {
    return Json{{"kind", std::string(to_string(s.kind))},
                {"p", s.p},
                {"n", s.n},
                {"p1", s.p1},
                {"beta", s.beta},
                {"sigma", s.sigma},
                {"rho", s.rho},
                {"random_placement", s.random_placement}};
}

Scenario scenario_from_json(const Json& j) {
    reject_unknown(j, {"kind", "p", "n", "p1", "beta", "sigma", "rho", "random_placement"}, "scenario");
    Scenario s;
    if (j.contains("kind")) s.kind = parse_scenario_kind(get_field<std::string>(j, "kind"));
    if (j.contains("p")) s.p = get_field<std::size_t>(j, "p");
    if (j.contains("n")) s.n = get_field<std::size_t>(j, "n");
    if (j.contains("p1")) s.p1 = get_field<std::size_t>(j, "p1");
    if (j.contains("beta")) s.beta = get_field<double>(j, "beta");
    if (j.contains("sigma")) s.sigma = get_field<double>(j, "sigma");
    if (j.contains("rho")) s.rho = get_field<double>(j, "rho");
    if (j.contains("random_placement")) s.random_placement = get_field<bool>(j, "random_placement");
    return s;
}

void ExperimentConfig::validate() const {
    scenario.validate();
    if (t_grid.empty()) config_error("t_grid is empty");
    for (double t : t_grid)
        if (!(t > 0.0 && t < 1.0)) config_error("t_grid entries must lie in (0,1)");
    if (n_reps < 1) config_error("n_reps must be at least 1");
    if (compute_variance && n_mc < 2) config_error("n_mc must be at least 2 for the variance");
    if (compute_control && n_mc < 1) config_error("n_mc must be at least 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) config_error("epsilon must lie in (0,1)");
    if (!(calibration_fraction > 0.0 && calibration_fraction <= 1.0))
        config_error("calibration_fraction must lie in (0,1]");
    if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) config_error("alpha must lie in (0,1)");
    if (!(efron_x0 > 0.0)) config_error("efron_x0 must be positive");
    if (!(storey_lambda > 0.0 && storey_lambda < 1.0)) config_error("storey_lambda must lie in (0,1)");
    if (p_grid.empty()) config_error("p_grid is empty");
}

Json ExperimentConfig::to_json() const {
    Json j{{"scenario", pfa::to_json(scenario)},
           {"t_grid", t_grid},
           {"n_reps", n_reps},
           {"n_mc", n_mc},
           {"epsilon", epsilon},
           {"calibration_fraction", calibration_fraction},
           {"seed", seed},
           {"output_path", output_path},
           {"estimate_fdp", estimate_fdp},
           {"compute_variance", compute_variance},
           {"compute_control", compute_control},
           {"alpha", nullptr},
           {"efron_x0", efron_x0},
           {"storey_lambda", storey_lambda},
           {"lad_tol", lad_tol},
           {"lad_max_iter", lad_max_iter},
           {"p_grid", p_grid}};
    if (alpha) j["alpha"] = *alpha;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
    reject_unknown(j,
                   {"scenario", "t_grid", "n_reps", "n_mc", "epsilon", "calibration_fraction", "seed",
                    "output_path", "estimate_fdp", "compute_variance", "compute_control", "alpha", "efron_x0",
                    "storey_lambda", "lad_tol", "lad_max_iter", "p_grid"},
                   "config");
    ExperimentConfig c;
    if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"));
    if (j.contains("t_grid")) c.t_grid = get_field<std::vector<double>>(j, "t_grid");
    if (j.contains("n_reps")) c.n_reps = get_field<std::size_t>(j, "n_reps");
    if (j.contains("n_mc")) c.n_mc = get_field<std::size_t>(j, "n_mc");
    if (j.contains("epsilon")) c.epsilon = get_field<double>(j, "epsilon");
    if (j.contains("calibration_fraction")) c.calibration_fraction = get_field<double>(j, "calibration_fraction");
    if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed");
    if (j.contains("output_path")) c.output_path = get_field<std::string>(j, "output_path");
    if (j.contains("estimate_fdp")) c.estimate_fdp = get_field<bool>(j, "estimate_fdp");
    if (j.contains("compute_variance")) c.compute_variance = get_field<bool>(j, "compute_variance");
    if (j.contains("compute_control")) c.compute_control = get_field<bool>(j, "compute_control");
    if (j.contains("alpha") && !j.at("alpha").is_null()) c.alpha = get_field<double>(j, "alpha");
    if (j.contains("efron_x0")) c.efron_x0 = get_field<double>(j, "efron_x0");
    if (j.contains("storey_lambda")) c.storey_lambda = get_field<double>(j, "storey_lambda");
    if (j.contains("lad_tol")) c.lad_tol = get_field<double>(j, "lad_tol");
    if (j.contains("lad_max_iter")) c.lad_max_iter = get_field<std::size_t>(j, "lad_max_iter");
    if (j.contains("p_grid")) c.p_grid = get_field<std::vector<std::size_t>>(j, "p_grid");
    return c;
}

double relative_error(double estimate, double truth) { return truth != 0.0 ? (estimate - truth) / truth : 0.0; }

Summary summarize(std::span<const double> x) {
    Summary s;
    if (x.empty()) return s;
    for (double v : x) s.mean += v;
    s.mean /= static_cast<double>(x.size());
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    }
    return s;
}

namespace {

Json summary_json(std::span<const double> x) {
    const Summary s = summarize(x);
    return Json{{"mean", s.mean}, {"sd", s.sd}};
}

// Counts of rejections and false rejections for a rejection set.
std::pair<std::size_t, std::size_t> tally(const RejectionSet& rs, const std::vector<char>& is_null) {
    std::size_t v = 0;
    for (std::size_t i : rs.indices) v += is_null[i] ? 1 : 0;
    return {rs.indices.size(), v};
}

double ratio(std::size_t v, std::size_t r) { return r == 0 ? 0.0 : static_cast<double>(v) / static_cast<double>(r); }

}  // namespace

std::vector<ReplicationRecord> run_replication(const ExperimentConfig& config, std::size_t rep) {
    const Scenario& sc = config.scenario;
    Rng design_rng(config.seed, {stream::kDesign, rep});
    const Matrix x = generate_design(sc, design_rng);
    const CorrelationFactor factor = sample_correlation_factor(x);
    const EigenSystem es = spectral_decompose_factored(factor.y);
    const std::size_t k = select_num_factors(es.values, config.epsilon);
    const FactorModel model = build_factor_model(es, k);

    Rng stat_rng(config.seed, {stream::kStatistics, rep});
    const GeneratedInstance g = make_test_statistics(factor, sc, stat_rng);
    std::vector<double> pv(sc.p);
    for (std::size_t i = 0; i < sc.p; ++i) pv[i] = two_sided_pvalue(g.z[i]);
    std::vector<char> is_null(sc.p, 0);
    for (std::size_t i : g.true_nulls) is_null[i] = 1;
    const std::size_t p0 = g.true_nulls.size();

    FactorFit fit;
    double dispersion = 0.0;
    if (config.estimate_fdp) {
        const CalibrationSet cal = select_calibration_set(g.z, config.calibration_fraction);
        if (cal.indices.size() < model.k)
            throw Error(ErrorCode::DimensionMismatch, "calibration set smaller than the factor count");
        fit = fit_factors(model, g.z, cal, config.lad_tol, config.lad_max_iter);
        dispersion = efron_dispersion(g.z, config.efron_x0);
    }

    const std::vector<std::size_t> everyone = all_indices(sc.p);
    const std::uint64_t var_seed = Rng(config.seed, {stream::kVariance, rep}).bits();
    const std::uint64_t control_seed = Rng(config.seed, {stream::kControl, rep}).bits();
    std::optional<FdrCurve> curve;
    if (config.compute_control) curve.emplace(model, sc.p1, config.n_mc, control_seed);

    std::vector<ReplicationRecord> out;
    out.reserve(config.t_grid.size());
    for (double t : config.t_grid) {
        ReplicationRecord rec;
        rec.rep = rep;
        rec.t = t;
        rec.k = k;
        rec.degenerate_rows = model.degenerate_rows.size();
        const DiscoveryCounts c = realized_counts(g.z, g.mu, g.true_nulls, t);
        rec.r = c.r;
        rec.v = c.v;
        rec.s = c.s;
        rec.fdp_true = realized_fdp(c);
        if (config.estimate_fdp) {
            rec.fdp_pfa = estimate_fdp(t, g.z, model, fit.w_hat).fdp_hat;
            rec.fdp_efron = efron_estimate_given(g.z, t, p0, dispersion);
            rec.dispersion = dispersion;
            rec.lad_converged = fit.converged;
        }
        rec.fdp_storey = storey_estimate(pv, t, config.storey_lambda);
        if (config.compute_variance) rec.var_numerator = variance_of_false_count(t, model, everyone, config.n_mc, var_seed);
        if (curve) {
            rec.fdr_pfa = (*curve)(t);
            rec.alpha_used = config.alpha.value_or(rec.fdr_pfa);
            if (rec.alpha_used > 0.0 && rec.alpha_used < 1.0) {
                std::tie(rec.bh_r, rec.bh_v) = tally(bh_procedure(pv, rec.alpha_used), is_null);
                std::tie(rec.storey_r, rec.storey_v) =
                    tally(storey_procedure(pv, rec.alpha_used, config.storey_lambda), is_null);
                rec.fdp_bh = ratio(rec.bh_v, rec.bh_r);
                rec.fdp_storey_proc = ratio(rec.storey_v, rec.storey_r);
            }
        }
        out.push_back(rec);
    }
    return out;
}

Json compute_aggregates(const ExperimentConfig& config, std::span<const ReplicationRecord> records) {
    Json per_t = Json::array();
    for (double t : config.t_grid) {
        std::vector<double> k, r, v, fdp, pfa, efron, storey, re_p, re_e, conv, var17, fdr, alpha, bh, st;
        for (const auto& rec : records) {
            if (rec.t != t) continue;
            k.push_back(static_cast<double>(rec.k));
            r.push_back(static_cast<double>(rec.r));
            v.push_back(static_cast<double>(rec.v));
            fdp.push_back(rec.fdp_true);
            pfa.push_back(rec.fdp_pfa);
            efron.push_back(rec.fdp_efron);
            storey.push_back(rec.fdp_storey);
            re_p.push_back(relative_error(rec.fdp_pfa, rec.fdp_true));
            re_e.push_back(relative_error(rec.fdp_efron, rec.fdp_true));
            conv.push_back(rec.lad_converged ? 1.0 : 0.0);
            var17.push_back(rec.var_numerator);
            fdr.push_back(rec.fdr_pfa);
            alpha.push_back(rec.alpha_used);
            bh.push_back(rec.fdp_bh);
            st.push_back(rec.fdp_storey_proc);
        }
        const Summary vs = summarize(v);
        Json a{{"t", t},
               {"replications", fdp.size()},
               {"k_mean", summarize(k).mean},
               {"R", summary_json(r)},
               {"V", summary_json(v)},
               {"var_V", vs.sd * vs.sd},
               {"fdp_true", summary_json(fdp)},
               {"fdp_storey_estimate", summary_json(storey)}};
        if (config.estimate_fdp) {
            a["fdp_pfa"] = summary_json(pfa);
            a["fdp_efron"] = summary_json(efron);
            a["re_pfa"] = summary_json(re_p);
            a["re_efron"] = summary_json(re_e);
            a["lad_converged_fraction"] = summarize(conv).mean;
        }
        if (config.compute_variance) a["var_numerator_mean"] = summarize(var17).mean;
        if (config.compute_control) {
            a["fdr_pfa_mean"] = summarize(fdr).mean;
            a["alpha_used_mean"] = summarize(alpha).mean;
            a["fdr_bh"] = summarize(bh).mean;
            a["fdr_storey"] = summarize(st).mean;
        }
        per_t.push_back(std::move(a));
    }
    return Json{{"version", version()}, {"seed", config.seed}, {"config", config.to_json()}, {"per_threshold", per_t}};
}

ExperimentOutput run_simulation(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::vector<ReplicationRecord>> per_rep(config.n_reps);
    parallel_for(config.n_reps, [&](std::size_t rep) { per_rep[rep] = run_replication(config, rep); });
    ExperimentOutput out;
    out.config = config;
    for (auto& recs : per_rep)
        for (auto& r : recs) out.records.push_back(r);
    out.aggregates = compute_aggregates(config, out.records);
    return out;
}

namespace {

constexpr std::array<std::string_view, 22> kColumns{
    "rep",        "t",          "k",          "R",          "V",          "S",
    "fdp_true",   "fdp_pfa",    "fdp_efron",  "fdp_storey", "dispersion", "lad_converged",
    "degenerate_rows", "var_numerator", "fdr_pfa", "alpha_used", "bh_R",  "bh_V",
    "fdp_bh",     "storey_R",   "storey_V",   "fdp_storey_proc"};

std::size_t parse_count(std::string_view f, const std::string& ctx) {
    std::size_t v = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw Error(ErrorCode::Parse, ctx + ": not a count: '" + std::string(f) + "'");
    return v;
}

}  // namespace

std::string records_to_csv(std::span<const ReplicationRecord> records) {
    std::string out;
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        if (c) out += ',';
        out += kColumns[c];
    }
    out += '\n';
    auto num = [&](double v) { out += format_double(v); out += ','; };
    auto cnt = [&](std::size_t v) { out += std::to_string(v); out += ','; };
    for (const auto& r : records) {
        cnt(r.rep);
        num(r.t);
        cnt(r.k);
        cnt(r.r);
        cnt(r.v);
        cnt(r.s);
        num(r.fdp_true);
        num(r.fdp_pfa);
        num(r.fdp_efron);
        num(r.fdp_storey);
        num(r.dispersion);
        cnt(r.lad_converged ? 1 : 0);
        cnt(r.degenerate_rows);
        num(r.var_numerator);
        num(r.fdr_pfa);
        num(r.alpha_used);
        cnt(r.bh_r);
        cnt(r.bh_v);
        num(r.fdp_bh);
        cnt(r.storey_r);
        cnt(r.storey_v);
        num(r.fdp_storey_proc);
        out.back() = '\n';
    }
    return out;
}

std::vector<ReplicationRecord> records_from_csv(std::string_view text, std::string_view source) {
    std::vector<ReplicationRecord> out;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        while (true) {
            const std::size_t comma = line.find(',');
            f.push_back(line.substr(0, comma));
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        const std::string ctx = std::string(source) + ":" + std::to_string(lineno);
        if (f.size() != kColumns.size())
            throw Error(ErrorCode::Parse, ctx + ": expected " + std::to_string(kColumns.size()) + " fields");
        if (lineno == 1) {
            for (std::size_t c = 0; c < f.size(); ++c)
                if (f[c] != kColumns[c]) throw Error(ErrorCode::Parse, ctx + ": unexpected header");
            continue;
        }
        ReplicationRecord r;
        std::size_t c = 0;
        auto num = [&] { return parse_double(f[c++], ctx); };
        auto cnt = [&] { return parse_count(f[c++], ctx); };
        r.rep = cnt();
        r.t = num();
        r.k = cnt();
        r.r = cnt();
        r.v = cnt();
        r.s = cnt();
        r.fdp_true = num();
        r.fdp_pfa = num();
        r.fdp_efron = num();
        r.fdp_storey = num();
        r.dispersion = num();
        r.lad_converged = cnt() != 0;
        r.degenerate_rows = cnt();
        r.var_numerator = num();
        r.fdr_pfa = num();
        r.alpha_used = num();
        r.bh_r = cnt();
        r.bh_v = cnt();
        r.fdp_bh = num();
        r.storey_r = cnt();
        r.storey_v = cnt();
        r.fdp_storey_proc = num();
        out.push_back(r);
    }
    return out;
}

void write_output(const ExperimentOutput& out, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / kRecordsFile, records_to_csv(out.records));
    write_text(dir / kAggregatesFile, out.aggregates.dump(2) + "\n");
}

namespace {

bool json_close(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>();
        const double y = b.get<double>();
        return std::fabs(x - y) <= 1e-12 * std::max({1.0, std::fabs(x), std::fabs(y)});
    }
    if (a.type() != b.type()) return false;
    if (a.is_object()) {
        if (a.size() != b.size()) return false;
        for (const auto& [key, val] : a.items())
            if (!b.contains(key) || !json_close(val, b.at(key))) return false;
        return true;
    }
    if (a.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!json_close(a[i], b[i])) return false;
        return true;
    }
    return a == b;
}

}  // namespace

ExperimentOutput load_output(const std::filesystem::path& dir) {
    ExperimentOutput out;
    const std::filesystem::path agg_path = dir / kAggregatesFile;
    try {
        out.aggregates = Json::parse(read_text(agg_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, agg_path.string() + ": " + e.what());
    }
    if (!out.aggregates.contains("config")) throw Error(ErrorCode::Parse, agg_path.string() + ": missing config");
    out.config = ExperimentConfig::from_json(out.aggregates.at("config"));
    const std::filesystem::path rec_path = dir / kRecordsFile;
    out.records = records_from_csv(read_text(rec_path), rec_path.string());
    const Json recomputed = compute_aggregates(out.config, out.records);
    if (!json_close(recomputed.at("per_threshold"), out.aggregates.at("per_threshold")))
        throw Error(ErrorCode::Parse, agg_path.string() + ": aggregates do not match " + rec_path.string());
    return out;
}

EstimateResult estimate_pipeline(const CorrelationMatrix& sigma, std::span<const double> z, double t,
                                 double epsilon, double fraction) {
    if (z.size() != sigma.dim())
        throw Error(ErrorCode::DimensionMismatch, "z has " + std::to_string(z.size()) +
                                                      " entries but Sigma is " + std::to_string(sigma.dim()) +
                                                      " x " + std::to_string(sigma.dim()));
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::DomainError, "t must lie in (0,1)");
    const EigenSystem es = spectral_decompose(sigma);
    EstimateResult r;
    r.k = select_num_factors(es.values, epsilon);
    const FactorModel model = build_factor_model(es, r.k);
    r.degenerate_rows = model.degenerate_rows;
    const CalibrationSet cal = select_calibration_set(z, fraction);
    r.m = cal.indices.size();
    if (r.m < r.k)
        throw Error(ErrorCode::DimensionMismatch, "calibration set (m=" + std::to_string(r.m) +
                                                      ") is smaller than the factor count k=" +
                                                      std::to_string(r.k) + "; raise the fraction or epsilon");
    r.fit = fit_factors(model, z, cal);
    r.w_hat = r.fit.w_hat;
    r.report = estimate_fdp(t, z, model, r.w_hat);
    return r;
}

Json to_json(const EstimateResult& r, double epsilon, double fraction) {
    return Json{{"t", r.report.t},
                {"R", r.report.rejections},
                {"numerator", r.report.numerator},
                {"v_hat", r.report.v_hat},
                {"fdp_hat", r.report.fdp_hat},
                {"k", r.k},
                {"m", r.m},
                {"epsilon", epsilon},
                {"calibration_fraction", fraction},
                {"w_hat", r.w_hat},
                {"degenerate_rows", r.degenerate_rows},
                {"lad", {{"objective", r.fit.objective}, {"iterations", r.fit.iterations}, {"converged", r.fit.converged}}},
                {"version", version()}};
}

std::string_view to_string(ControlStatus s) noexcept {
    switch (s) {
        case ControlStatus::Solved: return "solved";
        case ControlStatus::BelowRange: return "unreachable_below";
        case ControlStatus::AboveRange: return "unreachable_above";
    }
    return "unknown";
}

ControlOutcome control_pipeline(const CorrelationMatrix& sigma, std::size_t p1, double alpha, double epsilon,
                                std::size_t n_mc, double tol, std::uint64_t seed) {
    const EigenSystem es = spectral_decompose(sigma);
    ControlOutcome out;
    out.k = select_num_factors(es.values, epsilon);
    const FactorModel model = build_factor_model(es, out.k);
    const FdrCurve curve(model, p1, n_mc, seed);
    out.result = solve_threshold(alpha, curve, tol);
    constexpr int kGrid = 50;
    const double lo = std::log(1e-8);
    const double hi = std::log(kThresholdHigh);
    for (int g = 0; g < kGrid; ++g) {
        const double t = std::exp(lo + (hi - lo) * g / (kGrid - 1));
        out.curve.emplace_back(t, curve(t));
    }
    return out;
}

Json to_json(const ControlOutcome& c, double epsilon) {
    Json curve = Json::array();
    for (const auto& [t, f] : c.curve) curve.push_back(Json{{"t", t}, {"fdr", f}});
    return Json{{"alpha", c.result.alpha},
                {"t_star", c.result.t_star},
                {"fdr_at_t", c.result.fdr_at_t},
                {"status", std::string(to_string(c.result.status))},
                {"mc_draws", c.result.mc_draws},
                {"seed", c.result.seed},
                {"iterations", c.result.iterations},
                {"k", c.k},
                {"epsilon", epsilon},
                {"curve", curve},
                {"version", version()}};
}

std::vector<std::size_t> histogram(std::span<const double> x, std::size_t bins) {
    std::vector<std::size_t> h(bins, 0);
    for (double v : x) {
        const double c = std::clamp(v, 0.0, 1.0);
        const auto b = std::min(bins - 1, static_cast<std::size_t>(c * static_cast<double>(bins)));
        ++h[b];
    }
    return h;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return 0.0;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

std::vector<ConvergenceCell> run_convergence(const ExperimentConfig& config) {
    config.validate();
    std::vector<ConvergenceCell> cells;
    for (std::size_t p : config.p_grid) {
        Scenario sc = config.scenario;
        sc.p = p;
        sc.validate();
        const std::size_t nt = config.t_grid.size();
        // per replication: nt (fdp, limit) pairs
        std::vector<std::vector<std::pair<double, double>>> per_rep(config.n_reps);
        parallel_for(config.n_reps, [&](std::size_t rep) {
            Rng design_rng(config.seed, {stream::kDesign, rep, p});
            const Matrix x = generate_design(sc, design_rng);
            const CorrelationFactor factor = sample_correlation_factor(x);
            const EigenSystem es = spectral_decompose_factored(factor.y);
            const FactorModel model = build_factor_model(es, select_num_factors(es.values, config.epsilon));
            Rng stat_rng(config.seed, {stream::kStatistics, rep, p});
            const GeneratedInstance g = make_test_statistics(factor, sc, stat_rng);
            // realized factors: projections of the noise on the retained eigenvectors
            std::vector<double> noise(p);
            for (std::size_t i = 0; i < p; ++i) noise[i] = g.z[i] - g.mu[i];
            std::vector<double> w(model.k, 0.0);
            for (std::size_t h = 0; h < model.k; ++h)
                if (model.eigenvalues[h] > 0.0)
                    w[h] = simd::dot(model.loadings_t.row(h), noise) / model.eigenvalues[h];
            const FactorRealization real = realize(model, w);
            auto& out = per_rep[rep];
            for (double t : config.t_grid) {
                const DiscoveryCounts c = realized_counts(g.z, g.mu, g.true_nulls, t);
                out.emplace_back(realized_fdp(c), fdp_limit(t, model, g.mu, g.true_nulls, real));
            }
        });
        for (std::size_t ti = 0; ti < nt; ++ti) {
            ConvergenceCell cell;
            cell.p = p;
            cell.t = config.t_grid[ti];
            for (const auto& rep : per_rep) {
                cell.fdp.push_back(rep[ti].first);
                cell.fdp_limit.push_back(rep[ti].second);
            }
            cell.hist_fdp = histogram(cell.fdp, kHistogramBins);
            cell.hist_limit = histogram(cell.fdp_limit, kHistogramBins);
            cell.ks = ks_distance(cell.fdp, cell.fdp_limit);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

void write_convergence(const ExperimentConfig& config, std::span<const ConvergenceCell> cells,
                       const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
    std::string csv = "p,t,bin_lo,bin_hi,count_fdp,count_limit\n";
    Json summary = Json::array();
    for (const auto& c : cells) {
        for (std::size_t b = 0; b < kHistogramBins; ++b) {
            csv += std::to_string(c.p) + ',' + format_double(c.t) + ',' +
                   format_double(static_cast<double>(b) / kHistogramBins) + ',' +
                   format_double(static_cast<double>(b + 1) / kHistogramBins) + ',' +
                   std::to_string(c.hist_fdp[b]) + ',' + std::to_string(c.hist_limit[b]) + '\n';
        }
        summary.push_back(Json{{"p", c.p},
                               {"t", c.t},
                               {"ks", c.ks},
                               {"fdp", summary_json(c.fdp)},
                               {"fdp_limit", summary_json(c.fdp_limit)}});
    }
    write_text(dir / "convergence.csv", csv);
    const Json j{{"version", version()}, {"seed", config.seed}, {"config", config.to_json()}, {"cells", summary}};
    write_text(dir / "convergence.json", j.dump(2) + "\n");
}

}  // namespace pfa
