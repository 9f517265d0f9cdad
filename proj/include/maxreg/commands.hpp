#pragma once

// Subcommands of the command-line tool and report emission (JSON and CSV).
// Exit codes: 0 success, 2 configuration error, 3 numerical failure or
// Dini violation.

#include "maxreg/config.hpp"
#include "maxreg/errors.hpp"
#include "maxreg/example_pde.hpp"
#include "maxreg/form_family.hpp"
#include "maxreg/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace maxreg {

using Json = nlohmann::json;

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3 };

namespace detail {

/// JSON has no NaN or infinity; they become null.
inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline std::string csv_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

} // namespace detail

inline Json to_json(const DiniResult& d) {
    return {{"cond_main", d.cond_main},
            {"integral_value", detail::number(d.main_value)},
            {"cond_p", d.cond_p},
            {"p_dini_value", detail::number(d.p_value)}};
}

inline Json to_json(const RegularityReport& r) {
    Json trace = Json::array();
    for (const auto& row : r.refinement_trace) {
        trace.push_back({{"N", row.N},
                         {"C_est", detail::number(row.C_est)},
                         {"u_Lp", row.u_Lp},
                         {"uprime_Lp", row.uprime_Lp},
                         {"Au_Lp", row.Au_Lp},
                         {"f_Lp", row.f_Lp},
                         {"neumann_iters", row.neumann_iters},
                         {"q_norm_est", detail::number(row.q_norm_est)},
                         {"ode_residual", detail::number(row.ode_residual)},
                         {"exact_error", detail::number(row.exact_error)}});
    }
    Json dini = to_json(r.dini);
    dini["admissible"] = r.admissible;
    return {{"example", r.example},
            {"n", r.n},
            {"p", r.p},
            {"alpha", r.alpha},
            {"beta", r.beta},
            {"gamma", r.gamma},
            {"norms", {{"u_Lp", r.u_Lp}, {"uprime_Lp", r.uprime_Lp}, {"Au_Lp", r.Au_Lp}}},
            {"rhs", {{"f_Lp", r.f_Lp}, {"u0_interp", r.u0_interp}}},
            {"C_est", detail::number(r.C_est)},
            {"zero_denominator", r.zero_denominator},
            {"dini", dini},
            {"stable", r.stable},
            {"refinement_trace", trace}};
}

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "example", "n",        "N",        "p",         "alpha", "beta",    "gamma",      "u_Lp",         "uprime_Lp",
        "Au_Lp",   "f_Lp",     "u0_interp", "C_est",    "dini_main", "dini_p", "admissible", "q_norm_est",
        "neumann_iters"};
    return cols;
}

/// One CSV row per grid of the refinement trace.
inline std::vector<std::string> csv_rows(const RegularityReport& r) {
    std::vector<std::string> rows;
    for (const auto& t : r.refinement_trace) {
        std::ostringstream os;
        os << r.example << ',' << r.n << ',' << t.N << ',' << detail::csv_number(r.p) << ','
           << detail::csv_number(r.alpha) << ',' << detail::csv_number(r.beta) << ',' << detail::csv_number(r.gamma)
           << ',' << detail::csv_number(t.u_Lp) << ',' << detail::csv_number(t.uprime_Lp) << ','
           << detail::csv_number(t.Au_Lp) << ',' << detail::csv_number(t.f_Lp) << ','
           << detail::csv_number(r.u0_interp) << ',' << detail::csv_number(t.C_est) << ','
           << (r.dini.cond_main ? "true" : "false") << ',' << (r.dini.cond_p ? "true" : "false") << ','
           << (r.admissible ? "true" : "false") << ',' << detail::csv_number(t.q_norm_est) << ',' << t.neumann_iters;
        rows.push_back(os.str());
    }
    return rows;
}

inline std::string csv_header() {
    std::string h;
    for (const auto& c : csv_columns()) {
        h += (h.empty() ? "" : ",") + c;
    }
    return h;
}

/// Writes <base>.json and, when reports are given, <base>.csv.
inline void emit_report(const Json& doc, const std::vector<RegularityReport>& reports, std::string base) {
    if (base.size() > 5 && base.compare(base.size() - 5, 5, ".json") == 0) {
        base.resize(base.size() - 5);
    }
    std::ofstream js(base + ".json");
    if (!js) {
        throw ConfigError("cannot write report '" + base + ".json'");
    }
    js << doc.dump(2) << '\n';
    if (reports.empty()) {
        return;
    }
    std::ofstream csv(base + ".csv");
    if (!csv) {
        throw ConfigError("cannot write report '" + base + ".csv'");
    }
    csv << csv_header() << '\n';
    for (const auto& r : reports) {
        for (const auto& row : csv_rows(r)) {
            csv << row << '\n';
        }
    }
}

inline Json check_hypotheses(const RunConfig& cfg) {
    Json out = Json::array();
    for (double alpha : cfg.alphas) {
        const auto ex = build_example(cfg, alpha);
        const FormFamily& ff = ex.family;
        const auto bounds = certify_bounds(ff, uniform_times(ff.tau(), 64));
        const auto scale = build_spectral_scale(ff.gram());
        const auto cert =
            estimate_modulus(ff, scale, ex.expected.beta, ex.expected.gamma, default_modulus_gaps(ff.tau()));
        const auto dini = dini_classify(alpha, ex.expected.gamma, ex.expected.beta, cfg.p, ff.tau());
        Json item = {{"example", ex.id},
                     {"n", ff.dim()},
                     {"alpha", alpha},
                     {"bounds", {{"M", bounds.M}, {"alpha1", bounds.alpha1}, {"delta", bounds.delta}}},
                     {"expected",
                      {{"beta", ex.expected.beta},
                       {"gamma", ex.expected.gamma},
                       {"alpha_threshold", ex.expected.alpha_threshold},
                       {"alpha_threshold_p", ex.expected.alpha_threshold_p(cfg.p)}}},
                     {"modulus",
                      {{"holder_alpha", cert.holder_alpha},
                       {"holder_C", cert.holder_C},
                       {"r_squared", cert.r_squared},
                       {"fit_accepted", cert.fit_accepted}}},
                     {"dini", to_json(dini)},
                     {"admissible_zero_u0", admissible(dini, true)},
                     {"admissible_nonzero_u0", admissible(dini, false)}};
        if (cfg.example == "schrodinger") {
            SchrodingerParams prm;
            prm.mesh_n = cfg.mesh_n;
            prm.weight = cfg.potential == "hardy" ? PotentialWeight::hardy : PotentialWeight::bounded;
            const auto sob = certify_sobolev_weight(prm, ex.expected.beta);
            item["sobolev_weight"] = {{"C", sob.C}, {"C_refined", sob.C_refined}, {"pass", sob.pass}};
        }
        out.push_back(item);
    }
    return out;
}

inline VerifyOptions verify_options(const RunConfig& cfg) {
    VerifyOptions opt;
    opt.quadrature = cfg.quadrature;
    opt.mu_shift = cfg.mu_shift;
    return opt;
}

/// Refuses configurations whose power-law modulus fails the main Dini condition.
inline void require_dini(const RunConfig& cfg, const BuiltExample& ex, double alpha) {
    const auto d = dini_classify(alpha, ex.expected.gamma, ex.expected.beta, cfg.p, cfg.tau);
    if (!d.cond_main) {
        std::ostringstream os;
        os << "Dini condition violated: alpha = " << alpha << " <= gamma/2 = " << 0.5 * ex.expected.gamma
           << " makes int_0^tau omega(t)/t^{1+gamma/2} dt diverge";
        throw DiniViolation(os.str());
    }
}

inline std::vector<RegularityReport> run_verify(const RunConfig& cfg, const std::vector<int>& grids) {
    std::vector<RegularityReport> out;
    for (double alpha : cfg.alphas) {
        const auto prob = make_problem(cfg, alpha);
        require_dini(cfg, prob.example, alpha);
        out.push_back(verify_maxreg(prob, grids, alpha, verify_options(cfg)));
    }
    return out;
}

struct SweepRow {
    double alpha = 0.0;
    bool admissible_theory = false;
    bool stable = false;
    RegularityReport report;
};

/// Every alpha is solved; inadmissible cells use adaptive singular quadrature.
inline std::vector<SweepRow> exponent_sweep(const RunConfig& cfg) {
    std::vector<SweepRow> rows;
    for (double alpha : cfg.alphas) {
        const auto prob = make_problem(cfg, alpha);
        SweepRow row;
        row.alpha = alpha;
        row.report = verify_maxreg(prob, cfg.grids, alpha, verify_options(cfg));
        row.admissible_theory = row.report.admissible;
        row.stable = row.report.stable;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Runs one subcommand on a loaded configuration and writes its report.
inline Json run_command(const std::string& command, const RunConfig& cfg) {
    if (command == "check-hypotheses") {
        Json doc = {{"command", command}, {"results", check_hypotheses(cfg)}};
        emit_report(doc, {}, cfg.output);
        return doc;
    }
    if (command == "solve" || command == "verify-maxreg") {
        const std::vector<int> grids =
            command == "solve" ? std::vector<int>{*std::max_element(cfg.grids.begin(), cfg.grids.end())} : cfg.grids;
        const auto reports = run_verify(cfg, grids);
        Json doc = {{"command", command}, {"reports", Json::array()}};
        for (const auto& r : reports) {
            doc["reports"].push_back(to_json(r));
        }
        emit_report(doc, reports, cfg.output);
        return doc;
    }
    if (command == "sweep") {
        const auto rows = exponent_sweep(cfg);
        Json doc = {{"command", command}, {"table", Json::array()}};
        std::vector<RegularityReport> reports;
        for (const auto& r : rows) {
            Json trace = Json::array();
            for (const auto& t : r.report.refinement_trace) {
                trace.push_back({{"N", t.N}, {"C_est", detail::number(t.C_est)}});
            }
            doc["table"].push_back({{"alpha", r.alpha},
                                    {"admissible_theory", r.admissible_theory},
                                    {"stable", r.stable},
                                    {"C_est_trace", trace}});
            reports.push_back(r.report);
        }
        emit_report(doc, reports, cfg.output);
        return doc;
    }
    throw ConfigError("unknown command '" + command + "'");
}

/// Loads the configuration, runs the command and maps failures to exit codes.
inline int run_config(const std::string& path, const std::string& command, std::ostream& log = std::cerr) {
    try {
        const auto cfg = load_config(path);
        run_command(command, cfg);
        return exit_ok;
    } catch (const DiniViolation& e) {
        log << "error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const InvalidInput& e) {
        log << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalFailure& e) {
        log << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}

} // namespace maxreg
