#pragma once

// JSON run configuration. Unknown fields are rejected; diagnostics name the
// offending field and, where it can be located, its line.

#include "maxreg/errors.hpp"
#include "maxreg/example_pde.hpp"
#include "maxreg/harness.hpp"
#include "maxreg/qlr_engine.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace maxreg {

struct RunConfig {
    std::string example;
    int mesh_n = 50;
    double tau = 1.0;
    double p = 2.0;
    std::vector<double> alphas;
    std::optional<std::pair<double, double>> beta_gamma;
    std::string potential = "bounded";
    U0Class u0_class = U0Class::zero;
    unsigned u0_seed = 1;
    SourceKind f_kind = SourceKind::random_smooth;
    unsigned f_seed = 1;
    std::vector<int> grids{100, 200, 400, 800};
    QuadratureSpec quadrature;
    double mu_shift = 0.0;
    std::string output = "maxreg_report";
};

inline double default_alpha(const std::string& example) {
    if (example == "robin") {
        return 0.3;
    }
    if (example == "wentzell") {
        return 0.1;
    }
    return 0.5;
}

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class ConfigReader {
public:
    explicit ConfigReader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        std::ostringstream os;
        os << "config";
        const auto pos = text_.find('"' + field.substr(field.rfind('.') + 1) + '"');
        if (pos != std::string::npos) {
            os << ':' << line_of_offset(text_, pos);
        }
        os << ": field '" << field << "': " << what;
        throw ConfigError(os.str());
    }

    void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
        for (const auto& [key, value] : obj.items()) {
            if (allowed.count(key) == 0) {
                fail(prefix + key, "unknown field");
            }
        }
    }

    double number(const nlohmann::json& v, const std::string& field) const {
        if (!v.is_number()) {
            fail(field, "expected a number");
        }
        return v.get<double>();
    }

    int integer(const nlohmann::json& v, const std::string& field) const {
        if (!v.is_number_integer()) {
            fail(field, "expected an integer");
        }
        return v.get<int>();
    }

    std::string string(const nlohmann::json& v, const std::string& field) const {
        if (!v.is_string()) {
            fail(field, "expected a string");
        }
        return v.get<std::string>();
    }

private:
    const std::string& text_;
};

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::ostringstream os;
        os << "config:" << detail::line_of_offset(text, e.byte) << ": malformed JSON: " << e.what();
        throw ConfigError(os.str());
    }
    detail::ConfigReader rd(text);
    if (!doc.is_object()) {
        throw ConfigError("config: top level must be a JSON object");
    }
    rd.reject_unknown(doc,
                      {"example", "mesh_n", "tau", "p", "alpha", "beta_gamma", "potential", "u0_class", "u0_seed",
                       "f_spec", "grids", "quadrature", "mu_shift", "output"},
                      "");
    for (const char* required : {"example", "p"}) {
        if (!doc.contains(required)) {
            throw ConfigError(std::string("config: missing required field '") + required + "'");
        }
    }
    RunConfig cfg;
    cfg.example = rd.string(doc["example"], "example");
    if (cfg.example != "schrodinger" && cfg.example != "robin" && cfg.example != "wentzell" &&
        cfg.example != "matrix") {
        rd.fail("example", "must be one of schrodinger, robin, wentzell, matrix");
    }
    cfg.p = rd.number(doc["p"], "p");
    if (!(cfg.p > 1.0)) {
        rd.fail("p", "must exceed 1");
    }
    if (doc.contains("mesh_n")) {
        cfg.mesh_n = rd.integer(doc["mesh_n"], "mesh_n");
        if (cfg.mesh_n < 2 || cfg.mesh_n > 400) {
            rd.fail("mesh_n", "must lie in [2, 400]");
        }
    }
    if (doc.contains("tau")) {
        cfg.tau = rd.number(doc["tau"], "tau");
        if (!(cfg.tau > 0.0)) {
            rd.fail("tau", "must be positive");
        }
    }
    if (doc.contains("alpha")) {
        const auto& a = doc["alpha"];
        if (a.is_array()) {
            if (a.empty()) {
                rd.fail("alpha", "array must not be empty");
            }
            for (const auto& x : a) {
                cfg.alphas.push_back(rd.number(x, "alpha"));
            }
        } else {
            cfg.alphas.push_back(rd.number(a, "alpha"));
        }
        for (double x : cfg.alphas) {
            if (!(x > 0.0 && x <= 1.0)) {
                rd.fail("alpha", "must lie in (0, 1]");
            }
        }
    } else {
        cfg.alphas.push_back(default_alpha(cfg.example));
    }
    if (doc.contains("beta_gamma")) {
        const auto& bg = doc["beta_gamma"];
        if (!bg.is_array() || bg.size() != 2) {
            rd.fail("beta_gamma", "expected [beta, gamma]");
        }
        const double b = rd.number(bg[0], "beta_gamma"), g = rd.number(bg[1], "beta_gamma");
        if (!(b >= 0.0 && b <= 1.0 && g >= 0.0 && g <= 1.0)) {
            rd.fail("beta_gamma", "entries must lie in [0, 1]");
        }
        cfg.beta_gamma = std::make_pair(b, g);
    }
    if (doc.contains("potential")) {
        cfg.potential = rd.string(doc["potential"], "potential");
        if (cfg.potential != "bounded" && cfg.potential != "hardy") {
            rd.fail("potential", "must be bounded or hardy");
        }
    }
    if (doc.contains("u0_class")) {
        const auto c = rd.string(doc["u0_class"], "u0_class");
        if (c == "zero") {
            cfg.u0_class = U0Class::zero;
        } else if (c == "real_interp") {
            cfg.u0_class = U0Class::real_interp;
        } else if (c == "sqrt_domain") {
            cfg.u0_class = U0Class::sqrt_domain;
        } else {
            rd.fail("u0_class", "must be zero, real_interp or sqrt_domain");
        }
    }
    if (doc.contains("u0_seed")) {
        cfg.u0_seed = static_cast<unsigned>(rd.integer(doc["u0_seed"], "u0_seed"));
    }
    if (doc.contains("f_spec")) {
        const auto& fs = doc["f_spec"];
        if (!fs.is_object()) {
            rd.fail("f_spec", "expected an object");
        }
        rd.reject_unknown(fs, {"kind", "seed"}, "f_spec.");
        if (fs.contains("kind")) {
            const auto k = rd.string(fs["kind"], "f_spec.kind");
            if (k == "zero") {
                cfg.f_kind = SourceKind::zero;
            } else if (k == "random_smooth") {
                cfg.f_kind = SourceKind::random_smooth;
            } else if (k == "manufactured") {
                cfg.f_kind = SourceKind::manufactured;
            } else {
                rd.fail("f_spec.kind", "must be zero, random_smooth or manufactured");
            }
        }
        if (fs.contains("seed")) {
            cfg.f_seed = static_cast<unsigned>(rd.integer(fs["seed"], "f_spec.seed"));
        }
    }
    if (cfg.f_kind == SourceKind::manufactured && cfg.u0_class != U0Class::zero) {
        rd.fail("u0_class", "a manufactured source fixes u0 = 0; use u0_class zero");
    }
    if (doc.contains("grids")) {
        const auto& g = doc["grids"];
        if (!g.is_array() || g.empty()) {
            rd.fail("grids", "expected a nonempty array of step counts");
        }
        cfg.grids.clear();
        for (const auto& x : g) {
            const int N = rd.integer(x, "grids");
            if (N < 2) {
                rd.fail("grids", "step counts must be at least 2");
            }
            cfg.grids.push_back(N);
        }
    }
    if (doc.contains("quadrature")) {
        const auto& q = doc["quadrature"];
        if (!q.is_object()) {
            rd.fail("quadrature", "expected an object");
        }
        rd.reject_unknown(q, {"gauss_order", "grading_ratio", "panels"}, "quadrature.");
        if (q.contains("gauss_order")) {
            cfg.quadrature.gauss_order = rd.integer(q["gauss_order"], "quadrature.gauss_order");
        }
        if (q.contains("grading_ratio")) {
            cfg.quadrature.grading_ratio = rd.number(q["grading_ratio"], "quadrature.grading_ratio");
        }
        if (q.contains("panels")) {
            cfg.quadrature.panels_per_interval = rd.integer(q["panels"], "quadrature.panels");
        }
        try {
            cfg.quadrature.validate();
        } catch (const InvalidInput& e) {
            rd.fail("quadrature", e.what());
        }
    }
    if (doc.contains("mu_shift")) {
        cfg.mu_shift = rd.number(doc["mu_shift"], "mu_shift");
        if (!(cfg.mu_shift >= 0.0)) {
            rd.fail("mu_shift", "must be nonnegative");
        }
    }
    if (doc.contains("output")) {
        cfg.output = rd.string(doc["output"], "output");
        if (cfg.output.empty()) {
            rd.fail("output", "must not be empty");
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

/// Example family for one alpha, with the exponent override applied.
inline BuiltExample build_example(const RunConfig& cfg, double alpha) {
    BuiltExample ex = [&]() {
        if (cfg.example == "schrodinger") {
            SchrodingerParams prm;
            prm.mesh_n = cfg.mesh_n;
            prm.alpha = alpha;
            prm.tau = cfg.tau;
            prm.weight = cfg.potential == "hardy" ? PotentialWeight::hardy : PotentialWeight::bounded;
            return build_schrodinger(prm);
        }
        if (cfg.example == "robin") {
            RobinParams prm;
            prm.mesh_n = cfg.mesh_n;
            prm.alpha = alpha;
            prm.tau = cfg.tau;
            return build_robin(prm);
        }
        if (cfg.example == "wentzell") {
            WentzellParams prm;
            prm.mesh_n = cfg.mesh_n;
            prm.alpha = alpha;
            prm.tau = cfg.tau;
            return build_wentzell(prm);
        }
        MatrixParams prm;
        prm.dim = cfg.mesh_n;
        prm.alpha = alpha;
        prm.tau = cfg.tau;
        return build_matrix(prm);
    }();
    if (cfg.beta_gamma) {
        ex.expected = exponents(cfg.beta_gamma->first, cfg.beta_gamma->second);
    }
    return ex;
}

inline EvolutionProblem make_problem(const RunConfig& cfg, double alpha) {
    EvolutionProblem prob{build_example(cfg, alpha), cfg.p, {}, {}, cfg.u0_class, {}};
    const FormFamily& ff = prob.example.family;
    const auto n = ff.dim();
    switch (cfg.f_kind) {
    case SourceKind::zero:
        prob.f = [n](double) { return VectorXd::Zero(n); };
        break;
    case SourceKind::random_smooth:
        prob.f = random_smooth_source(n, cfg.tau, cfg.f_seed);
        break;
    case SourceKind::manufactured: {
        // u(t) = sin(t) w, f = u' + A(t) u
        std::mt19937_64 rng(cfg.f_seed);
        std::normal_distribution<double> nd;
        const VectorXd w = VectorXd::NullaryExpr(n, [&]() { return nd(rng); });
        prob.f = [ff, w](double t) -> VectorXd {
            return std::cos(t) * w + std::sin(t) * ff.gram().chol_h().solve(ff.form_at(t) * w);
        };
        prob.exact = [w](double t) -> VectorXd { return std::sin(t) * w; };
        break;
    }
    }
    prob.u0 = cfg.u0_class == U0Class::zero
                  ? VectorXd::Zero(n)
                  : smooth_initial_value(ff, initial_value_smoothing(cfg.u0_class, cfg.p), cfg.u0_seed);
    return prob;
}

} // namespace maxreg
