// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail i,j,...]
//
// Exit status is 0 when the set of failing criteria equals the expected set.

#include "maxreg/example_pde.hpp"
#include "maxreg/harness.hpp"
#include "maxreg/config.hpp"
#include "maxreg/qlr_engine.hpp"
#include "maxreg/reference_stepper.hpp"
#include "support/oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace maxreg;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

BuiltExample robin(int n, double alpha, bool time_dependent = true) {
    RobinParams prm;
    prm.mesh_n = n;
    prm.alpha = alpha;
    prm.time_dependent = time_dependent;
    return build_robin(prm);
}

QuadratureSpec quadrature_for(const BuiltExample& ex, double alpha) {
    QuadratureSpec q;
    q.singular_exponent = 1.0 + 0.5 * ex.expected.gamma;
    q.modulus_alpha = alpha;
    return q;
}

double relative_l2(const GridFunction& u, const GridFunction& ref, const GramPair& gp) {
    const auto stride = (ref.nodes() - 1) / (u.nodes() - 1);
    if (stride * (u.nodes() - 1) != ref.nodes() - 1) {
        throw InvalidInput("reference grid is not a refinement of the solution grid");
    }
    GridFunction d = u, r = u;
    for (Eigen::Index k = 0; k < u.nodes(); ++k) {
        r.values.col(k) = ref.values.col(k * stride);
    }
    d.values -= r.values;
    d.p = r.p = 2.0;
    d.exclude_origin = r.exclude_origin = false;
    return lp_norm(d, gp) / lp_norm(r, gp);
}

Outcome autonomous_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ex = robin(50, 0.3, false);
    const auto& ff = ex.family;
    const auto grid = uniform_grid(1.0, 400);
    const GridFunction f = sample(grid, random_smooth_source(ff.dim(), 1.0, 11), 2.0);
    const VectorXd u0 = VectorXd::Zero(ff.dim());
    const auto sol = solve_representation(ff, f, u0, {});
    GridFunction exact = sol.u;
    exact.values = oracle::autonomous_solution(ff.operator_h(0.0), grid, f.values, u0);
    const double err = relative_l2(sol.u, exact, ff.gram());
    const bool q_zero = apply_Q(ff, f).values.isZero(0.0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {err <= 1e-6 && q_zero && secs <= 30.0,
            fmt("rel L2 error %.3e (<= 1e-6), Q identically zero: %s, %.1f s (<= 30)", err, q_zero ? "yes" : "no",
                secs)};
}

Outcome interpolation_endpoints() {
    const auto ex = robin(50, 0.3);
    const auto& gp = ex.family.gram();
    const auto scale = build_spectral_scale(gp);
    std::mt19937_64 rng(21);
    double worst = 0.0;
    int violations = 0;
    for (int i = 0; i < 100; ++i) {
        const VectorXd u = oracle::random_vector(ex.family.dim(), rng);
        const double h = gp.norm_h(u), v = gp.norm_v(u);
        worst = std::max({worst, std::abs(interp_norm(u, scale, 0.0) - h) / h,
                          std::abs(interp_norm(u, scale, 1.0) - v) / v});
        for (double b : {0.1, 0.25, 0.5, 0.75, 0.9}) {
            if (interp_norm(u, scale, b) > std::pow(h, 1.0 - b) * std::pow(v, b) * (1.0 + 1e-12)) {
                ++violations;
            }
        }
    }
    return {worst <= 1e-10 && violations == 0,
            fmt("max rel endpoint deviation %.2e (<= 1e-10), interpolation inequality violations %d", worst,
                violations)};
}

Outcome resolvent_difference_law() {
    const auto ex = robin(50, 0.3);
    const auto bounds = certify_bounds(ex.family, {0.2, 0.7});
    std::vector<double> zs, vals;
    for (int k = 0; k <= 8; ++k) {
        const double r = std::pow(10.0, 2.0 + 0.25 * k);
        zs.push_back(r);
        vals.push_back(resolvent_difference_norm(ex.family, bounds, 0.7, 0.2, cplx(-r, 0.0), 1.0, 0.5).norm);
    }
    const double slope = oracle::loglog_slope(zs, vals);
    return {slope <= -0.15, fmt("fitted slope %.3f (<= -0.15)", slope)};
}

Outcome frozen_semigroup_estimate() {
    const double alpha = 0.3;
    std::vector<double> sups;
    std::string per_mesh;
    for (int n : {50, 100, 200}) {
        const auto ex = robin(n, alpha);
        const auto& ff = ex.family;
        // nodal values of a fixed smooth profile on [0, 1]
        VectorXd u0(ff.dim());
        for (Eigen::Index i = 0; i < u0.size(); ++i) {
            const double x = static_cast<double>(i) / n;
            u0(i) = 1.0 + x * (1.0 - x) + 0.5 * std::cos(3.0 * x);
        }
        std::vector<double> ts;
        for (int k = 10; k >= 0; --k) {
            ts.push_back(std::ldexp(1.0, -k));
        }
        ts.insert(ts.begin(), 0.0);
        const GridFunction r = apply_R(ff, u0, ts);
        const MatrixXd a0 = ff.operator_h(0.0);
        const double norm0 = ff.gram().norm_h(u0);
        double sup = 0.0;
        for (Eigen::Index k = 1; k < r.nodes(); ++k) {
            const double t = ts[static_cast<std::size_t>(k)];
            const VectorXd frozen = a0 * expm(MatrixXd(-t * a0)) * u0;
            const double d = ff.gram().norm_h(r.values.col(k) - frozen);
            sup = std::max(sup, d * std::pow(t, 0.75) / std::pow(t, alpha) / norm0);
        }
        sups.push_back(sup);
        per_mesh += fmt(" n=%d:%.3g", n, sup);
    }
    const double spread = *std::max_element(sups.begin(), sups.end()) / *std::min_element(sups.begin(), sups.end());
    return {std::isfinite(spread) && spread <= 2.0,
            fmt("sup ratio over dyadic t in [2^-10, 1]%s, max/min %.3f (<= 2)", per_mesh.c_str(), spread)};
}

Outcome shift_contraction() {
    const auto ex = robin(50, 0.3);
    const auto grid = uniform_grid(1.0, 100);
    const auto quad = quadrature_for(ex, 0.3);
    std::vector<double> mus = {1e1, 1e2, 1e3, 1e4}, qs;
    std::string vals;
    for (double mu : mus) {
        qs.push_back(q_norm_estimate(ex.family, grid, quad, 2.0, mu).value);
        vals += fmt(" %.3e", qs.back());
    }
    const double slope = oracle::loglog_slope(mus, qs);
    return {std::abs(slope + 0.5) <= 0.15, fmt("||Q|| estimates%s, slope %.3f (target -0.5 +- 0.15)", vals.c_str(),
                                               slope)};
}

Outcome representation_vs_stepper() {
    const auto ex = robin(50, 0.3);
    const auto& ff = ex.family;
    const auto fsrc = random_smooth_source(ff.dim(), 1.0, 3);
    const VectorXd u0 = smooth_initial_value(ff, 0.6, 5);
    const auto ref = refine_until(ff, fsrc, u0, 1e-5);
    if (!ref.converged) {
        return {false, "reference stepper did not converge"};
    }
    std::vector<double> errs;
    for (int N : {200, 400, 800}) {
        const auto sol = solve_representation(ff, sample(uniform_grid(1.0, N), fsrc), u0, quadrature_for(ex, 0.3));
        errs.push_back(relative_l2(sol.u, ref.extrapolated, ff.gram()));
    }
    const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
    return {errs[2] <= 1e-2 && r1 >= 1.5 && r2 >= 1.5,
            fmt("rel L2 at N=200/400/800: %.3e %.3e %.3e (<= 1e-2), halving ratios %.2f %.2f (>= 1.5), reference %d "
                "steps",
                errs[0], errs[1], errs[2], r1, r2, ref.steps)};
}

Outcome constant_stability() {
    bool pass = true;
    std::string detail;
    for (double p : {2.0, 3.0}) {
        RunConfig cfg;
        cfg.example = "wentzell";
        cfg.p = p;
        cfg.u0_class = U0Class::real_interp;
        const auto prob = make_problem(cfg, 0.1);
        VerifyOptions opt;
        opt.estimate_q = false;
        const auto rep = verify_maxreg(prob, {100, 200, 400, 800}, 0.1, opt);
        double lo = 1e300, hi = 0.0, res = 0.0;
        for (const auto& row : rep.refinement_trace) {
            lo = std::min(lo, row.C_est);
            hi = std::max(hi, row.C_est);
            res = std::max(res, row.ode_residual);
        }
        pass = pass && rep.admissible && hi / lo <= 1.2 && res <= 1e-8;
        detail += fmt("p=%g: C_est in [%.4f, %.4f] spread %.3f (<= 1.2), max residual %.1e (<= 1e-8); ", p, lo, hi,
                      hi / lo, res);
    }
    return {pass, detail};
}

Outcome threshold_table() {
    int mismatches = 0;
    const auto sb = build_schrodinger({});
    SchrodingerParams hp;
    hp.weight = PotentialWeight::hardy;
    hp.alpha = 0.7;
    const auto sh = build_schrodinger(hp);
    const auto rb = build_robin({});
    const auto wz = build_wentzell({});
    for (int i = 1; i <= 200; ++i) {
        const double alpha = i / 200.0 - 1e-3;
        for (double p : {1.5, 2.0, 3.0, 4.0, 10.0}) {
            for (const auto* ex : {&sb, &sh}) {
                const double s = ex->expected.gamma;
                const auto d = dini_classify(alpha, ex->expected.gamma, ex->expected.beta, p, 1.0);
                mismatches += admissible(d, true) != (alpha > s / 2);
                mismatches += admissible(d, false) != (alpha > std::max(s / 2, s - 1.0 / p));
            }
            const auto r = dini_classify(alpha, rb.expected.gamma, rb.expected.beta, p, 1.0);
            mismatches += admissible(r, true) != (alpha > 0.25);
            mismatches += admissible(r, false) != (alpha > std::max(0.25, 0.75 - 1.0 / p));
            mismatches += rb.expected.alpha_threshold_p(p) != std::max(0.25, 0.75 - 1.0 / p);
            const auto w = dini_classify(alpha, wz.expected.gamma, wz.expected.beta, p, 1.0);
            mismatches += !admissible(w, false);
            // beta = gamma = 1: integral of omega(t) / t^{3/2}
            mismatches += dini_classify(alpha, 1.0, 1.0, p, 1.0).cond_main != (alpha > 0.5);
        }
    }
    mismatches += dini_classify(0.25, 0.5, 1.0, 2.0, 1.0).cond_main;
    return {mismatches == 0, fmt("%d mismatches against the closed-form conditions", mismatches)};
}

Outcome hypothesis_certification() {
    SchrodingerParams hp;
    hp.weight = PotentialWeight::hardy;
    hp.alpha = 0.7;
    WentzellParams wp;
    wp.alpha = 0.1;
    const std::vector<std::pair<BuiltExample, double>> cases = {
        {build_schrodinger({}), SchrodingerParams{}.alpha},
        {build_schrodinger(hp), 0.7},
        {robin(50, 0.3), 0.3},
        {build_wentzell(wp), 0.1}};
    bool pass = true;
    std::string detail;
    for (const auto& [ex, alpha] : cases) {
        const auto& ff = ex.family;
        const auto b = certify_bounds(ff, uniform_times(ff.tau(), 16));
        const auto m = estimate_modulus(ff, ex.expected.beta, ex.expected.gamma, default_modulus_gaps(ff.tau()));
        const bool ok = std::isfinite(b.M) && b.alpha1 > 0.0 && b.delta <= 1.0 &&
                        std::abs(m.holder_alpha - alpha) <= 0.1;
        pass = pass && ok;
        detail += fmt("%s: M=%.3g a1=%.3g delta=%.3g alpha %.3f->%.3f; ", ex.id.c_str(), b.M, b.alpha1, b.delta,
                      alpha, m.holder_alpha);
    }
    return {pass, detail};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance run"};
    std::vector<int> expected_fail;
    app.add_option("--expect-fail", expected_fail, "criteria known to fail")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"autonomous oracle equivalence", autonomous_oracle},
        {"interpolation endpoints", interpolation_endpoints},
        {"resolvent difference decay", resolvent_difference_law},
        {"frozen-slice semigroup estimate", frozen_semigroup_estimate},
        {"shift contraction law", shift_contraction},
        {"representation vs stepper", representation_vs_stepper},
        {"a priori constant stability", constant_stability},
        {"threshold table", threshold_table},
        {"hypothesis certification", hypothesis_certification},
    };
    std::set<int> failed;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s [%.2f s]: %s\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs,
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) {
            failed.insert(id);
        }
    }
    const std::set<int> expected(expected_fail.begin(), expected_fail.end());
    if (failed != expected) {
        std::printf("failing criteria differ from the expected set\n");
        return 1;
    }
    return 0;
}
