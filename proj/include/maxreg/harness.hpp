#pragma once

// Dini classification, threshold bookkeeping and the measured a priori constant
//
//   C_est = (||u||_p + ||u'||_p + ||A u||_p) / (||f||_p + ||u0||_trace)
//
// over a sequence of time grids.

#include "maxreg/errors.hpp"
#include "maxreg/example_pde.hpp"
#include "maxreg/form_family.hpp"
#include "maxreg/grid_function.hpp"
#include "maxreg/operator_calculus.hpp"
#include "maxreg/qlr_engine.hpp"
#include "maxreg/reference_stepper.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace maxreg {

struct DiniResult {
    bool cond_main = false;
    /// int_0^tau t^{alpha - 1 - gamma/2} dt, infinite when divergent.
    double main_value = std::numeric_limits<double>::infinity();
    bool cond_p = false;
    /// int_0^tau t^{p(alpha - (beta+gamma)/2)} dt, infinite when divergent.
    double p_value = std::numeric_limits<double>::infinity();
};

/// Closed-form classification for a power-law modulus omega(t) = t^alpha.
inline DiniResult dini_classify(double alpha, double gamma, double beta, double p, double tau) {
    if (!(tau > 0.0)) {
        throw InvalidInput("dini_classify: tau must be positive");
    }
    if (!(p > 1.0)) {
        throw InvalidInput("dini_classify: p must exceed 1");
    }
    DiniResult r;
    const double e = alpha - 0.5 * gamma;
    if (e > 0.0) {
        r.cond_main = true;
        r.main_value = std::pow(tau, e) / e;
    }
    const double x = std::isinf(p) ? 0.0 : p * (alpha - 0.5 * (beta + gamma));
    if (std::isinf(p)) {
        r.cond_p = alpha - 0.5 * (beta + gamma) >= 0.0;
        r.p_value = r.cond_p ? tau : std::numeric_limits<double>::infinity();
    } else if (x > -1.0) {
        r.cond_p = true;
        r.p_value = std::pow(tau, x + 1.0) / (x + 1.0);
    }
    return r;
}

/// Admissibility of alpha at exponent p: main condition, plus the p-condition
/// when the initial value is nonzero.
inline bool admissible(const DiniResult& d, bool zero_initial_value) {
    return d.cond_main && (zero_initial_value || d.cond_p);
}

enum class U0Class { zero, real_interp, sqrt_domain };
enum class SourceKind { zero, random_smooth, manufactured };

inline std::string to_string(U0Class c) {
    switch (c) {
    case U0Class::zero: return "zero";
    case U0Class::real_interp: return "real_interp";
    case U0Class::sqrt_domain: return "sqrt_domain";
    }
    return "?";
}

inline std::string to_string(SourceKind k) {
    switch (k) {
    case SourceKind::zero: return "zero";
    case SourceKind::random_smooth: return "random_smooth";
    case SourceKind::manufactured: return "manufactured";
    }
    return "?";
}

struct EvolutionProblem {
    BuiltExample example;
    double p = 2.0;
    SourceFunction f;
    VectorXd u0;
    U0Class u0_class = U0Class::zero;
    /// exact solution when known (manufactured sources)
    std::function<VectorXd(double)> exact;
};

/// Sum of three temporal harmonics with random spatial profiles.
inline SourceFunction random_smooth_source(Eigen::Index dim, double tau, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    MatrixXd w(dim, 3);
    std::vector<double> ph(3);
    for (int m = 0; m < 3; ++m) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            w(i, m) = nd(rng) / (m + 1);
        }
        ph[static_cast<std::size_t>(m)] = phase(rng);
    }
    return [w, ph, tau](double t) -> VectorXd {
        VectorXd out = VectorXd::Zero(w.rows());
        for (int m = 0; m < 3; ++m) {
            out += std::cos((m + 1) * std::numbers::pi * t / tau + ph[static_cast<std::size_t>(m)]) * w.col(m);
        }
        return out;
    };
}

/// Shift making A(0) + delta invertible and accretive.
inline double initial_value_shift(const FormFamily& ff) { return certify_bounds(ff, {0.0}).delta; }

/// (delta + A(0))^{-theta} w for a seeded random w, landing in the trace space with margin.
inline VectorXd smooth_initial_value(const FormFamily& ff, double theta, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const VectorXd w = VectorXd::NullaryExpr(ff.dim(), [&]() { return nd(rng); });
    const double delta = initial_value_shift(ff);
    const auto dec = SpectralDecomposition::of_form(shift(ff, delta).form_at(0.0), ff.gram());
    return dec.apply([theta](cplx l) { return std::pow(l, -theta); }, w);
}

/// Exponent used to generate initial values of each class.
inline double initial_value_smoothing(U0Class c, double p) {
    switch (c) {
    case U0Class::zero: return 0.0;
    case U0Class::real_interp: return std::min(1.0, 1.0 - 1.0 / p + 0.1);
    case U0Class::sqrt_domain: return 0.6;
    }
    return 0.0;
}

/// Norm of u0 matching its class: the real-interpolation trace norm, or
/// ||(delta + A(0))^{1/2} u0||_H.
inline double initial_value_norm(const FormFamily& ff, const VectorXd& u0, U0Class c, double p) {
    if (c == U0Class::zero || u0.isZero(0.0)) {
        return 0.0;
    }
    const double delta = initial_value_shift(ff);
    const FormFamily shifted = shift(ff, delta);
    const auto bounds = certify_bounds(shifted, {0.0});
    const OperatorSlice slice = make_slice(shifted, 0.0, bounds);
    if (c == U0Class::real_interp) {
        return real_interp_norm(u0, slice, ff.gram(), p, ff.tau());
    }
    return ff.gram().norm_h(frac_power_apply(slice, 0.5, u0));
}

struct TraceRow {
    int N = 0;
    double u_Lp = 0.0;
    double uprime_Lp = 0.0;
    double Au_Lp = 0.0;
    double f_Lp = 0.0;
    double C_est = 0.0;
    bool zero_denominator = false;
    int neumann_iters = 0;
    double q_norm_est = std::numeric_limits<double>::quiet_NaN();
    double ode_residual = 0.0;
    double exact_error = std::numeric_limits<double>::quiet_NaN();
};

struct RegularityReport {
    std::string example;
    Eigen::Index n = 0;
    double p = 2.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double u_Lp = 0.0, uprime_Lp = 0.0, Au_Lp = 0.0;
    double f_Lp = 0.0, u0_interp = 0.0;
    double C_est = 0.0;
    bool zero_denominator = false;
    DiniResult dini;
    bool admissible = false;
    std::vector<TraceRow> refinement_trace;
    /// max C_est / min C_est over the trace does not exceed 1.2
    bool stable = true;
};

struct VerifyOptions {
    QuadratureSpec quadrature;
    double mu_shift = 0.0;
    bool estimate_q = true;
};

/// Smallest shift making every A(t) invertible and accretive, at least `requested`.
inline double effective_shift(const FormFamily& ff, double requested) {
    const auto bounds = certify_bounds(ff, uniform_times(ff.tau(), 16));
    return std::max(requested, bounds.delta);
}

inline RegularityReport verify_maxreg(const EvolutionProblem& prob, const std::vector<int>& grids, double alpha,
                                      const VerifyOptions& opt = {}) {
    if (!(prob.p > 1.0) || std::isinf(prob.p)) {
        throw InvalidInput("verify_maxreg: p must be finite and exceed 1");
    }
    if (grids.empty()) {
        throw InvalidInput("verify_maxreg: at least one grid is required");
    }
    const FormFamily& ff = prob.example.family;
    const auto& ex = prob.example.expected;
    RegularityReport rep;
    rep.example = prob.example.id;
    rep.n = ff.dim();
    rep.p = prob.p;
    rep.alpha = alpha;
    rep.beta = ex.beta;
    rep.gamma = ex.gamma;
    const bool zero_u0 = prob.u0_class == U0Class::zero || prob.u0.isZero(0.0);
    rep.dini = dini_classify(alpha, ex.gamma, ex.beta, prob.p, ff.tau());
    rep.admissible = admissible(rep.dini, zero_u0);
    rep.u0_interp = zero_u0 ? 0.0 : initial_value_norm(ff, prob.u0, prob.u0_class, prob.p);

    QuadratureSpec quad = opt.quadrature;
    quad.singular_exponent = 1.0 + 0.5 * ex.gamma;
    quad.modulus_alpha = rep.dini.cond_main ? alpha : std::numeric_limits<double>::quiet_NaN();
    const double mu = effective_shift(ff, opt.mu_shift);
    const VectorXd u0 = zero_u0 ? VectorXd::Zero(ff.dim()) : prob.u0;

    for (int N : grids) {
        const auto grid = uniform_grid(ff.tau(), N);
        GridFunction f = sample(grid, prob.f, prob.p);
        RepresentationSolution sol;
        try {
            sol = solve_representation(ff, f, u0, quad, mu);
        } catch (const Error& e) {
            std::ostringstream os;
            os << prob.example.id << " at N = " << N << ": " << e.what();
            throw NumericalFailure(os.str());
        }
        TraceRow row;
        row.N = N;
        const auto& gp = ff.gram();
        row.u_Lp = lp_norm(sol.u, gp);
        row.uprime_Lp = lp_norm(sol.u_prime, gp);
        row.Au_Lp = lp_norm(sol.Au, gp);
        row.f_Lp = lp_norm(f, gp);
        row.neumann_iters = sol.neumann_iters;
        const double denom = row.f_Lp + rep.u0_interp;
        row.zero_denominator = !(denom > 0.0);
        row.C_est = row.zero_denominator ? 0.0 : (row.u_Lp + row.uprime_Lp + row.Au_Lp) / denom;

        // u' + A u - f with A u recomputed from the form matrices
        GridFunction resid = sol.u_prime;
        for (Eigen::Index k = 0; k < f.nodes(); ++k) {
            const double t = grid[static_cast<std::size_t>(k)];
            resid.values.col(k) += ff.operator_h(t) * sol.u.values.col(k) - f.values.col(k);
        }
        row.ode_residual = row.f_Lp > 0.0 ? lp_norm(resid, gp) / row.f_Lp : lp_norm(resid, gp);
        if (prob.exact) {
            GridFunction err = sol.u;
            for (Eigen::Index k = 0; k < f.nodes(); ++k) {
                err.values.col(k) -= prob.exact(grid[static_cast<std::size_t>(k)]);
            }
            row.exact_error = lp_norm(err, gp);
        }
        if (opt.estimate_q) {
            row.q_norm_est = q_norm_estimate(QlrEngine(shift(ff, mu), grid, quad), prob.p).value;
        }
        rep.refinement_trace.push_back(row);
    }
    const TraceRow& last = rep.refinement_trace.back();
    rep.u_Lp = last.u_Lp;
    rep.uprime_Lp = last.uprime_Lp;
    rep.Au_Lp = last.Au_Lp;
    rep.f_Lp = last.f_Lp;
    rep.C_est = last.C_est;
    rep.zero_denominator = last.zero_denominator;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rep.refinement_trace) {
        lo = std::min(lo, r.C_est);
        hi = std::max(hi, r.C_est);
    }
    rep.stable = rep.zero_denominator || (lo > 0.0 && hi / lo <= 1.2);
    return rep;
}

} // namespace maxreg
