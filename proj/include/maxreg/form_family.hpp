#pragma once

/*
 * Time-dependent sesquilinear forms a(t; u, v) = v^T A_form(t) u on a fixed
 * coordinate space (constant form domain).
 *
 * Families are stored in affine form
 *
 *   A_form(t) = sum_i theta_i(t) M_i,
 *
 * where a term without a profile has theta_i = 1.  Differences
 * A_form(t) - A_form(s) are assembled from the time-varying terms only, so
 * adding a constant shift mu G_H leaves every difference bit-for-bit unchanged.
 *
 * Certification:
 *   M        = max_t || G_V^{-1/2} A_form(t) G_V^{-1/2} ||_2
 *   alpha_1  = min_t lambda_min( sym A_form(t) + delta G_H ; G_V )
 *   delta    = first rung of {0, 1, 2, 4, ...} giving alpha_1 >= 1e-8
 *
 * Modulus of continuity measured as a map V_beta x V_gamma -> K:
 *   omega(h) = max_{|t-s| = h} || Lambda^{-gamma/2} Phi^T (A(t) - A(s)) Phi Lambda^{-beta/2} ||_2
 */

#include "maxreg/errors.hpp"
#include "maxreg/hilbert_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace maxreg {

/// Scalar time coefficient theta(t).
using TimeProfile = std::function<double(double)>;

/// theta(t) = amplitude * (t / tau)^alpha, the canonical alpha-Hoelder profile.
inline TimeProfile holder_profile(double alpha, double tau = 1.0, double amplitude = 1.0) {
    return [=](double t) { return amplitude * std::pow(std::max(t, 0.0) / tau, alpha); };
}

struct FormTerm {
    MatrixXd matrix;
    TimeProfile profile; // empty: constant coefficient 1
    std::string label;

    [[nodiscard]] bool varying() const { return static_cast<bool>(profile); }
    [[nodiscard]] double coefficient(double t) const { return profile ? profile(t) : 1.0; }
};

class FormFamily {
public:
    FormFamily(GramPair gp, double tau, std::vector<FormTerm> terms, double delta_shift = 0.0)
        : gp_(std::move(gp)), tau_(tau), delta_shift_(delta_shift), terms_(std::move(terms)) {
        if (!(tau_ > 0.0)) {
            throw InvalidInput("form family horizon tau must be positive");
        }
        if (terms_.empty()) {
            throw InvalidInput("form family needs at least one term");
        }
        for (const auto& term : terms_) {
            if (term.matrix.rows() != gp_.dim() || term.matrix.cols() != gp_.dim()) {
                throw InvalidInput("form term '" + term.label + "' has wrong dimensions");
            }
        }
    }

    [[nodiscard]] const GramPair& gram() const { return gp_; }
    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] double delta_shift() const { return delta_shift_; }
    [[nodiscard]] Eigen::Index dim() const { return gp_.dim(); }
    [[nodiscard]] const std::vector<FormTerm>& terms() const { return terms_; }

    [[nodiscard]] MatrixXd form_at(double t) const {
        MatrixXd a = MatrixXd::Zero(dim(), dim());
        for (const auto& term : terms_) {
            a.noalias() += term.coefficient(t) * term.matrix;
        }
        return a;
    }

    /// A_form(t) - A_form(s), built from the time-varying terms only.
    [[nodiscard]] MatrixXd difference(double t, double s) const {
        MatrixXd d = MatrixXd::Zero(dim(), dim());
        for (const auto& term : terms_) {
            if (term.varying()) {
                d.noalias() += (term.profile(t) - term.profile(s)) * term.matrix;
            }
        }
        return d;
    }

    /// Operator A(t) on H in coordinates: G_H^{-1} A_form(t).
    [[nodiscard]] MatrixXd operator_h(double t) const { return gp_.chol_h().solve(form_at(t)); }

    [[nodiscard]] bool is_autonomous() const {
        return std::none_of(terms_.begin(), terms_.end(), [](const FormTerm& x) { return x.varying(); });
    }

    [[nodiscard]] bool is_symmetric() const {
        return std::all_of(terms_.begin(), terms_.end(),
                           [](const FormTerm& x) { return x.matrix == x.matrix.transpose(); });
    }

private:
    GramPair gp_;
    double tau_;
    double delta_shift_;
    std::vector<FormTerm> terms_;
};

/// Family with A_form(t) + mu G_H. Differences (and therefore the modulus) are
/// unchanged; the coercivity shift needed drops by mu.
inline FormFamily shift(const FormFamily& ff, double mu) {
    if (!(mu >= 0.0)) {
        throw InvalidInput("shift mu must be nonnegative");
    }
    if (mu == 0.0) {
        return ff;
    }
    auto terms = ff.terms();
    terms.push_back(FormTerm{mu * ff.gram().gram_h(), {}, "shift"});
    return FormFamily(ff.gram(), ff.tau(), std::move(terms), ff.delta_shift() + mu);
}

struct FormBounds {
    double M = 0.0;
    double alpha1 = 0.0;
    double delta = 0.0;
};

inline std::vector<double> uniform_times(double tau, int points) {
    std::vector<double> t(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        t[static_cast<std::size_t>(i)] = tau * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return t;
}

/// Certified constants for uniform boundedness and quasi-coercivity over t_grid.
inline FormBounds certify_bounds(const FormFamily& ff, const std::vector<double>& t_grid) {
    if (t_grid.empty()) {
        throw InvalidInput("certify_bounds: empty time grid");
    }
    const auto& gp = ff.gram();
    const MatrixXd lower = gp.chol_v().matrixL();
    auto congruence = [&](const MatrixXd& x) {
        // L^{-1} X L^{-T}
        const MatrixXd left = lower.triangularView<Eigen::Lower>().solve(x);
        return MatrixXd(lower.triangularView<Eigen::Lower>().solve(left.transpose()).transpose());
    };
    const MatrixXd h_pencil = congruence(gp.gram_h());

    FormBounds out;
    std::vector<MatrixXd> sym_parts;
    sym_parts.reserve(t_grid.size());
    for (double t : t_grid) {
        if (t < -1e-14 || t > ff.tau() * (1.0 + 1e-12)) {
            throw InvalidInput("certify_bounds: time outside [0, tau]");
        }
        const MatrixXd a = congruence(ff.form_at(t));
        Eigen::JacobiSVD<MatrixXd> svd(a);
        out.M = std::max(out.M, svd.singularValues()(0));
        sym_parts.emplace_back(0.5 * (a + a.transpose()));
    }

    auto alpha_for = [&](double delta) {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto& s : sym_parts) {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(s + delta * h_pencil, Eigen::EigenvaluesOnly);
            lo = std::min(lo, es.eigenvalues()(0));
        }
        return lo;
    };

    double delta = 0.0;
    while (delta <= 1e6) {
        const double a1 = alpha_for(delta);
        if (a1 >= 1e-8) {
            out.alpha1 = a1;
            out.delta = delta;
            return out;
        }
        delta = (delta == 0.0) ? 1.0 : 2.0 * delta;
    }
    std::ostringstream os;
    os << "form family is not quasi-coercive: no alpha_1 >= 1e-8 found with delta <= 1e6 (alpha_1 at delta="
       << delta / 2.0 << " is " << alpha_for(delta / 2.0) << ")";
    throw NumericalFailure(os.str());
}

struct ModulusCertificate {
    double beta = 0.0;
    double gamma = 0.0;
    std::vector<std::pair<double, double>> samples; // (h, omega_hat(h)), h ascending, envelope applied
    double holder_alpha = 0.0;
    double holder_C = 0.0;
    double r_squared = 1.0;
    bool fit_accepted = true;
};

/// Uniform 64-point gaps (multiples of tau/63) merged with dyadic gaps tau 2^{-k}, k <= 10.
inline std::vector<double> default_modulus_gaps(double tau) {
    std::vector<double> h;
    for (int g = 1; g <= 63; ++g) {
        h.push_back(tau * g / 63.0);
    }
    for (int k = 0; k <= 10; ++k) {
        h.push_back(tau * std::ldexp(1.0, -k));
    }
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }), h.end());
    return h;
}

/// Least-squares fit log omega = log C + alpha log h over the positive samples.
inline void fit_holder(ModulusCertificate& cert) {
    std::vector<std::pair<double, double>> pts;
    for (auto [h, w] : cert.samples) {
        if (h > 0.0 && w > 0.0) {
            pts.emplace_back(std::log(h), std::log(w));
        }
    }
    if (pts.size() < 2) {
        cert.holder_alpha = 0.0;
        cert.holder_C = pts.empty() ? 0.0 : std::exp(pts.front().second);
        cert.r_squared = 1.0;
        cert.fit_accepted = pts.empty();
        return;
    }
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    const double slope = sxy / sxx;
    cert.holder_alpha = slope;
    cert.holder_C = std::exp(my - slope * mx);
    cert.r_squared = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    cert.fit_accepted = cert.r_squared >= 0.9;
}

inline ModulusCertificate estimate_modulus(const FormFamily& ff, const SpectralScale& scale, double beta,
                                           double gamma, const std::vector<double>& h_grid) {
    if (h_grid.empty()) {
        throw InvalidInput("estimate_modulus: empty gap grid");
    }
    if (!(beta >= 0.0 && beta <= 1.0 && gamma >= 0.0 && gamma <= 1.0)) {
        throw InvalidInput("estimate_modulus: beta and gamma must lie in [0, 1]");
    }
    const double tau = ff.tau();
    const auto t_grid = uniform_times(tau, 64);

    std::vector<const FormTerm*> varying;
    for (const auto& term : ff.terms()) {
        if (term.varying()) {
            varying.push_back(&term);
        }
    }
    // single varying term: the norm is |d theta| times a fixed matrix norm
    double single_norm = 0.0;
    if (varying.size() == 1) {
        single_norm = scale.mixed_form_norm(varying.front()->matrix, beta, gamma);
    }
    const VectorXd left = scale.eigenvalues().array().pow(-0.5 * gamma).matrix();
    const VectorXd right = scale.eigenvalues().array().pow(-0.5 * beta).matrix();
    auto pair_norm = [&](double t, double s) {
        if (varying.empty()) {
            return 0.0;
        }
        if (varying.size() == 1) {
            return std::abs(varying.front()->profile(t) - varying.front()->profile(s)) * single_norm;
        }
        const MatrixXd m = left.asDiagonal() * (scale.eigenvectors().transpose() * ff.difference(t, s) *
                                                scale.eigenvectors()) *
                           right.asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.transpose() * m, Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    };

    std::vector<double> gaps = h_grid;
    std::sort(gaps.begin(), gaps.end());
    ModulusCertificate cert;
    cert.beta = beta;
    cert.gamma = gamma;
    double running = 0.0;
    for (double h : gaps) {
        if (!(h > 0.0) || h > tau * (1.0 + 1e-12)) {
            continue;
        }
        double best = 0.0;
        for (double t : t_grid) {
            if (t + h > tau * (1.0 + 1e-12)) {
                break;
            }
            best = std::max(best, pair_norm(std::min(t + h, tau), t));
        }
        running = std::max(running, best);
        cert.samples.emplace_back(h, running);
    }
    fit_holder(cert);
    return cert;
}

inline ModulusCertificate estimate_modulus(const FormFamily& ff, double beta, double gamma,
                                           const std::vector<double>& h_grid) {
    return estimate_modulus(ff, build_spectral_scale(ff.gram()), beta, gamma, h_grid);
}

} // namespace maxreg
