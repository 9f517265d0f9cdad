#pragma once

/*
 * Operators A(t) = G_H^{-1} A_form(t) on H, their semigroups, resolvents and
 * fractional powers.  In finite dimensions A(t) on H and its extension to V'
 * coincide as matrices; only the norms used to measure them differ.
 *
 * Two independent routes to matrix functions are provided:
 *   - expm() (Pade scaling and squaring) for the semigroup e^{-sA};
 *   - SpectralDecomposition, A W = W diag(lambda), used for fractional powers,
 *     the real-interpolation norm and the time-integral operators.
 */

#include "maxreg/errors.hpp"
#include "maxreg/form_family.hpp"
#include "maxreg/hilbert_core.hpp"
#include "maxreg/matrix_exp.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

namespace maxreg {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Eigendecomposition A = W diag(lambda) W^{-1}, eigenvalues sorted by real part.
class SpectralDecomposition {
public:
    SpectralDecomposition() = default;

    /// Symmetric form matrix: generalized self-adjoint problem A_form w = lambda G_H w.
    static SpectralDecomposition from_symmetric_form(const MatrixXd& a_form, const MatrixXd& gram_h) {
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(a_form, gram_h);
        if (es.info() != Eigen::Success) {
            throw NumericalFailure("generalized symmetric eigensolver did not converge");
        }
        SpectralDecomposition d;
        d.lambda_ = es.eigenvalues().cast<cplx>();
        d.w_ = es.eigenvectors().cast<cplx>();
        d.w_inv_ = (es.eigenvectors().transpose() * gram_h).cast<cplx>();
        d.real_ = true;
        return d;
    }

    /// General (possibly non-normal) matrix on H.
    static SpectralDecomposition from_matrix(const MatrixXd& a_h, double max_condition = 1e8) {
        Eigen::EigenSolver<MatrixXd> es(a_h);
        if (es.info() != Eigen::Success) {
            throw NumericalFailure("eigensolver did not converge");
        }
        const auto n = a_h.rows();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        const VectorXcd ev = es.eigenvalues();
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return ev(a).real() < ev(b).real(); });
        SpectralDecomposition d;
        d.lambda_.resize(n);
        d.w_.resize(n, n);
        const MatrixXcd vecs = es.eigenvectors();
        for (Eigen::Index i = 0; i < n; ++i) {
            d.lambda_(i) = ev(order[static_cast<std::size_t>(i)]);
            d.w_.col(i) = vecs.col(order[static_cast<std::size_t>(i)]).normalized();
        }
        Eigen::JacobiSVD<MatrixXcd> svd(d.w_);
        const auto& sv = svd.singularValues();
        const double cond = sv(0) / sv(n - 1);
        if (!(cond < max_condition)) {
            std::ostringstream os;
            os << "eigenvector basis is ill-conditioned (cond = " << cond << ")";
            throw NumericalFailure(os.str());
        }
        d.w_inv_ = d.w_.partialPivLu().inverse();
        d.real_ = false;
        return d;
    }

    /// Chooses the symmetric route when the form matrix is symmetric.
    static SpectralDecomposition of_form(const MatrixXd& a_form, const GramPair& gp) {
        if (a_form == a_form.transpose()) {
            return from_symmetric_form(a_form, gp.gram_h());
        }
        return from_matrix(gp.chol_h().solve(a_form));
    }

    [[nodiscard]] const VectorXcd& eigenvalues() const { return lambda_; }
    [[nodiscard]] const MatrixXcd& vectors() const { return w_; }
    [[nodiscard]] const MatrixXcd& inverse_vectors() const { return w_inv_; }
    [[nodiscard]] bool real_spectrum() const { return real_; }
    [[nodiscard]] Eigen::Index dim() const { return lambda_.size(); }

    /// Re( W diag(f(lambda)) W^{-1} x ).
    template <class F>
    [[nodiscard]] VectorXd apply(F&& f, const VectorXd& x) const {
        VectorXcd c = w_inv_ * x.cast<cplx>();
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            c(i) *= f(lambda_(i));
        }
        return (w_ * c).real();
    }

private:
    VectorXcd lambda_;
    MatrixXcd w_;
    MatrixXcd w_inv_;
    bool real_ = false;
};

/// A(t) on H at one instant, with a certified sector angle for its spectrum.
struct OperatorSlice {
    double t = 0.0;
    MatrixXd a_h;
    double sector_angle = 0.5 * std::numbers::pi;
};

/// Slice at time t; theta = arctan(M / alpha_1) + 0.1.
inline OperatorSlice make_slice(const FormFamily& ff, double t, const FormBounds& bounds) {
    if (!(bounds.alpha1 > 0.0)) {
        throw InvalidInput("make_slice: coercivity constant must be positive");
    }
    return OperatorSlice{t, ff.operator_h(t), std::atan(bounds.M / bounds.alpha1) + 0.1};
}

/// Largest |arg <A u, u>_H| over random complex vectors (numerical range probe).
inline double numerical_range_angle(const OperatorSlice& slice, const GramPair& gp, int samples,
                                    unsigned seed = 7) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const auto n = slice.a_h.rows();
    const MatrixXd a_form = gp.gram_h() * slice.a_h;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        VectorXcd u(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            u(i) = cplx(nd(rng), nd(rng));
        }
        const cplx q = u.dot(a_form.cast<cplx>() * u);
        worst = std::max(worst, std::abs(std::arg(q)));
    }
    return worst;
}

/// e^{-s A} x by scaling and squaring.
inline VectorXd semigroup_apply(const OperatorSlice& slice, double s, const VectorXd& x) {
    if (!(s >= 0.0)) {
        throw InvalidInput("semigroup_apply: time s must be nonnegative");
    }
    if (s == 0.0) {
        return x;
    }
    const MatrixXd e = expm(MatrixXd(-s * slice.a_h));
    return e * x;
}

namespace detail {

inline void require_outside_sector(const OperatorSlice& slice, cplx z) {
    if (std::abs(z) == 0.0 || std::abs(std::arg(z)) <= slice.sector_angle) {
        std::ostringstream os;
        os << "resolvent point z = " << z << " lies inside the sector |arg z| <= " << slice.sector_angle;
        throw InvalidInput(os.str());
    }
}

inline MatrixXcd resolvent_matrix(const MatrixXd& a_h, cplx z) {
    const auto n = a_h.rows();
    const MatrixXcd shifted = z * MatrixXcd::Identity(n, n) - a_h.cast<cplx>();
    Eigen::FullPivLU<MatrixXcd> lu(shifted);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
        Eigen::ComplexEigenSolver<MatrixXcd> es(a_h.cast<cplx>(), false);
        double dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            dist = std::min(dist, std::abs(z - es.eigenvalues()(i)));
        }
        std::ostringstream os;
        os << "resolvent system singular at z = " << z << " (distance to spectrum " << dist << ")";
        throw NumericalFailure(os.str());
    }
    return lu.inverse();
}

} // namespace detail

/// (z - A)^{-1} x for z outside the certified sector.
inline VectorXcd resolvent_apply(const OperatorSlice& slice, cplx z, const VectorXd& x) {
    detail::require_outside_sector(slice, z);
    return detail::resolvent_matrix(slice.a_h, z) * x.cast<cplx>();
}

/// sqrt|z| ||(z - A)^{-1} x||_V / ||x||_H, bounded by C_theta uniformly in z.
inline double resolvent_v_bound_ratio(const OperatorSlice& slice, const GramPair& gp, cplx z, const VectorXd& x) {
    const VectorXcd r = resolvent_apply(slice, z, x);
    return std::sqrt(std::abs(z)) * gp.norm_v_complex(r) / gp.norm_h(x);
}

struct ResolventDifference {
    double norm = 0.0;
    /// Exponent of |z| in the bound c_theta omega(|t-s|) / |z|^{1-(beta+gamma)/2}.
    double predicted_exponent = 0.0;
};

/// ||R(z, A(t)) - R(z, A(s))||_{B(H)}; sector_angle taken from certified bounds.
inline ResolventDifference resolvent_difference_norm(const FormFamily& ff, const FormBounds& bounds, double t,
                                                     double s, cplx z, double beta, double gamma) {
    const OperatorSlice st = make_slice(ff, t, bounds);
    const OperatorSlice ss = make_slice(ff, s, bounds);
    detail::require_outside_sector(st, z);
    ResolventDifference out;
    out.predicted_exponent = -(1.0 - 0.5 * (beta + gamma));
    if (t == s || ff.is_autonomous()) {
        return out;
    }
    const MatrixXcd diff = detail::resolvent_matrix(st.a_h, z) - detail::resolvent_matrix(ss.a_h, z);
    out.norm = ff.gram().operator_norm_h(diff);
    return out;
}

inline ResolventDifference resolvent_difference_norm(const FormFamily& ff, double t, double s, cplx z, double beta,
                                                     double gamma) {
    return resolvent_difference_norm(ff, certify_bounds(ff, {t, s}), t, s, z, beta, gamma);
}

/// A^theta x (principal branch) for theta in [0, 1].
inline VectorXd frac_power_apply(const OperatorSlice& slice, double theta, const VectorXd& x) {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw InvalidInput("frac_power_apply: theta must lie in [0, 1]");
    }
    if (theta == 0.0) {
        return x;
    }
    if (theta == 1.0) {
        return slice.a_h * x;
    }
    Eigen::ComplexEigenSolver<MatrixXcd> probe(slice.a_h.cast<cplx>(), false);
    for (Eigen::Index i = 0; i < probe.eigenvalues().size(); ++i) {
        const cplx l = probe.eigenvalues()(i);
        if (!(l.real() > 0.0) || std::abs(std::arg(l)) > slice.sector_angle + 1e-12) {
            std::ostringstream os;
            os << "frac_power_apply: operator is not sectorial and invertible (eigenvalue " << l << ")";
            throw InvalidInput(os.str());
        }
    }
    try {
        const auto dec = SpectralDecomposition::from_matrix(slice.a_h, 1e6);
        return dec.apply([theta](cplx l) { return std::pow(l, theta); }, x);
    } catch (const NumericalFailure&) {
        // Schur-Pade route for defective or badly conditioned eigenbases
        Eigen::MatrixPower<MatrixXd> power(slice.a_h);
        return power(theta) * x;
    }
}

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(order), 0.0);
    weights.assign(static_cast<std::size_t>(order), 0.0);
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace detail

/// Discrete norm ||u0||_H + ( int_0^tau ||A e^{-tA} u0||_H^p dt )^{1/p}.
///
/// The integral uses 4-point Gauss-Legendre panels on the geometric grid
/// t_i = tau 0.7^i, i = 0..199 (the remainder below tau 0.7^199 is dropped).
inline double real_interp_norm(const VectorXd& u0, const OperatorSlice& slice0, const GramPair& gp, double p,
                               double tau, double ratio = 0.7, int nodes = 200) {
    if (!(p > 1.0)) {
        throw InvalidInput("real_interp_norm: p must exceed 1");
    }
    if (u0.isZero(0.0)) {
        return 0.0;
    }
    const auto dec = SpectralDecomposition::from_matrix(slice0.a_h);
    for (Eigen::Index i = 0; i < dec.dim(); ++i) {
        if (!(dec.eigenvalues()(i).real() > 0.0)) {
            throw InvalidInput("real_interp_norm: A(0) must be invertible and accretive");
        }
    }
    std::vector<double> gx, gw;
    detail::gauss_legendre(4, gx, gw);
    const VectorXcd coeff = dec.inverse_vectors() * u0.cast<cplx>();
    double integral = 0.0;
    for (int i = 0; i + 1 < nodes; ++i) {
        const double hi = tau * std::pow(ratio, i);
        const double lo = tau * std::pow(ratio, i + 1);
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double t = mid + half * gx[q];
            VectorXcd c = coeff;
            for (Eigen::Index k = 0; k < c.size(); ++k) {
                const cplx l = dec.eigenvalues()(k);
                c(k) *= l * std::exp(-t * l);
            }
            const VectorXd v = (dec.vectors() * c).real();
            integral += half * gw[q] * std::pow(gp.norm_h(v), p);
        }
    }
    return gp.norm_h(u0) + std::pow(integral, 1.0 / p);
}

} // namespace maxreg
