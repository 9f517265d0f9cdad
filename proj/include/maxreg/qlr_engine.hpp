#pragma once

/*
 * The three time-integral operators of the representation
 *
 *   A(t)u(t) = (Q A(.)u(.))(t) + (Lf)(t) + (R u0)(t)
 *
 *   (Lf)(t)  = A(t) int_0^t e^{-(t-s)A(t)} f(s) ds
 *   (R u0)(t) = A(t) e^{-tA(t)} u0
 *   (Qg)(t)  = int_0^t A(t) e^{-(t-s)A(t)} (A(t) - A(s)) A(s)^{-1} g(s) ds
 *
 * evaluated on a time grid, and the Volterra solve (I - Q)h = Lf + R u0.
 *
 * Everything at node t_k is done in the eigenbasis of A(t_k) = W diag(lambda) W^{-1}.
 * L and R are exact for piecewise-linear data.  For Q the varying part
 * A(t) - A(s) = sum_i (theta_i(t) - theta_i(s)) G_H^{-1} M_i splits the kernel into
 * scalar weights per eigenmode,
 *
 *   c_l(t_k, j) = int lambda_l e^{-lambda_l (t_k - s)} (theta_i(t_k) - theta_i(s)) hat_j(s) ds,
 *
 * against the hat functions of the piecewise-linear interpolant of A(s)^{-1} g(s).
 * These are precomputed once per grid: Gauss-Legendre on the earlier intervals, a
 * mesh graded geometrically toward s = t_k on the last one, and on the final tiny
 * panel product integration of r^{alpha - 1 - gamma/2} against a frozen kernel.
 * Modes with Re(lambda) (t_k - s) > 45 are dropped (e^{-45} < 3e-20).
 *
 * An engine built with fitting rate nu treats its data as e^{-nu s} times a
 * piecewise-linear function instead of piecewise linear. The solver uses this for
 * the family shifted by mu = nu, whose solution is e^{-mu t} u(t); the shifted and
 * unshifted discrete systems are then conjugate and give the same u.
 */

#include "maxreg/errors.hpp"
#include "maxreg/form_family.hpp"
#include "maxreg/grid_function.hpp"
#include "maxreg/hilbert_core.hpp"
#include "maxreg/operator_calculus.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

namespace maxreg {

struct QuadratureSpec {
    int panels_per_interval = 1;
    double grading_ratio = 0.5;
    int gauss_order = 6;
    /// Power of (t - s) in the kernel bound, 1 + gamma/2.
    double singular_exponent = 1.0;
    /// Exponent of a power-law modulus omega(h) = C h^alpha; NaN selects adaptive quadrature.
    double modulus_alpha = std::numeric_limits<double>::quiet_NaN();

    void validate() const {
        if (panels_per_interval < 1 || gauss_order < 1 || gauss_order > 64) {
            throw InvalidInput("quadrature: panels_per_interval >= 1 and 1 <= gauss_order <= 64 required");
        }
        if (!(grading_ratio > 0.0 && grading_ratio < 1.0)) {
            throw InvalidInput("quadrature: grading_ratio must lie in (0, 1)");
        }
        if (!(singular_exponent >= 1.0 && singular_exponent <= 1.5)) {
            throw InvalidInput("quadrature: singular_exponent must lie in [1, 1.5]");
        }
        if (!std::isnan(modulus_alpha)) {
            if (!(modulus_alpha > 0.0)) {
                throw InvalidInput("quadrature: modulus_alpha must be positive");
            }
            const double half_gamma = singular_exponent - 1.0;
            if (!(modulus_alpha > half_gamma)) {
                std::ostringstream os;
                os << "Dini condition fails: modulus exponent alpha = " << modulus_alpha
                   << " must exceed gamma/2 = " << half_gamma;
                throw DiniViolation(os.str());
            }
        }
    }
};

namespace detail {

/// e^z - 1 without cancellation for small |z|.
inline cplx expm1(cplx z) {
    const double x = z.real(), y = z.imag();
    const double s = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
}

/// int_0^1 e^{-z(1-u)} du = (1 - e^{-z}) / z.
inline cplx phi1(cplx z) {
    if (std::abs(z) < 1e-12) {
        return 1.0 - 0.5 * z;
    }
    return -expm1(-z) / z;
}

/// int_0^1 u e^{-z(1-u)} du = (z - 1 + e^{-z}) / z^2.
inline cplx phi2(cplx z) {
    if (std::abs(z) < 1e-2) {
        return 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 + z * z * z * z / 720.0 -
               z * z * z * z * z / 5040.0;
    }
    return (z + expm1(-z)) / (z * z);
}

/// Complex matrix kept as separate real and imaginary parts so products with
/// real vectors stay in real arithmetic.
struct SplitMatrix {
    MatrixXd re;
    MatrixXd im;
    bool real = false;

    SplitMatrix() = default;
    explicit SplitMatrix(const MatrixXcd& m) : re(m.real()), im(m.imag()), real(m.imag().isZero(0.0)) {}

    /// First `rows` rows times a real vector.
    [[nodiscard]] VectorXcd top_times(Eigen::Index rows, const VectorXd& x) const {
        VectorXcd out(rows);
        const VectorXd r = re.topRows(rows) * x;
        if (real) {
            out = r.cast<cplx>();
        } else {
            const VectorXd i = im.topRows(rows) * x;
            out.real() = r;
            out.imag() = i;
        }
        return out;
    }

    /// Re( (first `rows` rows)^T z ).
    [[nodiscard]] VectorXd top_transpose_times_re(Eigen::Index rows, const VectorXcd& z) const {
        VectorXd out = re.topRows(rows).transpose() * z.real();
        if (!real) {
            out.noalias() -= im.topRows(rows).transpose() * z.imag();
        }
        return out;
    }
};

} // namespace detail

/// Per-grid cache of eigendecompositions and Q weights for one form family.
class QlrEngine {
public:
    static constexpr double mode_cutoff = 45.0;

    QlrEngine(const FormFamily& ff, std::vector<double> grid, QuadratureSpec quad, double fit = 0.0)
        : ff_(ff), grid_(std::move(grid)), quad_(quad), fit_(fit) {
        validate_grid(grid_);
        quad_.validate();
        if (!(fit_ >= 0.0) || fit_ * grid_.back() > 600.0) {
            throw InvalidInput("fitting rate must lie in [0, 600 / tau]");
        }
        if (grid_.back() > ff_.tau() * (1.0 + 1e-12)) {
            throw InvalidInput("time grid extends beyond the family horizon tau");
        }
        const auto& gp = ff_.gram();
        const auto n = ff_.dim();
        for (const auto& term : ff_.terms()) {
            if (term.varying()) {
                varying_.push_back(&term);
                op_terms_.emplace_back(gp.chol_h().solve(term.matrix));
            }
        }
        nodes_.reserve(grid_.size());
        for (double t : grid_) {
            Node node;
            node.dec = SpectralDecomposition::of_form(ff_.form_at(t), gp);
            const auto& lam = node.dec.eigenvalues();
            for (Eigen::Index l = 0; l < n; ++l) {
                if (!(std::abs(lam(l)) > 1e-13 * std::max(1.0, lam.cwiseAbs().maxCoeff()))) {
                    std::ostringstream os;
                    os << "A(t) is singular at t = " << t << "; apply a shift so every A(s) is invertible";
                    throw InvalidInput(os.str());
                }
            }
            node.w = detail::SplitMatrix(node.dec.vectors());
            node.w_inv = detail::SplitMatrix(node.dec.inverse_vectors());
            for (const auto& p : op_terms_) {
                node.v.emplace_back(MatrixXcd(node.dec.inverse_vectors() * p.cast<cplx>()));
            }
            nodes_.push_back(std::move(node));
        }
    }

    [[nodiscard]] const FormFamily& family() const { return ff_; }
    [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
    [[nodiscard]] const QuadratureSpec& quadrature() const { return quad_; }
    [[nodiscard]] double fitting_rate() const { return fit_; }
    [[nodiscard]] Eigen::Index dim() const { return ff_.dim(); }
    [[nodiscard]] Eigen::Index nodes() const { return static_cast<Eigen::Index>(grid_.size()); }
    [[nodiscard]] const SpectralDecomposition& spectrum(Eigen::Index k) const { return nodes_[idx(k)].dec; }

    /// A(t_k)^{-1} x.
    [[nodiscard]] VectorXd solve_at(Eigen::Index k, const VectorXd& x) const {
        return spectrum(k).apply([](cplx l) { return 1.0 / l; }, x);
    }

    /// A(t_k) int_0^{t_k} e^{-(t_k - s)A(t_k)} e^{-nu s} f(s) ds for piecewise-linear f,
    /// integrated exactly per eigenmode.
    [[nodiscard]] GridFunction apply_L(const GridFunction& f) const {
        check(f);
        GridFunction out = f;
        out.exclude_origin = false;
        out.values.setZero();
        for (Eigen::Index k = 1; k < nodes(); ++k) {
            const Node& node = nodes_[idx(k)];
            const auto& lam = node.dec.eigenvalues();
            const double tk = grid_[idx(k)];
            VectorXcd acc = VectorXcd::Zero(dim());
            for (Eigen::Index j = 0; j < k; ++j) {
                const double dist = tk - grid_[idx(j + 1)];
                const double dt = grid_[idx(j + 1)] - grid_[idx(j)];
                const Eigen::Index r = active_modes(lam, dist);
                if (r == 0) {
                    continue;
                }
                const VectorXcd c0 = node.w_inv.top_times(r, f.values.col(j));
                const VectorXcd c1 = node.w_inv.top_times(r, f.values.col(j + 1));
                for (Eigen::Index l = 0; l < r; ++l) {
                    const cplx z = (lam(l) - fit_) * dt;
                    const cplx decay = dist > 0.0 ? std::exp(-dist * (lam(l) - fit_)) : cplx(1.0);
                    const cplx p1 = detail::phi1(z), p2 = detail::phi2(z);
                    acc(l) += decay * dt * ((p1 - p2) * c0(l) + p2 * c1(l));
                }
            }
            for (Eigen::Index l = 0; l < dim(); ++l) {
                acc(l) *= lam(l) * std::exp(-fit_ * tk);
            }
            out.values.col(k) = reconstruct(node, acc);
        }
        return out;
    }

    /// A(t_k) e^{-t_k A(t_k)} u0; node 0 stores A(0) u0 and is given zero weight.
    [[nodiscard]] GridFunction apply_R(const VectorXd& u0, double p = 2.0) const {
        if (u0.size() != dim()) {
            throw InvalidInput("apply_R: initial value has wrong dimension");
        }
        GridFunction out;
        out.grid = grid_;
        out.p = p;
        out.exclude_origin = true;
        out.values.resize(dim(), nodes());
        for (Eigen::Index k = 0; k < nodes(); ++k) {
            const double tk = grid_[idx(k)];
            out.values.col(k) = spectrum(k).apply([tk](cplx l) { return l * std::exp(-tk * l); }, u0);
        }
        return out;
    }

    [[nodiscard]] GridFunction apply_Q(const GridFunction& g) const {
        check(g);
        ensure_weights();
        GridFunction out = g;
        out.exclude_origin = false;
        out.values.setZero();
        if (varying_.empty()) {
            return out;
        }
        const auto n = dim();
        MatrixXd y(n, nodes());
        for (Eigen::Index j = 0; j < nodes(); ++j) {
            y.col(j) = solve_at(j, g.values.col(j));
        }
        for (Eigen::Index k = 1; k < nodes(); ++k) {
            const Node& node = nodes_[idx(k)];
            const NodeWeights& nw = weights_[idx(k)];
            VectorXcd acc = VectorXcd::Zero(n);
            for (std::size_t i = 0; i < varying_.size(); ++i) {
                const auto& vmat = node.v[i];
                const VectorXcd& data = nw.data[i];
                for (std::size_t c = 0; c < nw.rows.size(); ++c) {
                    const Eigen::Index r = nw.rows[c];
                    if (r == 0) {
                        continue;
                    }
                    const Eigen::Index col = nw.first_col + static_cast<Eigen::Index>(c);
                    acc.head(r) += data.segment(nw.offset[c], r).cwiseProduct(vmat.top_times(r, y.col(col)));
                }
            }
            out.values.col(k) = reconstruct(node, acc);
        }
        return out;
    }

    /// Adjoint of apply_Q for the trapezoid-weighted inner product sum_k w_k [x_k | y_k]_H.
    [[nodiscard]] GridFunction apply_Q_adjoint(const GridFunction& b) const {
        check(b);
        ensure_weights();
        GridFunction out = b;
        out.exclude_origin = false;
        out.values.setZero();
        if (varying_.empty()) {
            return out;
        }
        const auto n = dim();
        const auto w = trapezoid_weights(grid_);
        const MatrixXd& gh = ff_.gram().gram_h();
        MatrixXd x = MatrixXd::Zero(n, nodes());
        for (Eigen::Index k = 1; k < nodes(); ++k) {
            const Node& node = nodes_[idx(k)];
            const NodeWeights& nw = weights_[idx(k)];
            const VectorXd gb = w[idx(k)] * (gh * b.values.col(k));
            // W_k^T G_H b_k w_k
            VectorXcd beta(n);
            beta.real() = node.w.re.transpose() * gb;
            beta.imag() = node.w.real ? VectorXd::Zero(n) : VectorXd(node.w.im.transpose() * gb);
            for (std::size_t i = 0; i < varying_.size(); ++i) {
                const auto& vmat = node.v[i];
                const VectorXcd& data = nw.data[i];
                for (std::size_t c = 0; c < nw.rows.size(); ++c) {
                    const Eigen::Index r = nw.rows[c];
                    if (r == 0) {
                        continue;
                    }
                    const Eigen::Index col = nw.first_col + static_cast<Eigen::Index>(c);
                    const VectorXcd e = data.segment(nw.offset[c], r).cwiseProduct(beta.head(r));
                    x.col(col) += vmat.top_transpose_times_re(r, e);
                }
            }
        }
        for (Eigen::Index j = 0; j < nodes(); ++j) {
            // (1/w_j) G_H^{-1} A_j^{-T} x_j with A^{-T} = W^{-T} diag(1/lambda) W^T
            const Node& node = nodes_[idx(j)];
            const auto& lam = node.dec.eigenvalues();
            VectorXcd c = node.dec.vectors().transpose() * x.col(j).cast<cplx>();
            for (Eigen::Index l = 0; l < n; ++l) {
                c(l) /= lam(l);
            }
            const VectorXd ainv_t = (node.dec.inverse_vectors().transpose() * c).real();
            out.values.col(j) = ff_.gram().chol_h().solve(ainv_t) / w[idx(j)];
        }
        return out;
    }

private:
    struct Node {
        SpectralDecomposition dec;
        detail::SplitMatrix w;
        detail::SplitMatrix w_inv;
        std::vector<detail::SplitMatrix> v; // W^{-1} G_H^{-1} M_i per varying term
    };

    /// Weights against columns first_col..k; column c uses its leading rows[c] modes.
    struct NodeWeights {
        Eigen::Index first_col = 0;
        std::vector<Eigen::Index> rows;
        std::vector<Eigen::Index> offset;
        std::vector<VectorXcd> data; // per varying term
    };

    static std::size_t idx(Eigen::Index k) { return static_cast<std::size_t>(k); }

    void check(const GridFunction& g) const {
        validate(g);
        if (g.grid != grid_ || g.dim() != dim()) {
            throw InvalidInput("grid function does not live on the engine grid");
        }
    }

    /// Leading modes (by real part) with Re(lambda - nu) dist <= cutoff.
    [[nodiscard]] Eigen::Index active_modes(const VectorXcd& lam, double dist) const {
        Eigen::Index r = 0;
        while (r < lam.size() && (lam(r).real() - fit_) * dist <= mode_cutoff) {
            ++r;
        }
        return r;
    }

    static VectorXd reconstruct(const Node& node, const VectorXcd& acc) {
        VectorXd out = node.w.re * acc.real();
        if (!(node.w.real && acc.imag().isZero(0.0))) {
            out.noalias() -= node.w.im * acc.imag();
        }
        return out;
    }

    void ensure_weights() const {
        if (!weights_.empty() || varying_.empty()) {
            return;
        }
        detail::gauss_legendre(quad_.gauss_order, gx_, gw_);
        weights_.resize(grid_.size());
        for (Eigen::Index k = 1; k < nodes(); ++k) {
            weights_[idx(k)] = build_weights(k);
        }
    }

    NodeWeights build_weights(Eigen::Index k) const {
        const auto n = dim();
        const auto terms = varying_.size();
        const auto& lam = nodes_[idx(k)].dec.eigenvalues();
        const double tk = grid_[idx(k)];
        std::vector<double> theta_k(terms);
        for (std::size_t i = 0; i < terms; ++i) {
            theta_k[i] = varying_[i]->profile(tk);
        }

        std::vector<Eigen::Index> ranks(idx(k));
        for (Eigen::Index j = 0; j < k; ++j) {
            ranks[idx(j)] = active_modes(lam, tk - grid_[idx(j + 1)]);
        }
        NodeWeights nw;
        nw.first_col = k;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (ranks[idx(j)] > 0) {
                nw.first_col = j;
                break;
            }
        }
        Eigen::Index total = 0;
        for (Eigen::Index c = nw.first_col; c <= k; ++c) {
            const Eigen::Index r = std::max(c < k ? ranks[idx(c)] : Eigen::Index{0},
                                            c > 0 ? ranks[idx(c - 1)] : Eigen::Index{0});
            nw.rows.push_back(r);
            nw.offset.push_back(total);
            total += r;
        }
        nw.data.assign(terms, VectorXcd::Zero(total));

        // columns 0..r-1 hold the left-hat weights, r..2r-1 the right-hat, per term
        VectorXcd decay(n);
        auto add_point = [&](double s, double weight, Eigen::Index j, Eigen::Index r, MatrixXcd& acc) {
            const double dist = tk - s;
            const double h = grid_[idx(j + 1)] - grid_[idx(j)];
            // fitted hats e^{-nu (s - t_j)} (1 - x) and e^{nu (t_{j+1} - s)} x; the common
            // factor e^{-nu dist} is folded into the mode decay
            const double right = (s - grid_[idx(j)]) / h * std::exp(-fit_ * (tk - grid_[idx(j + 1)]));
            const double left = (1.0 - (s - grid_[idx(j)]) / h) * std::exp(-fit_ * (tk - grid_[idx(j)]));
            for (Eigen::Index l = 0; l < r; ++l) {
                decay(l) = lam(l) * std::exp(-dist * (lam(l) - fit_)) * weight;
            }
            for (std::size_t i = 0; i < terms; ++i) {
                const double dtheta = theta_k[i] - varying_[i]->profile(s);
                if (dtheta == 0.0) {
                    continue;
                }
                const auto col = static_cast<Eigen::Index>(2 * i);
                acc.col(col).head(r) += (dtheta * left) * decay.head(r);
                acc.col(col + 1).head(r) += (dtheta * right) * decay.head(r);
            }
        };
        auto plain_panel = [&](double a, double b, Eigen::Index j, Eigen::Index r, MatrixXcd& acc) {
            const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            for (std::size_t q = 0; q < gx_.size(); ++q) {
                add_point(mid + half * gx_[q], half * gw_[q], j, r, acc);
            }
        };
        // profiles such as t^alpha are not smooth at s = 0: grade panels touching the origin
        auto gauss_panel = [&](double a, double b, Eigen::Index j, Eigen::Index r, MatrixXcd& acc) {
            if (a != grid_.front()) {
                plain_panel(a, b, j, r, acc);
                return;
            }
            const double rho = quad_.grading_ratio;
            const int levels = std::min(400, static_cast<int>(std::ceil(std::log(1e-12) / std::log(rho))));
            for (int m = 0; m < levels; ++m) {
                plain_panel(a + (b - a) * std::pow(rho, m + 1), a + (b - a) * std::pow(rho, m), j, r, acc);
            }
            plain_panel(a, a + (b - a) * std::pow(rho, levels), j, r, acc);
        };

        for (Eigen::Index j = nw.first_col; j < k; ++j) {
            const Eigen::Index r = ranks[idx(j)];
            if (r == 0) {
                continue;
            }
            MatrixXcd acc = MatrixXcd::Zero(r, static_cast<Eigen::Index>(2 * terms));
            const double a = grid_[idx(j)], b = grid_[idx(j + 1)];
            if (j + 1 < k) {
                const int m = quad_.panels_per_interval;
                for (int p = 0; p < m; ++p) {
                    gauss_panel(a + (b - a) * p / m, a + (b - a) * (p + 1) / m, j, r, acc);
                }
            } else {
                last_interval(a, b, lam, j, r, acc, gauss_panel, add_point);
            }
            for (std::size_t i = 0; i < terms; ++i) {
                const auto c_left = static_cast<std::size_t>(j - nw.first_col);
                nw.data[i].segment(nw.offset[c_left], r) += acc.col(static_cast<Eigen::Index>(2 * i));
                nw.data[i].segment(nw.offset[c_left + 1], r) += acc.col(static_cast<Eigen::Index>(2 * i + 1));
            }
        }
        return nw;
    }

    /// Interval ending at t_k = b: geometric panels toward b, then the singular panel.
    template <class Panel, class Point>
    void last_interval(double a, double b, const VectorXcd& lam, Eigen::Index j, Eigen::Index r, MatrixXcd& acc,
                       Panel& gauss_panel, Point& add_point) const {
        const double h = b - a;
        const double rho = quad_.grading_ratio;
        const double lam_max = std::max(1.0, lam.cwiseAbs().maxCoeff());
        const double target = std::max(1e-3 / lam_max, h * 1e-14);
        int levels = 1;
        while (levels < 200 && h * std::pow(rho, levels) > target) {
            ++levels;
        }
        for (int m = 0; m < levels; ++m) {
            gauss_panel(b - h * std::pow(rho, m), b - h * std::pow(rho, m + 1), j, r, acc);
        }
        const double eps = h * std::pow(rho, levels);
        if (!std::isnan(quad_.modulus_alpha)) {
            // int_0^eps r^{alpha - e} dr against the kernel frozen at eps/2
            const double x = quad_.modulus_alpha - quad_.singular_exponent;
            const double moment = std::pow(eps, x + 1.0) / (x + 1.0);
            const double rm = 0.5 * eps;
            add_point(b - rm, moment / std::pow(rm, x), j, r, acc);
            return;
        }
        adaptive_panel(b - eps, b, j, r, acc, gauss_panel, 0);
    }

    template <class Panel>
    void adaptive_panel(double a, double b, Eigen::Index j, Eigen::Index r, MatrixXcd& acc, Panel& gauss_panel,
                        int depth) const {
        MatrixXcd whole = MatrixXcd::Zero(acc.rows(), acc.cols());
        MatrixXcd halves = whole;
        const double mid = 0.5 * (a + b);
        gauss_panel(a, b, j, r, whole);
        gauss_panel(a, mid, j, r, halves);
        gauss_panel(mid, b, j, r, halves);
        if (depth >= 40 || (whole - halves).cwiseAbs().maxCoeff() <= 1e-9) {
            acc += halves;
            return;
        }
        adaptive_panel(a, mid, j, r, acc, gauss_panel, depth + 1);
        adaptive_panel(mid, b, j, r, acc, gauss_panel, depth + 1);
    }

    FormFamily ff_;
    std::vector<double> grid_;
    QuadratureSpec quad_;
    double fit_ = 0.0;
    std::vector<const FormTerm*> varying_;
    std::vector<MatrixXd> op_terms_;
    std::vector<Node> nodes_;
    mutable std::vector<NodeWeights> weights_;
    mutable std::vector<double> gx_, gw_;
};

inline GridFunction apply_L(const FormFamily& ff, const GridFunction& f, const QuadratureSpec& quad = {}) {
    return QlrEngine(ff, f.grid, quad).apply_L(f);
}

inline GridFunction apply_R(const FormFamily& ff, const VectorXd& u0, const std::vector<double>& grid,
                            double p = 2.0) {
    return QlrEngine(ff, grid, {}).apply_R(u0, p);
}

inline GridFunction apply_Q(const FormFamily& ff, const GridFunction& g, const QuadratureSpec& quad = {}) {
    return QlrEngine(ff, g.grid, quad).apply_Q(g);
}

struct RepresentationSolution {
    GridFunction u;
    GridFunction u_prime;
    GridFunction Au;
    int neumann_iters = 0;
    std::vector<double> residuals;
};

/// Solves (I - Q)h = Lf + R u0 for the family shifted by mu and undoes the shift:
/// v = e^{-mu t} u solves v' + (A + mu)v = e^{-mu t} f.
inline RepresentationSolution solve_representation(const FormFamily& ff, const GridFunction& f, const VectorXd& u0,
                                                   const QuadratureSpec& quad = {}, double mu = 0.0,
                                                   int max_iters = 200, double tol = 1e-10) {
    validate(f);
    if (!(mu >= 0.0)) {
        throw InvalidInput("solve_representation: shift mu must be nonnegative");
    }
    if (mu * f.grid.back() > 600.0) {
        throw InvalidInput("solve_representation: mu * tau > 600 overflows the back-transformation");
    }
    const QlrEngine engine(shift(ff, mu), f.grid, quad, mu);
    GridFunction rhs = engine.apply_L(f);
    const bool has_u0 = !u0.isZero(0.0);
    if (has_u0) {
        rhs.values += engine.apply_R(u0, f.p).values;
    }

    RepresentationSolution out;
    GridFunction h = rhs;
    for (int it = 1;; ++it) {
        GridFunction next = engine.apply_Q(h);
        next.values += rhs.values;
        const double scale = std::max(next.values.norm(), std::numeric_limits<double>::min());
        const double update = (next.values - h.values).norm() / scale;
        out.residuals.push_back(update);
        h = std::move(next);
        out.neumann_iters = it;
        if (!(update >= tol) || h.values.isZero(0.0)) {
            if (!std::isfinite(update)) {
                throw NumericalFailure("Neumann iteration produced non-finite values");
            }
            break;
        }
        if (it >= max_iters) {
            std::ostringstream os;
            os << "Neumann iteration did not reach relative update " << tol << " in " << max_iters
               << " iterations; residuals:";
            for (double r : out.residuals) {
                os << ' ' << r;
            }
            throw NumericalFailure(os.str());
        }
    }

    out.u = h;
    out.Au = h;
    out.u_prime = h;
    for (GridFunction* g : {&out.u, &out.Au, &out.u_prime}) {
        g->p = f.p;
        g->exclude_origin = has_u0;
    }
    out.u.exclude_origin = false;
    for (Eigen::Index k = 0; k < f.nodes(); ++k) {
        const double grow = std::exp(mu * f.grid[static_cast<std::size_t>(k)]);
        const VectorXd v = engine.solve_at(k, h.values.col(k));
        out.u.values.col(k) = grow * v;
        out.Au.values.col(k) = grow * (h.values.col(k) - mu * v);
        out.u_prime.values.col(k) = f.values.col(k) - out.Au.values.col(k);
    }
    return out;
}

struct QNormEstimate {
    /// Largest observed ||Qg||_p / ||g||_p: a lower bound for the operator norm.
    double value = 0.0;
    int probes = 0;
};

/// Lower bound for ||Q||_{L_p -> L_p} on the grid: random probes, then power
/// iteration with the duality maps of L_p(H) and L_{p'}(H).
inline QNormEstimate q_norm_estimate(const QlrEngine& engine, double p, int random_probes = 50,
                                     int power_steps = 5, unsigned seed = 12345) {
    if (!(p > 1.0) || std::isinf(p)) {
        throw InvalidInput("q_norm_estimate: p must be finite and exceed 1");
    }
    const auto& gp = engine.family().gram();
    const auto n = engine.dim();
    const auto K = engine.nodes();
    QNormEstimate est;
    auto make = [&](MatrixXd v) {
        GridFunction g;
        g.grid = engine.grid();
        g.p = p;
        g.values = std::move(v);
        return g;
    };
    auto normalize = [&](GridFunction& g) {
        const double nrm = lp_norm(g, gp);
        if (nrm > 0.0) {
            g.values /= nrm;
        }
        return nrm;
    };
    // g_k -> ||g_k||_H^{q-2} g_k
    auto duality = [&](GridFunction& g, double q) {
        for (Eigen::Index k = 0; k < K; ++k) {
            const double nk = gp.norm_h(g.values.col(k));
            g.values.col(k) *= nk > 0.0 ? std::pow(nk, q - 2.0) : 0.0;
        }
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    GridFunction best = make(MatrixXd::Zero(n, K));
    for (int s = 0; s < random_probes; ++s) {
        GridFunction g = make(MatrixXd::NullaryExpr(n, K, [&]() { return nd(rng); }));
        if (normalize(g) == 0.0) {
            continue;
        }
        const double r = lp_norm(engine.apply_Q(g), gp);
        ++est.probes;
        if (r >= est.value) {
            est.value = r;
            best = g;
        }
    }
    if (est.value == 0.0) {
        return est;
    }
    const double q = p / (p - 1.0);
    GridFunction x = best;
    for (int s = 0; s < power_steps; ++s) {
        GridFunction y = engine.apply_Q(x);
        duality(y, p);
        x = engine.apply_Q_adjoint(y);
        duality(x, q);
        if (normalize(x) == 0.0) {
            break;
        }
        est.value = std::max(est.value, lp_norm(engine.apply_Q(x), gp));
        ++est.probes;
    }
    return est;
}

inline QNormEstimate q_norm_estimate(const FormFamily& ff, const std::vector<double>& grid, const QuadratureSpec& quad,
                                     double p, double mu) {
    if (!(mu >= 0.0)) {
        throw InvalidInput("q_norm_estimate: shift mu must be nonnegative");
    }
    return q_norm_estimate(QlrEngine(shift(ff, mu), grid, quad), p);
}

} // namespace maxreg
