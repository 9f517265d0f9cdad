#pragma once

/*
 * Finite-dimensional Gelfand triple V -> H -> V'.
 *
 * Both inner products live on one coordinate space R^n:
 *
 *   [u|v]_H = v^T G_H u,      (u|v)_V = v^T G_V u.
 *
 * The complex interpolation scale V_beta = [H, V]_beta of a Hilbert couple is
 * realised spectrally.  With the generalized eigenpairs
 *
 *   G_V phi_i = lambda_i G_H phi_i,   Phi^T G_H Phi = I,
 *
 * every u has scale coordinates c = Phi^T G_H u and
 *
 *   ||u||_{V_beta}^2 = sum_i lambda_i^beta |c_i|^2,
 *
 * which is exact at both endpoints (beta = 0 gives H, beta = 1 gives V).
 * Elements of V' are represented through the H pivot, w -> w^T G_H (.).
 */

#include "maxreg/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <string>

namespace maxreg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

inline void require_spd(const MatrixXd& g, const char* name) {
    if (g.rows() != g.cols() || g.rows() == 0) {
        std::ostringstream os;
        os << name << " must be a nonempty square matrix, got " << g.rows() << "x" << g.cols();
        throw InvalidInput(os.str());
    }
    const double scale = g.cwiseAbs().maxCoeff();
    const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || asym > 1e-12 * scale) {
        std::ostringstream os;
        os << name << " is not symmetric: max |G - G^T| = " << asym << " (scale " << scale << ")";
        throw InvalidInput(os.str());
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(g, Eigen::EigenvaluesOnly);
    const double smallest = es.eigenvalues()(0);
    if (!(smallest > 1e-14 * es.eigenvalues().cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << name << " is not positive definite: smallest eigenvalue " << smallest;
        throw InvalidInput(os.str());
    }
}

} // namespace detail

/// Pair of SPD Gram matrices encoding the H and V inner products on a shared
/// coordinate space. Immutable after construction.
class GramPair {
public:
    GramPair(MatrixXd gram_h, MatrixXd gram_v) : gh_(std::move(gram_h)), gv_(std::move(gram_v)) {
        detail::require_spd(gh_, "G_H");
        detail::require_spd(gv_, "G_V");
        if (gh_.rows() != gv_.rows()) {
            throw InvalidInput("G_H and G_V dimensions differ");
        }
        llt_h_.compute(gh_);
        llt_v_.compute(gv_);
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(gv_, gh_, Eigen::EigenvaluesOnly);
        embedding_ = 1.0 / std::sqrt(es.eigenvalues()(0));
    }

    [[nodiscard]] Eigen::Index dim() const { return gh_.rows(); }
    [[nodiscard]] const MatrixXd& gram_h() const { return gh_; }
    [[nodiscard]] const MatrixXd& gram_v() const { return gv_; }
    [[nodiscard]] const Eigen::LLT<MatrixXd>& chol_h() const { return llt_h_; }
    [[nodiscard]] const Eigen::LLT<MatrixXd>& chol_v() const { return llt_v_; }

    /// sup_u ||u||_H / ||u||_V.
    [[nodiscard]] double embedding_constant() const { return embedding_; }

    [[nodiscard]] double norm_h(const VectorXd& u) const { return std::sqrt(std::max(0.0, u.dot(gh_ * u))); }
    [[nodiscard]] double norm_v(const VectorXd& u) const { return std::sqrt(std::max(0.0, u.dot(gv_ * u))); }

    template <class Vec>
    [[nodiscard]] double norm_h_complex(const Vec& u) const {
        return std::sqrt(std::max(0.0, std::real(u.dot(gh_ * u))));
    }
    template <class Vec>
    [[nodiscard]] double norm_v_complex(const Vec& u) const {
        return std::sqrt(std::max(0.0, std::real(u.dot(gv_ * u))));
    }

    /// Operator norm on H of a matrix acting on coordinates:
    /// ||L^T X L^{-T}||_2 with G_H = L L^T.
    template <class Mat>
    [[nodiscard]] double operator_norm_h(const Mat& x) const {
        using Scalar = typename Mat::Scalar;
        using Dyn = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
        const MatrixXd lower = llt_h_.matrixL();
        const Dyn lt = lower.transpose().template cast<Scalar>();
        // Y = L^T X L^{-T}  <=>  Y L^T = L^T X
        const Dyn rhs = lt * x;
        const Dyn y = lt.transpose().template triangularView<Eigen::Lower>().solve(rhs.adjoint()).adjoint();
        Eigen::JacobiSVD<Dyn> svd(y);
        return svd.singularValues()(0);
    }

private:
    MatrixXd gh_;
    MatrixXd gv_;
    Eigen::LLT<MatrixXd> llt_h_;
    Eigen::LLT<MatrixXd> llt_v_;
    double embedding_ = 0.0;
};

/// Generalized eigendecomposition of (G_V, G_H): the spectral realization of
/// the interpolation scale.
class SpectralScale {
public:
    SpectralScale(VectorXd lambda, MatrixXd phi, MatrixXd to_scale)
        : lambda_(std::move(lambda)), phi_(std::move(phi)), to_scale_(std::move(to_scale)) {}

    [[nodiscard]] const VectorXd& eigenvalues() const { return lambda_; }
    /// Columns are G_H-orthonormal.
    [[nodiscard]] const MatrixXd& eigenvectors() const { return phi_; }
    /// Phi^T G_H: maps coordinates to scale coefficients.
    [[nodiscard]] const MatrixXd& to_scale() const { return to_scale_; }
    [[nodiscard]] double lambda_min() const { return lambda_.minCoeff(); }
    [[nodiscard]] Eigen::Index dim() const { return lambda_.size(); }

    /// Scale coefficients c = Phi^T G_H u.
    [[nodiscard]] VectorXd coefficients(const VectorXd& u) const { return to_scale_ * u; }

    /// Gram matrix of the V_beta inner product in coordinates.
    [[nodiscard]] MatrixXd gram(double beta) const {
        const VectorXd w = lambda_.array().pow(beta).matrix();
        return to_scale_.transpose() * w.asDiagonal() * to_scale_;
    }

    /// Norm of the bilinear form (u, v) -> v^T X u as a map V_beta x V_gamma -> K:
    /// largest singular value of Lambda^{-gamma/2} Phi^T X Phi Lambda^{-beta/2}.
    [[nodiscard]] double mixed_form_norm(const MatrixXd& x, double beta, double gamma) const {
        const VectorXd left = lambda_.array().pow(-0.5 * gamma).matrix();
        const VectorXd right = lambda_.array().pow(-0.5 * beta).matrix();
        const MatrixXd m = left.asDiagonal() * (phi_.transpose() * x * phi_) * right.asDiagonal();
        Eigen::JacobiSVD<MatrixXd> svd(m);
        return svd.singularValues()(0);
    }

private:
    VectorXd lambda_;
    MatrixXd phi_;
    MatrixXd to_scale_;
};

/// Generalized eigendecomposition G_V Phi = G_H Phi diag(lambda), with residual
/// ||G_V Phi - G_H Phi diag(lambda)||_F <= 1e-9 ||G_V||_F.
inline SpectralScale build_spectral_scale(const GramPair& gp) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(gp.gram_v(), gp.gram_h());
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("generalized eigensolver for (G_V, G_H) did not converge");
    }
    VectorXd lambda = es.eigenvalues();
    MatrixXd phi = es.eigenvectors();
    const double resid =
        (gp.gram_v() * phi - gp.gram_h() * phi * lambda.asDiagonal()).norm();
    if (resid > 1e-9 * gp.gram_v().norm()) {
        std::ostringstream os;
        os << "spectral scale residual " << resid << " exceeds 1e-9 ||G_V||_F";
        throw NumericalFailure(os.str());
    }
    if (!(lambda(0) > 0.0)) {
        throw NumericalFailure("spectral scale has a nonpositive eigenvalue");
    }
    MatrixXd to_scale = phi.transpose() * gp.gram_h();
    return SpectralScale(std::move(lambda), std::move(phi), std::move(to_scale));
}

/// ||u||_{V_beta} for beta in [0, 1].
inline double interp_norm(const VectorXd& u, const SpectralScale& scale, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidInput("interpolation index beta must lie in [0, 1], got " + std::to_string(beta));
    }
    if (u.size() != scale.dim()) {
        throw InvalidInput("interp_norm: dimension mismatch");
    }
    const VectorXd c = scale.coefficients(u);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        acc += std::pow(scale.eigenvalues()(i), beta) * c(i) * c(i);
    }
    return std::sqrt(acc);
}

/// <w, v>_{V' x V} with w identified through the H pivot: w^T G_H v.
inline double dual_pairing(const VectorXd& w, const VectorXd& v, const GramPair& gp) {
    if (w.size() != gp.dim() || v.size() != gp.dim()) {
        throw InvalidInput("dual_pairing: dimension mismatch");
    }
    return w.dot(gp.gram_h() * v);
}

} // namespace maxreg
