#pragma once

/*
 * P1 finite-element form families for three model problems:
 *
 *   schrodinger  -u'' + m(t,x) u on [-R, R], Dirichlet ends,
 *                m(t,x) = m0(x) + theta(t) p0(x)
 *   robin        -u'' + a(t) u' on [0, 1] (or the unit square),
 *                du/dn + b(t) u = 0 on the boundary
 *   wentzell     heat equation whose boundary values carry their own dynamics,
 *                state space L2(interior) + L2(boundary)
 *
 * In 1D the boundary is the two endpoints with counting measure.
 * Time profiles are theta(t) = (t/tau)^alpha.
 */

#include "maxreg/errors.hpp"
#include "maxreg/form_family.hpp"
#include "maxreg/hilbert_core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace maxreg {

/// Exponent bookkeeping: the family's difference is bounded on V_beta x V_gamma.
struct ExpectedExponents {
    double beta = 0.0;
    double gamma = 0.0;
    /// alpha must exceed this for the main Dini condition (gamma/2).
    double alpha_threshold = 0.0;

    /// Threshold with a nonzero initial value: max(gamma/2, (beta+gamma)/2 - 1/p).
    [[nodiscard]] double alpha_threshold_p(double p) const {
        return std::max(0.5 * gamma, 0.5 * (beta + gamma) - 1.0 / p);
    }
};

inline ExpectedExponents exponents(double beta, double gamma) { return {beta, gamma, 0.5 * gamma}; }

struct BuiltExample {
    FormFamily family;
    ExpectedExponents expected;
    std::string id;
};

namespace fem {

/// Uniform 1D mesh nodes on [a, b] with `elements` elements.
inline std::vector<double> nodes_1d(double a, double b, int elements) {
    std::vector<double> x(static_cast<std::size_t>(elements) + 1);
    for (int i = 0; i <= elements; ++i) {
        x[static_cast<std::size_t>(i)] = a + (b - a) * i / elements;
    }
    return x;
}

using Weight = std::function<double(double)>;

/// Stiffness, weighted mass (2-point Gauss) and first-derivative (trial) matrices on all nodes.
struct Assembly1D {
    MatrixXd stiffness;
    MatrixXd mass;
    MatrixXd drift; // entry (i, j) = int phi_j' phi_i
};

inline MatrixXd weighted_mass_1d(const std::vector<double>& x, const Weight& w) {
    const auto n = static_cast<Eigen::Index>(x.size());
    MatrixXd m = MatrixXd::Zero(n, n);
    const double g = 0.5 / std::sqrt(3.0);
    for (Eigen::Index e = 0; e + 1 < n; ++e) {
        const double a = x[static_cast<std::size_t>(e)], b = x[static_cast<std::size_t>(e) + 1];
        const double h = b - a;
        for (double xi : {0.5 - g, 0.5 + g}) {
            const double wq = 0.5 * h * w(a + xi * h);
            const std::array<double, 2> phi = {1.0 - xi, xi};
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    m(e + i, e + j) += wq * (phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)]);
                }
            }
        }
    }
    return m;
}

inline Assembly1D assemble_1d(const std::vector<double>& x) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Assembly1D out{MatrixXd::Zero(n, n), MatrixXd::Zero(n, n), MatrixXd::Zero(n, n)};
    for (Eigen::Index e = 0; e + 1 < n; ++e) {
        const double h = x[static_cast<std::size_t>(e) + 1] - x[static_cast<std::size_t>(e)];
        out.stiffness(e, e) += 1.0 / h;
        out.stiffness(e + 1, e + 1) += 1.0 / h;
        out.stiffness(e, e + 1) -= 1.0 / h;
        out.stiffness(e + 1, e) -= 1.0 / h;
        out.mass(e, e) += h / 3.0;
        out.mass(e + 1, e + 1) += h / 3.0;
        out.mass(e, e + 1) += h / 6.0;
        out.mass(e + 1, e) += h / 6.0;
        out.drift(e, e) -= 0.5;
        out.drift(e, e + 1) += 0.5;
        out.drift(e + 1, e) -= 0.5;
        out.drift(e + 1, e + 1) += 0.5;
    }
    return out;
}

/// Counting measure on the two endpoints.
inline MatrixXd endpoint_mass(Eigen::Index n) {
    MatrixXd b = MatrixXd::Zero(n, n);
    b(0, 0) = 1.0;
    b(n - 1, n - 1) = 1.0;
    return b;
}

/// Drop the first and last row/column (Dirichlet ends).
inline MatrixXd interior(const MatrixXd& m) {
    const auto n = m.rows();
    return m.block(1, 1, n - 2, n - 2);
}

/// Removes the rows and columns listed in `pinned` (sorted, unique).
inline MatrixXd drop_nodes(const MatrixXd& m, const std::vector<Eigen::Index>& pinned) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (!std::binary_search(pinned.begin(), pinned.end(), i)) {
            keep.push_back(i);
        }
    }
    return m(keep, keep);
}

struct Assembly2D {
    MatrixXd stiffness;
    MatrixXd mass;
    MatrixXd boundary_mass;
};

/// Unit square, n x n squares each cut into two triangles along the diagonal.
inline Assembly2D assemble_square(int n) {
    const Eigen::Index nodes = static_cast<Eigen::Index>(n + 1) * (n + 1);
    Assembly2D out{MatrixXd::Zero(nodes, nodes), MatrixXd::Zero(nodes, nodes), MatrixXd::Zero(nodes, nodes)};
    const double h = 1.0 / n;
    auto id = [n](int i, int j) { return static_cast<Eigen::Index>(j) * (n + 1) + i; };
    auto add_triangle = [&](std::array<Eigen::Index, 3> v, std::array<std::array<double, 2>, 3> p) {
        const double x1 = p[1][0] - p[0][0], y1 = p[1][1] - p[0][1];
        const double x2 = p[2][0] - p[0][0], y2 = p[2][1] - p[0][1];
        const double det = x1 * y2 - x2 * y1;
        const double area = 0.5 * std::abs(det);
        // gradients of the barycentric coordinates
        const std::array<std::array<double, 2>, 3> grad = {{{(y1 - y2) / det, (x2 - x1) / det},
                                                            {y2 / det, -x2 / det},
                                                            {-y1 / det, x1 / det}}};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b);
                out.stiffness(v[ua], v[ub]) += area * (grad[ua][0] * grad[ub][0] + grad[ua][1] * grad[ub][1]);
                out.mass(v[ua], v[ub]) += area / 12.0 * (a == b ? 2.0 : 1.0);
            }
        }
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = i * h, y = j * h;
            add_triangle({id(i, j), id(i + 1, j), id(i + 1, j + 1)}, {{{x, y}, {x + h, y}, {x + h, y + h}}});
            add_triangle({id(i, j), id(i + 1, j + 1), id(i, j + 1)}, {{{x, y}, {x + h, y + h}, {x, y + h}}});
        }
    }
    auto add_edge = [&](Eigen::Index a, Eigen::Index b) {
        out.boundary_mass(a, a) += h / 3.0;
        out.boundary_mass(b, b) += h / 3.0;
        out.boundary_mass(a, b) += h / 6.0;
        out.boundary_mass(b, a) += h / 6.0;
    };
    for (int i = 0; i < n; ++i) {
        add_edge(id(i, 0), id(i + 1, 0));
        add_edge(id(i, n), id(i + 1, n));
        add_edge(id(0, i), id(0, i + 1));
        add_edge(id(n, i), id(n, i + 1));
    }
    return out;
}

} // namespace fem

enum class PotentialWeight { bounded, hardy };

struct SchrodingerParams {
    double half_width = 8.0;
    int mesh_n = 64; // elements; the origin is a node when even
    double m0 = 1.0;
    PotentialWeight weight = PotentialWeight::bounded;
    double weight_scale = 1.0;
    double alpha = 0.5;
    double tau = 1.0;
    bool time_dependent = true;
};

/// Perturbation weight p0 on the mesh; the Hardy weight 1/x^2 is capped at 1/h^2.
inline fem::Weight schrodinger_weight(const SchrodingerParams& prm) {
    const double h = 2.0 * prm.half_width / prm.mesh_n;
    const double scale = prm.weight_scale;
    if (prm.weight == PotentialWeight::hardy) {
        return [h, scale](double x) { return scale / std::max(x * x, h * h); };
    }
    return [scale](double) { return scale; };
}

inline void validate(const SchrodingerParams& prm) {
    if (!(prm.half_width > 0.0) || prm.mesh_n < 2 || !(prm.tau > 0.0)) {
        throw InvalidInput("schrodinger: need half_width > 0, mesh_n >= 2, tau > 0");
    }
    if (!(prm.m0 >= 0.0) || !(prm.weight_scale >= 0.0)) {
        throw InvalidInput("schrodinger: potentials must be nonnegative");
    }
    if (prm.weight == PotentialWeight::hardy && prm.mesh_n % 2 != 0) {
        throw InvalidInput("schrodinger: the inverse-square weight needs an even mesh_n (origin at a node)");
    }
    if (prm.time_dependent && !(prm.alpha > 0.0 && prm.alpha <= 1.0)) {
        throw InvalidInput("schrodinger: alpha must lie in (0, 1]");
    }
}

/// Dirichlet nodes: both ends, plus the origin for the inverse-square weight
/// (a one-dimensional Hardy inequality needs u(0) = 0).
inline std::vector<Eigen::Index> schrodinger_pinned_nodes(const SchrodingerParams& prm) {
    if (prm.weight == PotentialWeight::hardy) {
        return {0, prm.mesh_n / 2, prm.mesh_n};
    }
    return {0, prm.mesh_n};
}

/// p0-weighted mass matrix on the free nodes.
inline MatrixXd schrodinger_weight_mass(const SchrodingerParams& prm) {
    const auto x = fem::nodes_1d(-prm.half_width, prm.half_width, prm.mesh_n);
    return fem::drop_nodes(fem::weighted_mass_1d(x, schrodinger_weight(prm)), schrodinger_pinned_nodes(prm));
}

inline BuiltExample build_schrodinger(const SchrodingerParams& prm) {
    validate(prm);
    const auto x = fem::nodes_1d(-prm.half_width, prm.half_width, prm.mesh_n);
    const auto asm1 = fem::assemble_1d(x);
    const auto pinned = schrodinger_pinned_nodes(prm);
    const MatrixXd k = fem::drop_nodes(asm1.stiffness, pinned);
    const MatrixXd m = fem::drop_nodes(asm1.mass, pinned);
    const MatrixXd mm0 = prm.m0 * m;
    const MatrixXd mp0 = schrodinger_weight_mass(prm);
    GramPair gp(m, k + mm0 + m);
    std::vector<FormTerm> terms{{k + mm0, {}, "laplacian+m0"}};
    if (prm.time_dependent) {
        terms.push_back({mp0, holder_profile(prm.alpha, prm.tau), "p0"});
    } else {
        terms.push_back({mp0, {}, "p0"});
    }
    const double sigma = prm.weight == PotentialWeight::hardy ? 1.0 : 0.0;
    return {FormFamily(std::move(gp), prm.tau, std::move(terms)), exponents(sigma, sigma), "schrodinger"};
}

enum class RobinDomain { interval, square };

struct RobinParams {
    RobinDomain domain = RobinDomain::interval;
    int mesh_n = 50;
    /// boundary coefficient b(t) = boundary_base + boundary_amplitude theta(t)
    double boundary_base = 1.0;
    double boundary_amplitude = 1.0;
    /// drift a(t) = drift_amplitude theta(t) (interval only)
    double drift_amplitude = 0.5;
    double alpha = 0.3;
    double tau = 1.0;
    bool time_dependent = true;
};

inline BuiltExample build_robin(const RobinParams& prm) {
    if (prm.mesh_n < 2 || !(prm.tau > 0.0) || !(prm.boundary_base >= 0.0) ||
        !(prm.boundary_base + prm.boundary_amplitude >= 0.0) || !(prm.boundary_amplitude >= 0.0)) {
        throw InvalidInput("robin: need mesh_n >= 2, tau > 0 and a nonnegative boundary coefficient");
    }
    if (prm.time_dependent && !(prm.alpha > 0.0 && prm.alpha <= 1.0)) {
        throw InvalidInput("robin: alpha must lie in (0, 1]");
    }
    MatrixXd k, m, b, varying;
    if (prm.domain == RobinDomain::interval) {
        const auto asm1 = fem::assemble_1d(fem::nodes_1d(0.0, 1.0, prm.mesh_n));
        k = asm1.stiffness;
        m = asm1.mass;
        b = fem::endpoint_mass(k.rows());
        varying = prm.boundary_amplitude * b + prm.drift_amplitude * asm1.drift;
    } else {
        const auto asm2 = fem::assemble_square(prm.mesh_n);
        k = asm2.stiffness;
        m = asm2.mass;
        b = asm2.boundary_mass;
        varying = prm.boundary_amplitude * b;
    }
    GramPair gp(m, k + m);
    std::vector<FormTerm> terms{{k + prm.boundary_base * b, {}, "laplacian+boundary"}};
    terms.push_back({varying, prm.time_dependent ? holder_profile(prm.alpha, prm.tau) : TimeProfile{},
                     "boundary+drift"});
    return {FormFamily(std::move(gp), prm.tau, std::move(terms)), exponents(1.0, 0.5), "robin"};
}

struct WentzellParams {
    int mesh_n = 50;
    double boundary_base = 1.0;
    double boundary_amplitude = 1.0;
    double alpha = 0.1;
    double tau = 1.0;
    bool time_dependent = true;
};

/// The element of V is the nodal vector of u; its H-image is (u, u|boundary), so
/// G_H = interior mass + endpoint mass and G_V = stiffness + G_H.
inline BuiltExample build_wentzell(const WentzellParams& prm) {
    if (prm.mesh_n < 2 || !(prm.tau > 0.0) || !(prm.boundary_base >= 0.0) || !(prm.boundary_amplitude >= 0.0)) {
        throw InvalidInput("wentzell: need mesh_n >= 2, tau > 0 and a nonnegative boundary coefficient");
    }
    if (prm.time_dependent && !(prm.alpha > 0.0 && prm.alpha <= 1.0)) {
        throw InvalidInput("wentzell: alpha must lie in (0, 1]");
    }
    const auto asm1 = fem::assemble_1d(fem::nodes_1d(0.0, 1.0, prm.mesh_n));
    const MatrixXd b = fem::endpoint_mass(asm1.stiffness.rows());
    const MatrixXd gh = asm1.mass + b;
    GramPair gp(gh, asm1.stiffness + gh);
    std::vector<FormTerm> terms{{asm1.stiffness + prm.boundary_base * b, {}, "laplacian+boundary"}};
    terms.push_back({prm.boundary_amplitude * b,
                     prm.time_dependent ? holder_profile(prm.alpha, prm.tau) : TimeProfile{}, "boundary"});
    return {FormFamily(std::move(gp), prm.tau, std::move(terms)), exponents(0.0, 0.0), "wentzell"};
}

struct MatrixParams {
    int dim = 8;
    double alpha = 0.5;
    double tau = 1.0;
    unsigned seed = 1;
};

/// Random SPD pair with A_form(t) = G_V + theta(t) G_H; the difference is bounded on H x H.
inline BuiltExample build_matrix(const MatrixParams& prm) {
    if (prm.dim < 1 || !(prm.tau > 0.0) || !(prm.alpha > 0.0 && prm.alpha <= 1.0)) {
        throw InvalidInput("matrix example: need dim >= 1, tau > 0, alpha in (0, 1]");
    }
    std::mt19937_64 rng(prm.seed);
    std::normal_distribution<double> nd;
    auto spd = [&](double shift) {
        const MatrixXd r = MatrixXd::NullaryExpr(prm.dim, prm.dim, [&]() { return nd(rng); });
        MatrixXd s = r * r.transpose() / prm.dim + shift * MatrixXd::Identity(prm.dim, prm.dim);
        return MatrixXd(0.5 * (s + s.transpose()));
    };
    const MatrixXd gh = spd(1.0);
    const MatrixXd gv = gh + spd(1.0) * 10.0;
    GramPair gp(gh, gv);
    std::vector<FormTerm> terms{{gv, {}, "gv"}, {gh, holder_profile(prm.alpha, prm.tau), "gh"}};
    return {FormFamily(std::move(gp), prm.tau, std::move(terms)), exponents(0.0, 0.0), "matrix"};
}

struct SobolevCertificate {
    double C = 0.0;
    double C_refined = 0.0;
    bool pass = false;
};

/// Smallest C with v^T W v <= C ||v||_{V_sigma}^2.
inline double sobolev_weight_constant(const MatrixXd& weight_mass, double sigma, const SpectralScale& scale) {
    if (!(sigma >= 0.0 && sigma <= 1.0)) {
        throw InvalidInput("sobolev weight index sigma must lie in [0, 1]");
    }
    const VectorXd d = scale.eigenvalues().array().pow(-0.5 * sigma).matrix();
    const MatrixXd s = d.asDiagonal() * (scale.eigenvectors().transpose() * weight_mass * scale.eigenvectors()) *
                       d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// Constant on the given mesh and on the mesh refined once; passes when it
/// grows by less than 50%.
inline SobolevCertificate certify_sobolev_weight(const SchrodingerParams& prm, double sigma) {
    auto constant = [sigma](const SchrodingerParams& q) {
        const auto ex = build_schrodinger(q);
        return sobolev_weight_constant(schrodinger_weight_mass(q), sigma, build_spectral_scale(ex.family.gram()));
    };
    SchrodingerParams fine = prm;
    fine.mesh_n *= 2;
    SobolevCertificate out;
    out.C = constant(prm);
    out.C_refined = constant(fine);
    out.pass = std::isfinite(out.C_refined) && out.C_refined < 1.5 * out.C;
    return out;
}

} // namespace maxreg
