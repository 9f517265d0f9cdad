#pragma once

#include "maxreg/errors.hpp"
#include "maxreg/hilbert_core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace maxreg {

/// H-valued function on a time grid, one coordinate vector per node (columns
/// of `values`). Between nodes it is the piecewise-linear interpolant.
struct GridFunction {
    std::vector<double> grid;
    MatrixXd values;
    double p = 2.0;
    /// Node t_0 = 0 carries zero quadrature weight (integrable singularity there).
    bool exclude_origin = false;

    [[nodiscard]] Eigen::Index nodes() const { return static_cast<Eigen::Index>(grid.size()); }
    [[nodiscard]] Eigen::Index dim() const { return values.rows(); }
};

inline std::vector<double> uniform_grid(double tau, int intervals) {
    if (intervals < 1 || !(tau > 0.0)) {
        throw InvalidInput("uniform_grid: need tau > 0 and at least one interval");
    }
    std::vector<double> g(static_cast<std::size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k) {
        g[static_cast<std::size_t>(k)] = tau * static_cast<double>(k) / intervals;
    }
    g.back() = tau;
    return g;
}

inline void validate_grid(const std::vector<double>& grid) {
    if (grid.size() < 2 || grid.front() != 0.0) {
        throw InvalidInput("time grid must start at 0 and contain at least two nodes");
    }
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (!(grid[k] > grid[k - 1])) {
            throw InvalidInput("time grid must be strictly increasing");
        }
    }
}

inline void validate(const GridFunction& g) {
    validate_grid(g.grid);
    if (g.values.cols() != g.nodes()) {
        throw InvalidInput("grid function has one value per node");
    }
    if (!g.values.allFinite()) {
        throw InvalidInput("grid function values must be finite");
    }
}

/// Composite trapezoid weights.
inline std::vector<double> trapezoid_weights(const std::vector<double>& grid, bool exclude_origin = false) {
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double h = grid[k + 1] - grid[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    if (exclude_origin) {
        w[0] = 0.0;
    }
    return w;
}

/// Discrete L_p(0, tau; H) norm; p = infinity gives the max over weighted nodes.
inline double lp_norm(const GridFunction& g, const GramPair& gp) {
    const auto w = trapezoid_weights(g.grid, g.exclude_origin);
    if (std::isinf(g.p)) {
        double m = 0.0;
        for (Eigen::Index k = 0; k < g.nodes(); ++k) {
            if (w[static_cast<std::size_t>(k)] > 0.0) {
                m = std::max(m, gp.norm_h(g.values.col(k)));
            }
        }
        return m;
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < g.nodes(); ++k) {
        const double wk = w[static_cast<std::size_t>(k)];
        if (wk > 0.0) {
            acc += wk * std::pow(gp.norm_h(g.values.col(k)), g.p);
        }
    }
    return std::pow(acc, 1.0 / g.p);
}

inline GridFunction sample(const std::vector<double>& grid, const std::function<VectorXd(double)>& f, double p = 2.0) {
    validate_grid(grid);
    GridFunction g;
    g.grid = grid;
    g.p = p;
    const VectorXd first = f(grid.front());
    g.values.resize(first.size(), static_cast<Eigen::Index>(grid.size()));
    g.values.col(0) = first;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        g.values.col(static_cast<Eigen::Index>(k)) = f(grid[k]);
    }
    return g;
}

inline GridFunction zeros_like(const GridFunction& g) {
    GridFunction z = g;
    z.values.setZero();
    z.exclude_origin = false;
    return z;
}

} // namespace maxreg
