#pragma once

// Theta-scheme for G_H u' + A_form(t) u = G_H f on a uniform grid:
//
//   G_H (u_{k+1} - u_k)/dt + theta A_form(t_{k+1}) u_{k+1} + (1 - theta) A_form(t_k) u_k
//       = G_H (theta f_{k+1} + (1 - theta) f_k)
//
// theta = 1 is implicit Euler, theta = 1/2 Crank-Nicolson.

#include "maxreg/errors.hpp"
#include "maxreg/form_family.hpp"
#include "maxreg/grid_function.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

namespace maxreg {

struct StepperConfig {
    int steps = 100;
    double theta = 1.0;

    void validate() const {
        if (steps < 2) {
            throw InvalidInput("stepper: at least 2 steps required");
        }
        if (!(theta >= 0.5 && theta <= 1.0)) {
            throw InvalidInput("stepper: theta must lie in [1/2, 1]");
        }
    }
};

using SourceFunction = std::function<VectorXd(double)>;

inline GridFunction solve_theta(const FormFamily& ff, const SourceFunction& f, const VectorXd& u0,
                                const StepperConfig& cfg) {
    cfg.validate();
    const auto n = ff.dim();
    if (u0.size() != n) {
        throw InvalidInput("stepper: initial value has wrong dimension");
    }
    const auto& gh = ff.gram().gram_h();
    const double dt = ff.tau() / cfg.steps;
    const double th = cfg.theta;

    GridFunction out;
    out.grid = uniform_grid(ff.tau(), cfg.steps);
    out.values.resize(n, cfg.steps + 1);
    out.values.col(0) = u0;

    MatrixXd a_prev = ff.form_at(0.0);
    VectorXd f_prev = f(0.0);
    for (int k = 0; k < cfg.steps; ++k) {
        const double t_next = out.grid[static_cast<std::size_t>(k) + 1];
        const MatrixXd a_next = ff.form_at(t_next);
        const VectorXd f_next = f(t_next);
        const VectorXd u = out.values.col(k);
        const MatrixXd lhs = gh + th * dt * a_next;
        VectorXd rhs = gh * (u + dt * (th * f_next + (1.0 - th) * f_prev));
        if (th < 1.0) {
            rhs.noalias() -= (1.0 - th) * dt * (a_prev * u);
        }
        Eigen::PartialPivLU<MatrixXd> lu(lhs);
        const double rcond = lu.rcond();
        if (!(rcond > 1e-14)) {
            std::ostringstream os;
            os << "stepper: singular step matrix at t = " << t_next << " (rcond " << rcond << ")";
            throw NumericalFailure(os.str());
        }
        out.values.col(k + 1) = lu.solve(rhs);
        a_prev = a_next;
        f_prev = f_next;
    }
    if (!out.values.allFinite()) {
        throw NumericalFailure("stepper produced non-finite values");
    }
    return out;
}

/// Source given on a grid, read off its piecewise-linear interpolant.
inline SourceFunction interpolant(const GridFunction& g) {
    return [g](double t) -> VectorXd {
        const auto& grid = g.grid;
        if (t <= grid.front()) {
            return g.values.col(0);
        }
        if (t >= grid.back()) {
            return g.values.col(g.nodes() - 1);
        }
        const auto it = std::upper_bound(grid.begin(), grid.end(), t);
        const auto j = static_cast<Eigen::Index>(it - grid.begin()) - 1;
        const double a = grid[static_cast<std::size_t>(j)], b = grid[static_cast<std::size_t>(j) + 1];
        const double w = (t - a) / (b - a);
        return (1.0 - w) * g.values.col(j) + w * g.values.col(j + 1);
    };
}

inline GridFunction solve_theta(const FormFamily& ff, const GridFunction& f, const VectorXd& u0,
                                const StepperConfig& cfg) {
    validate(f);
    return solve_theta(ff, interpolant(f), u0, cfg);
}

/// Discrete L_2(0, tau; H) distance between a solution on N steps and one on 2N
/// steps, sampled at the coarse nodes.
inline double coarse_l2_distance(const GridFunction& coarse, const GridFunction& fine, const GramPair& gp) {
    const auto w = trapezoid_weights(coarse.grid);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < coarse.nodes(); ++k) {
        const double d = gp.norm_h(coarse.values.col(k) - fine.values.col(2 * k));
        acc += w[static_cast<std::size_t>(k)] * d * d;
    }
    return std::sqrt(acc);
}

struct RefinedSolution {
    GridFunction u;
    int steps = 0;
    bool converged = false;
    double last_difference = std::numeric_limits<double>::infinity();
    /// 2 u_{2M} - u_M on the coarser of the last two grids (M = steps / 2).
    GridFunction extrapolated;
};

/// Doubles the step count from `initial_steps` until successive solutions differ
/// by less than tol; stops at max_steps and reports converged = false.
inline RefinedSolution refine_until(const FormFamily& ff, const SourceFunction& f, const VectorXd& u0, double tol,
                                    double theta = 1.0, int initial_steps = 100, int max_steps = 1 << 16) {
    if (!(tol > 0.0)) {
        throw InvalidInput("refine_until: tol must be positive");
    }
    RefinedSolution out;
    GridFunction prev = solve_theta(ff, f, u0, StepperConfig{initial_steps, theta});
    int steps = initial_steps;
    while (2 * steps <= max_steps) {
        GridFunction next = solve_theta(ff, f, u0, StepperConfig{2 * steps, theta});
        out.last_difference = coarse_l2_distance(prev, next, ff.gram());
        out.extrapolated = prev;
        for (Eigen::Index k = 0; k < prev.nodes(); ++k) {
            out.extrapolated.values.col(k) = 2.0 * next.values.col(2 * k) - prev.values.col(k);
        }
        steps *= 2;
        prev = std::move(next);
        if (out.last_difference < tol) {
            out.converged = true;
            break;
        }
    }
    out.u = std::move(prev);
    out.steps = steps;
    return out;
}

} // namespace maxreg
