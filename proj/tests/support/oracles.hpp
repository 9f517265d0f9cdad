#pragma once

// Independent reference computations used by the tests.

#include "maxreg/matrix_exp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Exact solution of u' + A u = f, u(0) = u0, for constant A and f piecewise
/// linear between grid nodes (columns of f). On each step of length h,
///
///   d/ds [u; w1; w2] = [[-A, I, 0], [0, 0, I], [0, 0, 0]] [u; w1; w2]
///
/// with w1(0) = f_j, w2 = (f_{j+1} - f_j)/h reproduces the source exactly.
inline MatrixXd autonomous_solution(const MatrixXd& a, const std::vector<double>& grid, const MatrixXd& f,
                                    const VectorXd& u0) {
    const auto n = a.rows();
    MatrixXd u(n, static_cast<Eigen::Index>(grid.size()));
    u.col(0) = u0;
    double cached_h = -1.0;
    MatrixXd e;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const double h = grid[j + 1] - grid[j];
        if (std::abs(h - cached_h) > 1e-15 * h) {
            MatrixXd b = MatrixXd::Zero(3 * n, 3 * n);
            b.block(0, 0, n, n) = -h * a;
            b.block(0, n, n, n) = h * MatrixXd::Identity(n, n);
            b.block(n, 2 * n, n, n) = h * MatrixXd::Identity(n, n);
            e = maxreg::expm(b);
            cached_h = h;
        }
        const auto jj = static_cast<Eigen::Index>(j);
        const VectorXd slope = (f.col(jj + 1) - f.col(jj)) / h;
        u.col(jj + 1) = e.block(0, 0, n, n) * u.col(jj) + e.block(0, n, n, n) * f.col(jj) +
                        e.block(0, 2 * n, n, n) * slope;
    }
    return u;
}

/// Adaptive Simpson quadrature to absolute tolerance tol.
inline double adaptive_integral(const std::function<double(double)>& f, double a, double b, double tol,
                                int depth = 50) {
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
                return left + right + (left + right - whole) / 15.0;
            }
            return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, d - 1) +
                   rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

inline MatrixXd random_spd(int n, std::mt19937_64& rng, double shift = 1.0) {
    std::normal_distribution<double> nd;
    const MatrixXd r = MatrixXd::NullaryExpr(n, n, [&]() { return nd(rng); });
    MatrixXd s = r * r.transpose() + shift * MatrixXd::Identity(n, n);
    return 0.5 * (s + s.transpose());
}

inline VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    return VectorXd::NullaryExpr(n, [&]() { return nd(rng); });
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    }
    return sxy / sxx;
}

} // namespace oracle
