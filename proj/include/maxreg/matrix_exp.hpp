#pragma once

// Matrix exponential by scaling and squaring with diagonal Pade approximants
// of degree 3, 5, 7, 9 or 13, chosen from the 1-norm (Higham, SIAM J. Matrix
// Anal. Appl. 26 (2005)).  Backward error is below unit roundoff in double.

#include "maxreg/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace maxreg {

namespace detail {

template <class Mat>
void pade_terms(const Mat& a, int m, Mat& u, Mat& v) {
    using Real = typename Eigen::NumTraits<typename Mat::Scalar>::Real;
    const auto n = a.rows();
    const Mat ident = Mat::Identity(n, n);
    if (m == 13) {
        static constexpr std::array<double, 14> b = {
            64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
            129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
            1323241920.0,        40840800.0,          960960.0,           16380.0,
            182.0,               1.0};
        const Mat a2 = a * a;
        const Mat a4 = a2 * a2;
        const Mat a6 = a4 * a2;
        Mat inner = Real(b[13]) * a6 + Real(b[11]) * a4 + Real(b[9]) * a2;
        Mat tmp = a6 * inner;
        tmp += Real(b[7]) * a6 + Real(b[5]) * a4 + Real(b[3]) * a2 + Real(b[1]) * ident;
        u = a * tmp;
        inner = Real(b[12]) * a6 + Real(b[10]) * a4 + Real(b[8]) * a2;
        v = a6 * inner;
        v += Real(b[6]) * a6 + Real(b[4]) * a4 + Real(b[2]) * a2 + Real(b[0]) * ident;
        return;
    }
    static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
    static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
    static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                                 25200.0,    1512.0,    56.0,      1.0};
    static constexpr std::array<double, 10> b9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                                  30270240.0,    2162160.0,    110880.0,     3960.0,
                                                  90.0,          1.0};
    const double* b = m == 3 ? b3.data() : m == 5 ? b5.data() : m == 7 ? b7.data() : b9.data();
    const Mat a2 = a * a;
    Mat power = ident;
    Mat odd = Mat::Zero(n, n);
    Mat even = Mat::Zero(n, n);
    for (int k = 0; k <= m; k += 2) {
        even += Real(b[k]) * power;
        odd += Real(b[k + 1]) * power;
        power = power * a2;
    }
    u = a * odd;
    v = even;
}

} // namespace detail

/// exp(A) for a square real or complex matrix.
template <class Mat>
Mat expm(const Mat& a) {
    if (a.rows() != a.cols()) {
        throw InvalidInput("expm: matrix must be square");
    }
    const auto n = a.rows();
    if (n == 0) {
        return a;
    }
    static constexpr std::array<double, 4> theta = {1.495585217958292e-2, 2.539398330063230e-1,
                                                    9.504178996162932e-1, 2.097847961257068e0};
    static constexpr std::array<int, 4> degrees = {3, 5, 7, 9};
    static constexpr double theta13 = 5.371920351148152e0;

    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1)) {
        throw NumericalFailure("expm: non-finite matrix entries");
    }
    Mat u, v;
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        if (norm1 <= theta[i]) {
            detail::pade_terms(a, degrees[i], u, v);
            return (v - u).partialPivLu().solve(v + u);
        }
    }
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    }
    const Mat scaled = a / std::ldexp(1.0, squarings);
    detail::pade_terms(scaled, 13, u, v);
    Mat r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) {
        r = (r * r).eval();
    }
    return r;
}

} // namespace maxreg
