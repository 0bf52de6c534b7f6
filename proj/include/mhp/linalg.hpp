// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>

#include <Eigen/Dense>

namespace mhp {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Real symmetric image [Re, -Im; Im, Re] of a complex Hermitian matrix.
inline RMatrix embed_hermitian(const CMatrix& x) {
    const Eigen::Index n = x.rows();
    RMatrix y(2 * n, 2 * n);
    y.topLeftCorner(n, n) = x.real();
    y.bottomRightCorner(n, n) = x.real();
    y.topRightCorner(n, n) = -x.imag();
    y.bottomLeftCorner(n, n) = x.imag();
    return y;
}

/// Inverse of embed_hermitian. Averages the redundant blocks, so it also maps
/// an arbitrary real symmetric 2n x 2n matrix onto the nearest embedded one.
inline CMatrix extract_hermitian(const RMatrix& y) {
    const Eigen::Index n = y.rows() / 2;
    const RMatrix re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
    const RMatrix im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
    CMatrix x(n, n);
    x.real() = re;
    x.imag() = im;
    return x;
}

/// Wraps an angle into [0, 2*pi).
inline double wrap_phase(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

} // namespace mhp
