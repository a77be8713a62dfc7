#pragma once

// Reference T-matrix in the textbook Delta_1..Delta_4 form (divides by J_l(qa) and J_l(q1 a)),
// and a brute-force fixed-grid emissivity built on it.

#include <cmath>
#include <complex>

#include "nanotherm/constants.hpp"
#include "nanotherm/specfun.hpp"

namespace oracle {

using cplx = std::complex<double>;

struct Elements {
    cplx pp, qq, x;  // perp-perp, par-par, cross
};

inline Elements t_matrix_textbook(int l, double xi, double k0, double a, cplx eps) {
    const double q = k0 * std::sqrt(1.0 - xi * xi);
    cplx q1 = k0 * std::sqrt(eps - xi * xi);
    if (q1.imag() < 0.0) q1 = -q1;
    const double x = q * a;
    const cplx x1 = q1 * a;
    const auto out = nanotherm::specfun::bessel_set(l, cplx(x, 0.0));
    const auto in = nanotherm::specfun::bessel_set(l, x1);
    const cplx jin = in.dj / (x1 * in.j);
    const cplx hout = out.dh / (x * out.h);
    const cplx jout = out.dj / (x * out.j);
    const cplx d1 = jin - hout / eps;
    const cplx d2 = jin - hout;
    const cplx d3 = jin - jout / eps;
    const cplx d4 = jin - jout;
    const double omega = k0 * nanotherm::constants::speed_of_light;  // 2 pi nu
    const cplx K = double(l) * xi * k0 * nanotherm::constants::speed_of_light / (std::sqrt(eps) * a * a * omega) *
                   (1.0 / (q1 * q1) - 1.0 / (q * q));
    const cplx den = d1 * d2 - K * K;
    Elements e;
    e.pp = -out.j / out.h * (d1 * d4 - K * K) / den;
    e.qq = -out.j / out.h * (d2 * d3 - K * K) / den;
    const cplx xh = x * out.h;
    e.x = 2.0 * cplx(0.0, 1.0) * K / (nanotherm::constants::pi * std::sqrt(eps) * xh * xh * den);
    return e;
}

/// c0/(nu pi^2 a) sum_P sum_{|l|<=l_max} int_{-1}^{1} d xi, with the sign flipped.
/// Midpoint rule in theta (xi = cos theta); the integrand has a log singularity at xi = +-1.
inline double brute_force_emissivity(double nu, double a, cplx eps, int l_max = 40, int points = 2000) {
    const double c0 = nanotherm::constants::speed_of_light;
    const double k0 = 2.0 * nanotherm::constants::pi * nu / c0;
    const double h = nanotherm::constants::pi / points;
    double total = 0.0;
    for (int i = 0; i < points; ++i) {
        const double theta = (i + 0.5) * h;
        const double xi = std::cos(theta);
        double s = 0.0;
        for (int l = -l_max; l <= l_max; ++l) {
            const auto e = t_matrix_textbook(l, xi, k0, a, eps);
            s += e.pp.real() + std::norm(e.pp) + std::norm(e.x);
            s += e.qq.real() + std::norm(e.qq) + std::norm(e.x);
        }
        total += h * std::sin(theta) * s;
    }
    return -c0 / (nu * nanotherm::constants::pi * nanotherm::constants::pi * a) * total;
}

}  // namespace oracle
