#pragma once

// Brute-force HE11 references: a dense sign-change scan of the unexpanded order-1 eigenvalue
// determinant, and the guided power split by direct quadrature of the axial Poynting flux.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

struct He11Reference {
    double U = 0.0, W = 0.0, n_eff = 0.0;
};

inline double he11_determinant(double U, double V, double n1) {
    namespace bm = boost::math;
    const double W = std::sqrt(V * V - U * U);
    const double X = bm::cyl_bessel_j_prime(1, U) / (U * bm::cyl_bessel_j(1, U));
    const double Y = bm::cyl_bessel_k_prime(1, W) / (W * bm::cyl_bessel_k(1, W));
    const double beta2 = n1 * n1 - U * U * (n1 * n1 - 1.0) / (V * V);  // (beta/k0)^2
    const double rhs = 1.0 / (U * U) + 1.0 / (W * W);
    return (X + Y) * (n1 * n1 * X + Y) - beta2 * rhs * rhs;
}

/// All sign changes of the determinant for U in (0, min(V, j01)), each refined by bisection.
inline std::vector<He11Reference> he11_root_scan(double radius, double n1, double lambda, int points = 200000) {
    const double V = 2.0 * M_PI * radius * std::sqrt(n1 * n1 - 1.0) / lambda;
    const double top = std::min(V, 2.404825557695773);
    std::vector<He11Reference> roots;
    double u_prev = top * 1e-6, f_prev = he11_determinant(u_prev, V, n1);
    for (int i = 1; i < points; ++i) {
        const double u = top * (1e-6 + (1.0 - 2e-6) * i / (points - 1));
        const double f = he11_determinant(u, V, n1);
        if (std::isfinite(f) && std::isfinite(f_prev) && (f > 0.0) != (f_prev > 0.0)) {
            double lo = u_prev, hi = u, flo = f_prev;
            for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = he11_determinant(mid, V, n1);
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid, flo = fm;
                } else {
                    hi = mid;
                }
            }
            const double Ur = 0.5 * (lo + hi);
            const double Wr = std::sqrt(V * V - Ur * Ur);
            roots.push_back({Ur, Wr, std::sqrt(1.0 + Wr * Wr * (n1 * n1 - 1.0) / (V * V))});
        }
        u_prev = u, f_prev = f;
    }
    return roots;
}

struct PowerSplit {
    double s_surf = 0.0;         // 2 pi a S_z(a+) / P
    double core_fraction = 0.0;  // P_inside / P
};

/// Azimuthally averaged S_z of quasi-circular HE11 from the textbook field components, integrated numerically.
inline PowerSplit he11_power_split(double radius, double n1, double lambda, double U, double W) {
    namespace bm = boost::math;
    const double V = std::sqrt(U * U + W * W);
    const double k0 = 2.0 * M_PI / lambda;
    const double h = U / radius, q = W / radius;
    const double beta2 = k0 * k0 * (1.0 + W * W * (n1 * n1 - 1.0) / (V * V));
    const double J1a = bm::cyl_bessel_j(1, U), K1a = bm::cyl_bessel_k(1, W);
    const double s = (1.0 / (U * U) + 1.0 / (W * W)) /
                     (bm::cyl_bessel_j_prime(1, U) / (U * J1a) + bm::cyl_bessel_k_prime(1, W) / (W * K1a));
    const double s1 = beta2 * s / (k0 * k0 * n1 * n1), s2 = beta2 * s / (k0 * k0);
    auto s_in = [&](double r) {
        const double j0 = bm::cyl_bessel_j(0, h * r), j2 = bm::cyl_bessel_j(2, h * r);
        return n1 * n1 / (h * h) * ((1 - s) * (1 - s1) * j0 * j0 + (1 + s) * (1 + s1) * j2 * j2);
    };
    auto s_out = [&](double r) {
        const double k0r = bm::cyl_bessel_k(0, q * r), k2r = bm::cyl_bessel_k(2, q * r);
        const double c = J1a / K1a;
        return c * c / (q * q) * ((1 - s) * (1 - s2) * k0r * k0r + (1 + s) * (1 + s2) * k2r * k2r);
    };
    // fixed composite Gauss-Legendre; K_nu(q r)^2 has decayed by e^-120 at r = a + 60/q
    using GL = bm::quadrature::gauss<double, 30>;
    double p_in = 0.0, p_out = 0.0;
    for (int k = 0; k < 20; ++k)
        p_in += GL::integrate([&](double r) { return s_in(r) * r; }, radius * k / 20, radius * (k + 1) / 20);
    for (int k = 0; k < 240; ++k)
        p_out += GL::integrate([&](double r) { return s_out(r) * r; }, radius + k / (4 * q), radius + (k + 1) / (4 * q));
    return {2.0 * M_PI * radius * s_out(radius) / (2.0 * M_PI * (p_in + p_out)), p_in / (p_in + p_out)};
}

}  // namespace oracle
