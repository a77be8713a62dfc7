#pragma once

// Flat-interface emissivity by brute force: Fresnel reflectivity written with the transmitted-angle
// cosine and a plain trapezoid over (ln nu, theta).

#include <cmath>
#include <complex>
#include <numbers>

#include "nanotherm/constants.hpp"
#include "nanotherm/materials.hpp"
#include "nanotherm/radiometry.hpp"

namespace oracle {

using cplx = std::complex<double>;
namespace constants = nanotherm::constants;
namespace materials = nanotherm::materials;
namespace radiometry = nanotherm::radiometry;

inline double reflectivity_snell(double theta, cplx n) {
    const double ci = std::cos(theta), si = std::sin(theta);
    cplx ct = std::sqrt(1.0 - si * si / (n * n));
    if (ct.imag() < 0.0) ct = -ct;
    const cplx rs = (ci - n * ct) / (ci + n * ct);
    const cplx rp = (n * ci - ct) / (n * ci + ct);
    return 0.5 * (std::norm(rs) + std::norm(rp));
}

// Brute-force trapezoid over (ln nu, theta).
inline double interface_emissivity(double T, const materials::RefractiveIndexTable& table, materials::CornerSelector corner) {
    const double c0 = constants::speed_of_light;
    const double lo = std::max(radiometry::frequency_for_reduced(1e-3, T), c0 / table.wavelength_hi());
    const double hi = std::min(radiometry::frequency_for_reduced(50.0, T), c0 / table.wavelength_lo());
    const int nu_steps = 6000, th_steps = 300;
    const double du = std::log(hi / lo) / nu_steps, dth = 0.5 * std::numbers::pi / th_steps;
    double total = 0.0;
    for (int i = 0; i <= nu_steps; ++i) {
        const double nu = lo * std::exp(i * du);
        const cplx n = table.nk_at(c0 / nu, corner);
        double angular = 0.0;
        for (int j = 0; j <= th_steps; ++j) {
            const double th = j * dth;
            const double w = (j == 0 || j == th_steps) ? 0.5 : 1.0;
            angular += w * (1.0 - reflectivity_snell(th, n)) * std::cos(th) * std::sin(th);
        }
        angular *= 2.0 * dth;
        const double w = (i == 0 || i == nu_steps) ? 0.5 : 1.0;
        total += w * angular * radiometry::planck_spectral_power(nu, T) * nu;
    }
    return total * du / radiometry::blackbody_power(T);
}

}  // namespace oracle
