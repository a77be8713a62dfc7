#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "nanotherm/materials.hpp"

namespace nanotherm::radiometry {

/// hemispherical spectral emissive power of a black body, W s / m^2 (per Hz)
double planck_spectral_power(double frequency, double temperature);

/// sigma_B T^4
double blackbody_power(double temperature);

/// Frequency with h nu / (k_B T) = x.
double frequency_for_reduced(double reduced, double temperature);

/// Reduced-frequency window [x_lo, x_hi] over which Planck integrals are evaluated.
struct PlanckWindow {
    double reduced_lo = 1e-3;
    double reduced_hi = 50.0;
};

/// Fraction of sigma_B T^4 emitted below frequency nu.
double planck_fraction_below(double frequency, double temperature);

/// Numerical integral of P_nu over the window (adaptive Gauss-Kronrod in ln nu).
double planck_integral(double temperature, const PlanckWindow& window = {});

/// Unpolarised Fresnel reflectivity of a vacuum / n2 interface at polar angle theta.
double fresnel_reflectivity(double theta, std::complex<double> n2);

/// 2 int_0^{pi/2} (1 - R) cos(theta) sin(theta) d theta with a 64-point Gauss-Legendre rule.
double interface_spectral_emissivity(std::complex<double> n2);

/// Integration controls for the interface emissivity.
struct InterfaceOptions {
    PlanckWindow window;
    double relative_tolerance = 1e-9;
    /// Largest fraction of sigma_B T^4 allowed outside the table's spectral coverage.
    double max_uncovered_fraction = 1e-6;
};

/// Hemispherical total emissivity of a flat silica-vacuum interface at temperature T.
double interface_hemispherical_emissivity(double temperature, const materials::RefractiveIndexTable& table,
                                          materials::CornerSelector corner, const InterfaceOptions& options = {});

/// Spectral interface emissivity sampled once on Gauss nodes of every table interval,
/// so that eps(T) becomes a weighted sum. Agrees with the adaptive routine to ~1e-7.
class InterfaceEmissivitySpectrum {
public:
    InterfaceEmissivitySpectrum(const materials::RefractiveIndexTable& table, materials::CornerSelector corner,
                                const InterfaceOptions& options = {});

    double hemispherical(double temperature) const;
    materials::CornerSelector corner() const { return corner_; }

private:
    std::vector<double> nu_, weight_, eps_;  // weight includes the d(ln nu) Jacobian
    double nu_lo_ = 0.0, nu_hi_ = 0.0;
    materials::CornerSelector corner_;
    InterfaceOptions options_;
};

/// Net power eps(T) sigma T^4 A - eps(T0) sigma T0^4 A.
double interface_radiated_power(double temperature, double ambient, double area,
                                const materials::RefractiveIndexTable& table, materials::CornerSelector corner,
                                const InterfaceOptions& options = {});

struct InterfaceEmissivityBand {
    std::vector<double> temperatures;
    std::vector<double> eps_min, eps_max;  // pointwise extrema over the four corners
};

InterfaceEmissivityBand interface_emissivity_band(const std::vector<double>& temperatures,
                                                  const materials::RefractiveIndexTable& table,
                                                  const InterfaceOptions& options = {});

/// Writes `T_K,eps_min,eps_max` rows.
void write_emissivity_band(std::ostream& out, const InterfaceEmissivityBand& band);

}  // namespace nanotherm::radiometry
