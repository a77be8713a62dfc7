#include "nanotherm/radiometry.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/numerics.hpp"

namespace nanotherm::radiometry {

namespace c = constants;

double planck_spectral_power(double frequency, double temperature) {
    if (!(frequency > 0.0)) throw DomainError("planck_spectral_power: frequency must be positive");
    if (temperature == 0.0) return 0.0;
    if (!(temperature > 0.0)) throw DomainError("planck_spectral_power: temperature must be positive");
    const double x = c::planck * frequency / (c::boltzmann * temperature);
    if (x > 700.0) return 0.0;
    const double prefactor = 2.0 * c::pi * frequency * frequency / (c::speed_of_light * c::speed_of_light);
    return prefactor * c::planck * frequency / std::expm1(x);
}

double blackbody_power(double temperature) {
    const double t2 = temperature * temperature;
    return c::stefan_boltzmann * t2 * t2;
}

double frequency_for_reduced(double reduced, double temperature) {
    return reduced * c::boltzmann * temperature / c::planck;
}

double planck_fraction_below(double frequency, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("planck_fraction_below: temperature must be positive");
    if (frequency <= 0.0) return 0.0;
    const double x = c::planck * frequency / (c::boltzmann * temperature);
    const double norm = 15.0 / (c::pi * c::pi * c::pi * c::pi);
    if (x < 0.1) {
        // int_0^x t^3/(e^t - 1) dt, Bernoulli expansion
        const double x2 = x * x, x3 = x2 * x;
        return norm * x3 * (1.0 / 3.0 - x / 8.0 + x2 / 60.0 - x2 * x2 / 5040.0 + x2 * x2 * x2 / 272160.0);
    }
    double tail = 0.0;
    for (int n = 1; n < 100000; ++n) {
        const double dn = n;
        const double term = std::exp(-dn * x) * (x * x * x / dn + 3 * x * x / (dn * dn) + 6 * x / (dn * dn * dn) +
                                                 6 / (dn * dn * dn * dn));
        tail += term;
        if (term < 1e-17 * tail) break;
    }
    return std::clamp(1.0 - norm * tail, 0.0, 1.0);
}

namespace {

template <class F>
double integrate_log_frequency(F&& spectral, double nu_lo, double nu_hi, double rel_tol, unsigned max_depth = 20) {
    auto integrand = [&](double u) {
        const double nu = std::exp(u);
        return spectral(nu) * nu;
    };
    double error = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, std::log(nu_lo), std::log(nu_hi),
                                                                         max_depth, rel_tol, &error);
}

}  // namespace

double planck_integral(double temperature, const PlanckWindow& window) {
    if (!(temperature > 0.0)) throw DomainError("planck_integral: temperature must be positive");
    const double lo = frequency_for_reduced(window.reduced_lo, temperature);
    const double hi = frequency_for_reduced(window.reduced_hi, temperature);
    return integrate_log_frequency([&](double nu) { return planck_spectral_power(nu, temperature); }, lo, hi, 1e-12);
}

double fresnel_reflectivity(double theta, std::complex<double> n2) {
    if (!(theta >= 0.0 && theta <= c::pi / 2)) throw DomainError("fresnel_reflectivity: theta outside [0, pi/2]");
    const double ct = std::cos(theta), st = std::sin(theta);
    const std::complex<double> root = std::sqrt(n2 * n2 - st * st);
    const std::complex<double> n22 = n2 * n2;
    const double rs = std::norm((ct - root) / (ct + root));
    const double rp = std::norm((n22 * ct - root) / (n22 * ct + root));
    const double r = 0.5 * (rs + rp);
    return std::isfinite(r) ? std::clamp(r, 0.0, 1.0) : 1.0;
}

double interface_spectral_emissivity(std::complex<double> n2) {
    const auto& rule = numerics::gauss_legendre(64);
    const double half = 0.25 * c::pi;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double theta = half * (1.0 + rule.nodes[i]);
        sum += rule.weights[i] * (1.0 - fresnel_reflectivity(theta, n2)) * std::cos(theta) * std::sin(theta);
    }
    return std::clamp(2.0 * half * sum, 0.0, 1.0);
}

namespace {

// Planck window clipped to the table; throws when too much power falls outside.
std::pair<double, double> covered_window(double temperature, double table_lo, double table_hi,
                                         const InterfaceOptions& options) {
    const double window_lo = frequency_for_reduced(options.window.reduced_lo, temperature);
    const double window_hi = frequency_for_reduced(options.window.reduced_hi, temperature);
    const double nu_lo = std::max(window_lo, table_lo);
    const double nu_hi = std::min(window_hi, table_hi);
    double uncovered = 0.0;
    if (nu_lo > window_lo) uncovered += planck_fraction_below(nu_lo, temperature);
    if (nu_hi < window_hi) uncovered += 1.0 - planck_fraction_below(nu_hi, temperature);
    if (uncovered > options.max_uncovered_fraction || !(nu_hi > nu_lo))
        throw CoverageError("Planck window at T = " + numerics::format_double(temperature) +
                            " K exceeds refractive-index coverage (uncovered fraction " +
                            numerics::format_double(uncovered) + ")");
    return {nu_lo, nu_hi};
}

}  // namespace

double interface_hemispherical_emissivity(double temperature, const materials::RefractiveIndexTable& table,
                                          materials::CornerSelector corner, const InterfaceOptions& options) {
    if (!(temperature > 0.0)) throw DomainError("interface emissivity: temperature must be positive");
    const auto [nu_lo, nu_hi] = covered_window(temperature, c::speed_of_light / table.wavelength_hi(),
                                               c::speed_of_light / table.wavelength_lo(), options);

    auto spectral = [&](double nu) {
        const auto n2 = table.nk_at(c::speed_of_light / nu, corner);
        return interface_spectral_emissivity(n2) * planck_spectral_power(nu, temperature);
    };
    // The integrand has kinks at the table nodes; integrate node to node.
    std::vector<double> breaks{nu_lo};
    for (auto it = table.samples().rbegin(); it != table.samples().rend(); ++it) {
        const double nu = c::speed_of_light / it->wavelength;
        if (nu > nu_lo && nu < nu_hi) breaks.push_back(nu);
    }
    breaks.push_back(nu_hi);
    double emitted = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
        emitted += integrate_log_frequency(spectral, breaks[i], breaks[i + 1], options.relative_tolerance);
    return std::clamp(emitted / blackbody_power(temperature), 0.0, 1.0);
}

InterfaceEmissivitySpectrum::InterfaceEmissivitySpectrum(const materials::RefractiveIndexTable& table,
                                                         materials::CornerSelector corner,
                                                         const InterfaceOptions& options)
    : nu_lo_(c::speed_of_light / table.wavelength_hi()), nu_hi_(c::speed_of_light / table.wavelength_lo()),
      corner_(corner), options_(options) {
    const auto& rule = numerics::gauss_legendre(8);
    const auto& samples = table.samples();
    for (std::size_t i = samples.size() - 1; i-- > 0;) {
        const double u0 = std::log(c::speed_of_light / samples[i + 1].wavelength);
        const double u1 = std::log(c::speed_of_light / samples[i].wavelength);
        const double mid = 0.5 * (u0 + u1), half = 0.5 * (u1 - u0);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double nu = std::exp(mid + half * rule.nodes[k]);
            nu_.push_back(nu);
            weight_.push_back(rule.weights[k] * half * nu);
            eps_.push_back(interface_spectral_emissivity(table.nk_at(c::speed_of_light / nu, corner)));
        }
    }
}

double InterfaceEmissivitySpectrum::hemispherical(double temperature) const {
    if (!(temperature > 0.0)) throw DomainError("interface emissivity: temperature must be positive");
    covered_window(temperature, nu_lo_, nu_hi_, options_);
    // whole table intervals are summed; power outside the window is below 1e-6 of the total
    const double cutoff = frequency_for_reduced(700.0, temperature);
    double emitted = 0.0;
    for (std::size_t i = 0; i < nu_.size() && nu_[i] < cutoff; ++i)
        emitted += weight_[i] * eps_[i] * planck_spectral_power(nu_[i], temperature);
    return std::clamp(emitted / blackbody_power(temperature), 0.0, 1.0);
}

double interface_radiated_power(double temperature, double ambient, double area,
                                const materials::RefractiveIndexTable& table, materials::CornerSelector corner,
                                const InterfaceOptions& options) {
    if (!(temperature > 0.0 && ambient > 0.0)) throw DomainError("interface power: temperatures must be positive");
    if (temperature == ambient) return 0.0;
    const double hot = interface_hemispherical_emissivity(temperature, table, corner, options);
    const double cold = interface_hemispherical_emissivity(ambient, table, corner, options);
    return (hot * blackbody_power(temperature) - cold * blackbody_power(ambient)) * area;
}

InterfaceEmissivityBand interface_emissivity_band(const std::vector<double>& temperatures,
                                                  const materials::RefractiveIndexTable& table,
                                                  const InterfaceOptions& options) {
    InterfaceEmissivityBand band;
    band.temperatures = temperatures;
    for (double T : temperatures) {
        double lo = 1.0, hi = 0.0;
        for (const auto& corner : materials::CornerSelector::all()) {
            const double e = interface_hemispherical_emissivity(T, table, corner, options);
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        band.eps_min.push_back(lo);
        band.eps_max.push_back(hi);
    }
    return band;
}

void write_emissivity_band(std::ostream& out, const InterfaceEmissivityBand& band) {
    out << "T_K,eps_min,eps_max\n";
    for (std::size_t i = 0; i < band.temperatures.size(); ++i)
        out << numerics::format_double(band.temperatures[i]) << ',' << numerics::format_double(band.eps_min[i]) << ','
            << numerics::format_double(band.eps_max[i]) << '\n';
}

}  // namespace nanotherm::radiometry
