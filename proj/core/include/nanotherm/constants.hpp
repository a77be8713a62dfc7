#pragma once

#include <numbers>

namespace nanotherm::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;        // m/s
inline constexpr double planck = 6.62607015e-34;             // J s
inline constexpr double boltzmann = 1.380649e-23;            // J/K
inline constexpr double avogadro = 6.02214076e23;            // 1/mol
inline constexpr double gas_constant = boltzmann * avogadro; // J/(mol K)
inline constexpr double standard_gravity = 9.80665;          // m/s^2

/// Stefan-Boltzmann constant from its defining expression 2 pi^5 k^4 / (15 h^3 c^2).
inline constexpr double stefan_boltzmann =
    2.0 * pi * pi * pi * pi * pi * boltzmann * boltzmann * boltzmann * boltzmann /
    (15.0 * planck * planck * planck * speed_of_light * speed_of_light);

inline constexpr double pascal_per_mbar = 100.0;

}  // namespace nanotherm::constants
