#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nanotherm::materials {

enum class Bound { Min, Max };

/// One of the four (n, k) combinations of the refractive-index band.
struct CornerSelector {
    Bound n = Bound::Min;
    Bound k = Bound::Min;

    static std::array<CornerSelector, 4> all();
    /// "n_min,k_max" style label.
    std::string label() const;
    /// Inverse of label(); also accepts "nmin_kmax". Throws ConfigError.
    static CornerSelector parse(const std::string& text);
    friend bool operator==(const CornerSelector&, const CornerSelector&) = default;
};

struct NkSample {
    double wavelength = 0.0;  // m
    double n_min = 0.0, n_max = 0.0, k_min = 0.0, k_max = 0.0;
    std::string source;
};

/// Wavelength-sampled complex refractive index with min/max envelope.
class RefractiveIndexTable {
public:
    /// Validates ordering and envelope invariants.
    explicit RefractiveIndexTable(std::vector<NkSample> samples);

    const std::vector<NkSample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    double wavelength_lo() const { return samples_.front().wavelength; }
    double wavelength_hi() const { return samples_.back().wavelength; }
    bool covers(double wavelength) const;

    /// n + ik at a wavelength. Throws CoverageError outside the table.
    std::complex<double> nk_at(double wavelength, CornerSelector corner) const;
    /// Dielectric function (n + ik)^2; mu = 1.
    std::complex<double> dielectric_at(double wavelength, CornerSelector corner) const;

    /// Copy with k_min and k_max raised by `k_eff` everywhere.
    RefractiveIndexTable with_extinction_offset(double k_eff) const;

    /// Content hash over the numeric columns.
    std::uint64_t content_hash() const { return hash_; }

private:
    std::vector<NkSample> samples_;
    std::vector<double> log_wavelength_;
    std::uint64_t hash_ = 0;
};

RefractiveIndexTable load_nk_table(std::istream& in);
RefractiveIndexTable load_nk_table(const std::filesystem::path& path);
void write_nk_table(std::ostream& out, const RefractiveIndexTable& table);

/// Required spectral span of the shipped dataset.
inline constexpr double kCoverageLo = 30e-9;
inline constexpr double kCoverageHi = 2e-3;
/// Throws CoverageError if the table does not span [kCoverageLo, kCoverageHi].
void require_full_coverage(const RefractiveIndexTable& table);

/// Directory holding the shipped datasets. NANOTHERM_DATA_DIR overrides the built-in path.
std::filesystem::path data_directory();
RefractiveIndexTable silica_dataset();

/// A value with a flag marking evaluation outside the validated range.
struct FlaggedValue {
    double value = 0.0;
    bool extrapolated = false;
};

enum class Extrapolation { Hold, Linear };

/// Piecewise-linear property table T -> value with hard validation bounds.
class PropertyTable {
public:
    PropertyTable() = default;
    PropertyTable(std::string name, std::vector<double> temperatures, std::vector<double> values,
                  double lower_bound, double upper_bound, Extrapolation above);

    /// Value at T; outside the table the value is held (below) and held or linearly extended (above).
    FlaggedValue at(double temperature) const;
    double operator()(double temperature) const { return at(temperature).value; }
    /// Slope dvalue/dT of the interpolant.
    double slope(double temperature) const;

    const std::string& name() const { return name_; }
    const std::vector<double>& temperatures() const { return t_; }
    const std::vector<double>& values() const { return v_; }
    double lower_bound() const { return lo_; }
    double upper_bound() const { return hi_; }

private:
    std::string name_;
    std::vector<double> t_, v_;
    double lo_ = 0.0, hi_ = 0.0;
    Extrapolation above_ = Extrapolation::Hold;
};

PropertyTable load_property_table(std::istream& in, const std::string& name, double lower_bound,
                                  double upper_bound, Extrapolation above);
PropertyTable load_property_table(const std::filesystem::path& path, const std::string& name,
                                  double lower_bound, double upper_bound, Extrapolation above);

struct SilicaThermalProperties {
    PropertyTable specific_heat;  // J/(kg K)
    PropertyTable conductivity;   // W/(m K)
    PropertyTable expansion;      // 1/K
    double density = 2200.0;      // kg/m^3
    double strain_optic = -0.206;
    double poisson = -0.168;

    /// Thermo-optic coefficient dn/dT = 9.627e-6 + 7.74e-9 (T - 299 K), flagged above 1570 K.
    static FlaggedValue thermo_optic(double temperature);

    /// Shipped tables from data_directory().
    static SilicaThermalProperties load_default();
    std::uint64_t content_hash() const;
};

struct GasProperties {
    double degrees_of_freedom = 6.0;
    double molecular_mass = 4.653e-26;  // kg
    double boltzmann = 1.380649e-23;    // J/K

    /// sqrt(k_B f^2 / (8 pi M T0)); multiply by p (T - T0) 2 pi a for W/m.
    double cooling_coefficient(double ambient_temperature) const;
};

struct ViscosityModel {
    double prefactor = 5.8e-8;            // Pa s
    double activation_energy = 515.4e3;   // J/mol
    double valid_lo = 1400.0, valid_hi = 2500.0;

    /// Arrhenius viscosity; flagged outside [valid_lo, valid_hi].
    FlaggedValue operator()(double temperature) const;
};

}  // namespace nanotherm::materials
