#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <vector>

#include "nanotherm/materials.hpp"

namespace nanotherm::fiber {

/// Probe laser vacuum wavelength and the cladding index there.
inline constexpr double kProbeWavelength = 852e-9;
inline constexpr double kProbeIndex = 1.4525;
/// Optical path change between successive Fabry-Perot transmission peaks.
inline constexpr double kReadoutStep = kProbeWavelength / 2.0;

/// Three linear sections, an exponential section and a flat waist, mirrored about the waist centre.
/// The exponential section a = r3 exp(-s / L_exp) starts where its slope equals tan(theta3), so r3 = tan(theta3) L_exp.
struct TaperParameters {
    double theta1 = 5e-3, theta2 = 2e-3, theta3 = 4e-3;  // half-angles, rad
    double r1 = 40e-6, r2 = 15e-6;                        // radii at the section transitions, m
    double a_waist = 250e-9;
    double L_waist = 10e-3;
    double r_clad = 62.5e-6;
    double L_exp = 2e-3;

    static TaperParameters tof1();
    static TaperParameters tof2();

    double r3() const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// Radius at distance d from the waist centre (any sign).
    double radius_at(double d) const;
};

struct ProfileGrid {
    double dz = 0.1e-3;
    double margin = 10e-3;  // extent beyond each end of the waist; L_sim = L_waist + 2 margin
};

/// Fibre radius on a uniform axial grid.
class RadiusProfile {
public:
    RadiusProfile() = default;
    /// Validates a uniform, increasing grid with positive radii.
    RadiusProfile(std::vector<double> z, std::vector<double> radius);

    const std::vector<double>& z() const { return z_; }
    const std::vector<double>& radius() const { return a_; }
    std::size_t size() const { return z_.size(); }
    double dz() const { return dz_; }
    double length() const { return z_.back() - z_.front(); }
    double min_radius() const;
    /// Trapezoid weights for int f dz.
    std::vector<double> trapezoid_weights() const;
    /// Index of the node closest to the grid centre.
    std::size_t center_index() const { return z_.size() / 2; }
    std::uint64_t hash() const;

private:
    std::vector<double> z_, a_;
    double dz_ = 0.0;
};

RadiusProfile build_radius_profile(const TaperParameters& params, const ProfileGrid& grid = {});

/// Text form: `z_m,radius_m` rows after optional `#` comments.
void write_profile(std::ostream& out, const RadiusProfile& profile);
RadiusProfile read_profile(std::istream& in);
RadiusProfile read_profile(const std::filesystem::path& path);

struct ModeSolution {
    double radius = 0.0;
    double index = 0.0;       // fibre index at the probe wavelength
    double wavelength = 0.0;
    double V = 0.0;
    double U = 0.0, W = 0.0;  // transverse parameters inside and outside, U^2 + W^2 = V^2
    double beta = 0.0;        // 1/m
    double n_eff = 0.0;
    double n_eff_minus_one = 0.0;  // resolved separately for weakly guided modes
    /// Circumference times the azimuthally averaged axial Poynting flux just outside the surface,
    /// per unit guided power.
    double s_surf = 0.0;
    /// Fraction of the guided power travelling inside the fibre.
    double core_fraction = 0.0;
};

/// Fundamental HE11 mode of a bare cylinder of index n in vacuum.
/// Exact step-index eigenvalue equation for azimuthal order 1, restricted to U < j_{0,1}.
ModeSolution solve_he11(double radius, double index = kProbeIndex, double wavelength = kProbeWavelength);

/// Partial derivatives of n_eff with respect to the fibre index and radius.
struct ModeDerivatives {
    double radius = 0.0;
    double index = 0.0;
    double n_eff = 0.0;
    double dneff_dn = 0.0;
    double dneff_da = 0.0;  // 1/m
};

/// Central differences of solve_he11 with relative step `step`; checked against the 2*step estimate.
ModeDerivatives mode_derivatives(double radius, double index = kProbeIndex, double wavelength = kProbeWavelength,
                                 double step = 1e-5);

/// dn_eff/dT at temperature T for a mode evaluated at the room-temperature index.
double dneff_dT(const ModeDerivatives& mode, double temperature, const materials::SilicaThermalProperties& props);
double dneff_dT(double radius, double temperature, const materials::SilicaThermalProperties& props,
                double index = kProbeIndex, double wavelength = kProbeWavelength);

/// Thread-safe memo of mode derivatives keyed by radius.
class ModeCache {
public:
    explicit ModeCache(double index = kProbeIndex, double wavelength = kProbeWavelength);
    ModeDerivatives derivatives(double radius);
    ModeSolution mode(double radius);
    std::size_t size() const;

private:
    double index_, wavelength_;
    mutable std::mutex mutex_;
    std::map<double, ModeDerivatives> derivs_;
    std::map<double, ModeSolution> modes_;
};

enum class HeatingModel { Surface, Volume };

/// Absorbed heating power per unit length at each profile node, normalised so that the trapezoid
/// integral over the profile equals `absorbed_power`.
std::vector<double> heating_profile(const RadiusProfile& profile, double absorbed_power,
                                    HeatingModel model = HeatingModel::Surface, ModeCache* cache = nullptr);

/// Optical path change from a temperature field on the profile grid.
class PathLengthModel {
public:
    PathLengthModel(const RadiusProfile& profile, materials::SilicaThermalProperties props, double ambient,
                    ModeCache* cache = nullptr);

    /// Trapezoid sum of dn_eff/dT(a_i, (T0 + T_i) / 2) (T_i - T0) dz. Throws DomainError on size mismatch.
    double delta_l_opt(const std::vector<double>& temperatures) const;

    const std::vector<ModeDerivatives>& modes() const { return modes_; }
    double ambient() const { return ambient_; }

private:
    std::vector<ModeDerivatives> modes_;
    std::vector<double> weights_;
    materials::SilicaThermalProperties props_;
    double ambient_;
};

double optical_path_change(const std::vector<double>& temperatures, const RadiusProfile& profile,
                           const materials::SilicaThermalProperties& props, double ambient);

struct ReadoutPoint {
    double time = 0.0;
    double value = 0.0;  // m, relative to the start of the trace
    double error = 0.0;  // m
};

struct Staircase {
    std::vector<ReadoutPoint> steps;  // one point per transmission peak
    ReadoutPoint augmentation;        // last level +- step/2 with error step/2
};

/// Peak counting of a continuous trace. Levels are integer multiples of `step` relative to the
/// first sample; a level changes when the trace reaches the next multiple in either direction,
/// at the linearly interpolated crossing time.
Staircase quantize_readout(const std::vector<double>& times, const std::vector<double>& values,
                           double step = kReadoutStep);

}  // namespace nanotherm::fiber
