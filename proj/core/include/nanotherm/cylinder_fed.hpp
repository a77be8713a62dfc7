#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "nanotherm/materials.hpp"

namespace nanotherm::fed {

using cplx = std::complex<double>;

struct TMatrixBlock {
    int l = 0;
    double xi = 0.0;
    cplx perp_perp, par_par, cross;  // cross = T^{perp par} = T^{par perp}
};

/// T-matrix elements of an infinite cylinder for mode l and axial cosine xi.
TMatrixBlock t_matrix(int l, double xi, double frequency, double radius, cplx eps, cplx mu = 1.0);

struct EmissivityOptions {
    double l_tail_tolerance = 1e-6;      // relative weight of the three highest orders
    double xi_relative_tolerance = 1e-5; // successive composite 16-point Gauss-Legendre estimates
    double absolute_floor = 1e-6;        // emissivity units, added to both tolerances
    /// On a temperature-aware grid the floor at nu is raised to power_floor / w(nu), where w is the
    /// peak-normalised Planck weight per unit ln nu over the grid's temperature range.
    double power_floor = 1e-6;
    /// Accepted agreement once xi_max_nodes is reached. Narrow whispering-gallery
    /// resonances of nearly transparent cylinders are not resolvable by any fixed rule.
    double resonance_tolerance = 1e-2;
    int xi_initial_nodes = 16;  // panel count doubles from xi_initial_nodes / 16
    int xi_max_nodes = 65536;
    int l_max = 0;                       // 0: automatic
    int l_max_cap = 20000;
};

struct EmissivityResult {
    double value = 0.0;
    int l_max = 0;
    int xi_nodes = 0;
    double xi_error = 0.0;  // |difference| of the last two xi estimates, emissivity units
};

/// Spectral hemispherical emissivity of a cylinder (mu = 1). Non-negative for Im eps >= 0.
EmissivityResult cylinder_spectral_emissivity(double frequency, double radius, cplx eps,
                                              const EmissivityOptions& options = {});
EmissivityResult cylinder_spectral_emissivity(double frequency, double radius,
                                              const materials::RefractiveIndexTable& table,
                                              materials::CornerSelector corner,
                                              const EmissivityOptions& options = {});

/// Sum over P, l and the xi-integrand at a single polar angle, for cross-checks:
/// returns sum_P sum_l (Re T^PP + |T^PP|^2 + |T^{P Pbar}|^2) at xi = cos(theta) over |l| <= l_max.
double mode_sum(double frequency, double radius, cplx eps, double xi, int l_max);

/// Frequency nodes with quadrature weights for int f(nu) d nu. Immutable after construction.
class FrequencyGrid {
public:
    struct Refinement {
        double nu_lo, nu_hi;
        double panels_per_decade;
    };

    FrequencyGrid() = default;
    /// Rule for int_lower^upper f d nu, serving temperatures in [t_lo, t_hi] (0, 0: unspecified).
    FrequencyGrid(std::vector<double> nodes, std::vector<double> weights, double lower, double upper,
                  double t_lo = 0.0, double t_hi = 0.0);

    /// Gauss nodes on log-spaced panels covering the Planck windows of [t_lo, t_hi],
    /// clipped to the table coverage.
    static FrequencyGrid planck_union(double t_lo, double t_hi, const materials::RefractiveIndexTable& table,
                                      double panels_per_decade = 10.0, int gauss_order = 2,
                                      const std::vector<Refinement>& refinements = {}, double reduced_lo = 1e-3,
                                      double reduced_hi = 50.0);

    const std::vector<double>& frequencies() const { return nu_; }
    const std::vector<double>& weights() const { return w_; }
    std::size_t size() const { return nu_.size(); }
    std::uint64_t hash() const { return hash_; }
    /// Fraction of sigma_B T^4 lying outside [lower, upper].
    double uncovered_fraction(double temperature) const;
    double lower() const { return lo_; }
    double upper() const { return hi_; }
    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }
    /// Largest Planck weight x^4/(e^x-1) at nu over [t_lo, t_hi], relative to its peak; 1 when unspecified.
    double relevance(double frequency) const;

private:
    std::vector<double> nu_, w_;
    double lo_ = 0.0, hi_ = 0.0, t_lo_ = 0.0, t_hi_ = 0.0;
    std::uint64_t hash_ = 0;
};

/// Largest Planck fraction allowed outside a frequency grid when integrating power.
inline constexpr double kMaxUncoveredFraction = 1e-5;

/// Identity of a spectral emissivity curve.
struct EmissivityKey {
    std::uint64_t dataset_hash = 0;
    double radius = 0.0;
    materials::CornerSelector corner;
    std::uint64_t grid_hash = 0;
    std::uint64_t options_hash = 0;

    std::string file_stem() const;
    friend bool operator==(const EmissivityKey&, const EmissivityKey&) = default;
};

std::uint64_t options_hash(const EmissivityOptions& options);

/// Frequency-sampled emissivity for one radius and corner; valid only for that radius.
class SpectralEmissivity {
public:
    SpectralEmissivity(EmissivityKey key, const FrequencyGrid& grid, std::vector<EmissivityResult> samples);

    const EmissivityKey& key() const { return key_; }
    double radius() const { return key_.radius; }
    const std::vector<double>& frequencies() const { return grid_.frequencies(); }
    const FrequencyGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return eps_; }
    const std::vector<EmissivityResult>& samples() const { return samples_; }
    /// Value at nu, piecewise linear in ln nu; zero outside the sampled range.
    double at(double frequency) const;

    /// Emitted power per unit length 2 pi a int eps P_nu d nu at T (not net).
    /// CoverageError when more than kMaxUncoveredFraction of the Planck power lies off the grid.
    double emitted_power_per_length(double temperature) const;
    /// Same with the radius checked against this curve's radius; CacheMismatchError on mismatch.
    double emitted_power_per_length(double temperature, double radius) const;

    void save(std::ostream& out) const;
    /// Reads a saved curve and verifies it matches `expected`; CacheMismatchError otherwise.
    static SpectralEmissivity load(std::istream& in, const EmissivityKey& expected);

private:
    EmissivityKey key_;
    FrequencyGrid grid_;
    std::vector<double> eps_;
    std::vector<EmissivityResult> samples_;
};

/// Parallel over frequency samples; deterministic for any thread count.
SpectralEmissivity compute_spectral_emissivity(double radius, const materials::RefractiveIndexTable& table,
                                               materials::CornerSelector corner, const FrequencyGrid& grid,
                                               const EmissivityOptions& options = {}, int threads = 1);

/// Memory plus optional on-disk store of spectral emissivities.
class EmissivityStore {
public:
    explicit EmissivityStore(std::optional<std::filesystem::path> directory = std::nullopt, bool read = true,
                             bool write = true);

    std::shared_ptr<const SpectralEmissivity> get(double radius, const materials::RefractiveIndexTable& table,
                                                  materials::CornerSelector corner, const FrequencyGrid& grid,
                                                  const EmissivityOptions& options = {}, int threads = 1);

    const std::optional<std::filesystem::path>& directory() const { return dir_; }
    std::size_t computed() const { return computed_; }
    std::size_t loaded() const { return loaded_; }
    std::vector<std::filesystem::path> files_used() const;

private:
    std::optional<std::filesystem::path> dir_;
    bool read_, write_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const SpectralEmissivity>> memory_;
    std::vector<std::filesystem::path> files_;
    std::size_t computed_ = 0, loaded_ = 0;
};

/// Net radiated power per length P(T) - P(T0) on a frequency grid (uncached convenience).
double cylinder_radiated_power_per_length(double temperature, double ambient, double radius,
                                          const materials::RefractiveIndexTable& table,
                                          materials::CornerSelector corner, const FrequencyGrid& grid,
                                          const EmissivityOptions& options = {}, int threads = 1);

/// (H_with - H_without) / H_without for the table with k raised by k_eff (emitted power at T).
double pollutant_deviation(double radius, const materials::RefractiveIndexTable& table,
                           materials::CornerSelector corner, double k_eff, double temperature,
                           const FrequencyGrid& grid, const EmissivityOptions& options = {}, int threads = 1);

/// Emitted power per length sampled on a temperature grid, one curve per radius.
struct RadiatedPowerCurve {
    double radius = 0.0;
    materials::CornerSelector corner;
    std::vector<double> temperatures;
    std::vector<double> power;  // W/m, emitted at T
};

RadiatedPowerCurve radiated_power_curve(const SpectralEmissivity& emissivity, const std::vector<double>& temperatures);

}  // namespace nanotherm::fed
