#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nanotherm/cylinder_fed.hpp"
#include "nanotherm/fiber_optics.hpp"
#include "nanotherm/materials.hpp"
#include "nanotherm/numerics.hpp"

namespace nanotherm::thermal {

enum class Radiator { Fed, PlanckInterface, None };

std::string to_string(Radiator radiator);
/// "fed", "planck" (or "planck-interface"), "none"; throws ConfigError.
Radiator parse_radiator(const std::string& text);

inline constexpr double kAmbient = 294.0;

/// Temperature and radius sampling of the radiated-power tables.
struct PowerTableGrid {
    double t_lo = 250.0, t_hi = 3000.0, t_step = 25.0;
    int radii = 24;                 // log-spaced over the profile's radius range, plus the waist radius
    int probes = 3;                 // geometric midpoints checked against a direct computation
    double probe_tolerance = 1e-2;  // largest relative interpolation error accepted at a probe

    std::vector<double> temperatures() const;
};

struct ProbeCheck {
    double radius = 0.0;
    double max_relative_error = 0.0;
};

/// Net radiated power per unit length H(a_i, T) - H(a_i, T0) for every node of a profile.
class RadiationModel {
public:
    RadiationModel() = default;

    /// Cylinder emission from spectral emissivities at `grid.radii` log-spaced radii (plus the waist radius),
    /// interpolated linearly in (ln a, ln P) and cubically in (ln T, ln P).
    static RadiationModel fed(std::span<const double> node_radii, double waist_radius,
                              const materials::RefractiveIndexTable& table, materials::CornerSelector corner,
                              double ambient, const PowerTableGrid& grid, fed::EmissivityStore& store,
                              const fed::EmissivityOptions& options = {}, int threads = 1);
    /// Flat-interface emissivity applied to the local surface 2 pi a per unit length.
    static RadiationModel planck(std::span<const double> node_radii, const materials::RefractiveIndexTable& table,
                                 materials::CornerSelector corner, double ambient, const PowerTableGrid& grid);
    static RadiationModel none(std::size_t nodes, double ambient);

    Radiator kind() const { return kind_; }
    std::size_t size() const { return node_curve_.size(); }
    double ambient() const { return ambient_; }
    double t_lo() const { return t_lo_; }
    double t_hi() const { return t_hi_; }

    /// Net power per length and its temperature derivative. CoverageError outside [t_lo, t_hi].
    std::pair<double, double> net(std::size_t node, double temperature) const;
    /// Emitted (not net) power per length at node.
    double emitted(std::size_t node, double temperature) const;

    const std::vector<double>& table_radii() const { return table_radii_; }
    const std::vector<ProbeCheck>& probes() const { return probes_; }

private:
    Radiator kind_ = Radiator::None;
    double ambient_ = kAmbient, t_lo_ = 0.0, t_hi_ = 0.0;
    std::vector<numerics::CubicHermite> curves_;  // ln P against ln T
    std::vector<double> curve_ambient_;
    std::vector<std::size_t> node_curve_;
    std::vector<double> node_scale_;
    std::vector<double> table_radii_;
    std::vector<ProbeCheck> probes_;
};

/// Piecewise-constant heating power P_heat(t), the sum of all active pulses on [t_on, t_off).
class HeatingSchedule {
public:
    struct Pulse {
        double t_on = 0.0, t_off = 0.0, power = 0.0;
    };

    HeatingSchedule() = default;
    explicit HeatingSchedule(std::vector<Pulse> pulses);
    static HeatingSchedule single(double t_on, double t_off, double power);

    double power(double time) const;
    double peak() const;
    /// Sorted distinct switch times.
    std::vector<double> breakpoints() const;
    const std::vector<Pulse>& pulses() const { return pulses_; }

private:
    std::vector<Pulse> pulses_;
};

struct StepControls {
    double t_end = 2.0;
    double rtol = 1e-4;
    double atol = 1e-3;           // K
    double dt_initial = 1e-5;
    double dt_max = 2e-2;
    double dt_min = 1e-12;
    std::size_t max_steps = 200000;
    double budget_tolerance = 1e-2;  // accepted energy-budget residual, fraction of the reference power
};

struct SimulationConfig {
    fiber::RadiusProfile profile;
    Radiator radiator = Radiator::Fed;
    materials::CornerSelector corner{materials::Bound::Min, materials::Bound::Min};
    double eta_abs = 2e-3;
    HeatingSchedule schedule = HeatingSchedule::single(0.0, 1.0, 32.7e-3);
    double pressure = 0.0;  // Pa
    double ambient = kAmbient;
    fiber::HeatingModel heating = fiber::HeatingModel::Surface;
    bool conduction = true;
    std::vector<double> initial_temperature;  // empty: ambient everywhere
    StepControls steps;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Energy bookkeeping over one accepted step, all in W (step averages).
struct BudgetRecord {
    double time = 0.0;  // end of step
    double dt = 0.0;
    double stored = 0.0;
    double absorbed = 0.0;
    double radiated = 0.0;
    double gas = 0.0;
    double residual = 0.0;  // |stored - (absorbed - radiated - gas)| / reference power
};

struct TemperatureField {
    std::vector<double> times;
    std::vector<double> z;
    std::vector<std::vector<double>> temperature;  // [time][node]
    std::vector<BudgetRecord> budget;
    double ambient = kAmbient;
    double reference_power = 0.0;  // eta_abs * peak heating power, or 1 W without heating
    std::size_t accepted = 0, rejected = 0;
    bool extrapolated = false;     // material properties evaluated outside their validated range
    double max_temperature = 0.0;
    double gas_validity_pressure = 0.1;  // Pa; the free-molecular gas term overestimates cooling above it
    bool gas_beyond_validity = false;

    double max_budget_residual() const;
    /// Temperature trace of one node over all times.
    std::vector<double> node_trace(std::size_t node) const;
    /// Long format `time_s,z_m,T_K`.
    void write_csv(std::ostream& out) const;
    /// `z_m,T_K` at one stored time.
    void write_snapshot(std::ostream& out, std::size_t time_index) const;
};

/// Method-of-lines system on the profile grid: finite volumes with insulated ends, node enthalpy as state.
class ThermalSystem {
public:
    ThermalSystem(SimulationConfig config, materials::SilicaThermalProperties props, materials::GasProperties gas,
                  const RadiationModel& radiation);

    /// dT/dt at every node for heating power P_heat.
    std::vector<double> rhs(const std::vector<double>& temperature, double heating_power) const;
    /// Per-node terms in W/m: radiated (net), gas, heating.
    struct Terms {
        double absorbed = 0.0, radiated = 0.0, gas = 0.0;  // W, integrated over the grid
    };
    Terms totals(const std::vector<double>& temperature, double heating_power) const;

    TemperatureField solve() const;
    /// Time-independent field for a constant absorbed power [W] (pseudo-transient continuation).
    /// Converged when no node moves by more than `tolerance` kelvin in a full Newton step.
    std::vector<double> steady_state(double absorbed_power, double tolerance = 1e-6) const;

    const SimulationConfig& config() const { return config_; }
    const std::vector<double>& heating_shape() const { return shape_; }
    double node_enthalpy(std::size_t node, double temperature) const;
    double total_enthalpy(const std::vector<double>& temperature) const;

private:
    struct Eval;
    void evaluate(const std::vector<double>& temperature, double heating_power, Eval& out, bool jacobian) const;
    double enthalpy_density(double temperature) const;  // J/kg relative to the ambient
    double temperature_from_enthalpy(double e) const;

    SimulationConfig config_;
    materials::SilicaThermalProperties props_;
    materials::GasProperties gas_;
    const RadiationModel* radiation_;
    std::vector<double> mass_;       // kg per node volume
    std::vector<double> width_;      // m per node
    std::vector<double> shape_;      // W/m per W absorbed
    std::vector<double> face_area_;  // m^2 between node i and i+1
    std::vector<double> cp_t_, cp_e_;  // specific heat nodes and cumulative enthalpy at them
    double gas_coefficient_ = 0.0;
};

/// Temperature where net radiated power per length equals `absorbed_per_length` at one node, to 1e-3 K.
/// CoverageError when the power exceeds what the table range can radiate.
double equilibrium_temperature(double absorbed_per_length, const RadiationModel& model, std::size_t node = 0);

}  // namespace nanotherm::thermal
