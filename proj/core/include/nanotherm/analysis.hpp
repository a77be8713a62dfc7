#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nanotherm/fiber_optics.hpp"
#include "nanotherm/materials.hpp"
#include "nanotherm/thermal_solver.hpp"

namespace nanotherm::analysis {

// --- time constants -----------------------------------------------------------------------------

struct TimeConstants {
    double rise_10_50 = 0.0;
    double rise_75_90 = 0.0;
    double fall_90_50 = 0.0;
    double fall_25_10 = 0.0;
};

/// Time between the crossings of from * max_value and to * max_value, found by linear interpolation.
/// Rising when to > from. DomainError if a threshold is never reached or the trace is not monotone
/// between the two crossings.
double crossing_interval(const std::vector<double>& times, const std::vector<double>& values, double max_value,
                         double from, double to);

/// Rise times on samples with t <= t_switch, fall times on samples with t >= t_switch.
/// Thresholds are fractions of `max_value`; a non-positive value selects the trace maximum.
TimeConstants extract_time_constants(const std::vector<double>& times, const std::vector<double>& values,
                                     double t_switch, double max_value = 0.0);

/// Piecewise-linear trace through the counted peaks of a readout segment: the segment start,
/// every step and the augmentation point, with values offset by the segment's first sample.
std::pair<std::vector<double>, std::vector<double>> staircase_trace(const fiber::Staircase& staircase,
                                                                    double t_start, double offset);

// --- heating / cooling cycle ------------------------------------------------------------------------

struct CycleResult {
    thermal::TemperatureField field;
    std::vector<double> delta_l;   // m, per stored time
    std::vector<double> t_waist;   // K at the centre node
    double t_switch = 0.0;
    double delta_l_max = 0.0;
    double t_waist_at_max = 0.0;
    fiber::Staircase heating, cooling;
    std::optional<TimeConstants> constants;  // empty when the trace does not allow extraction
    std::string constants_error;
};

/// Solves the system, converts every stored field into a path-length change, counts peaks per
/// segment and extracts time constants. The switch time is the end of the first pulse.
CycleResult run_cycle(const thermal::ThermalSystem& system, const fiber::PathLengthModel& path,
                      double readout_step = fiber::kReadoutStep);

// --- absorbed fraction --------------------------------------------------------------------------------

struct FitPoint {
    double p_heat = 0.0;  // W
    double dl_max = 0.0;  // m
};

/// Header `P_heat_W,dLopt_max_m`, then one row per point; `#` lines are comments. ParseError with row number.
std::vector<FitPoint> read_fit_data(std::istream& in);
void write_fit_data(std::ostream& out, const std::vector<FitPoint>& points);

/// Peak path-length change as a function of absorbed power [W].
using ForwardMap = std::function<double(double absorbed_power)>;

/// Steady-state forward map. The referenced objects must outlive the map.
ForwardMap equilibrium_map(const thermal::ThermalSystem& system, const fiber::PathLengthModel& path);
/// Full-transient forward map: the configuration's schedule rescaled so its peak absorbed power matches.
ForwardMap transient_map(thermal::SimulationConfig config, materials::SilicaThermalProperties props,
                         materials::GasProperties gas, const thermal::RadiationModel& radiation,
                         const fiber::PathLengthModel& path);

struct FitOptions {
    double eta_lo = 1e-5;
    double eta_hi = 1.0;
    int scan_points = 41;       // log-spaced objective scan that brackets the minimum
    int refine_bits = 40;
};

struct SetFit {
    std::string label;
    double eta = 0.0;
    std::vector<double> residuals;  // model - data per point, m
    double rms = 0.0;
    std::vector<std::pair<double, double>> scan;  // (eta, sum of squares); infinite where the model fails
};

struct EtaFit {
    double eta_min = 0.0, eta_max = 0.0, eta_mean = 0.0;
    std::vector<SetFit> sets;
};

/// Least-squares eta for one forward map. ConvergenceError if the scan is not unimodal or the
/// minimum sits on the search boundary.
SetFit fit_eta_single(const std::vector<FitPoint>& data, const ForwardMap& model, const std::string& label,
                      const FitOptions& options = {});
/// Independent fit per parameter set; the band spans the extremal results.
EtaFit fit_eta(const std::vector<FitPoint>& data, const std::vector<std::pair<std::string, ForwardMap>>& models,
               const FitOptions& options = {});

// --- parameter sets -------------------------------------------------------------------------------------

/// One combination of radius-profile scaling and refractive-index corner.
struct ParameterSet {
    std::string label;
    double radius_scale = 1.0;
    materials::CornerSelector corner;
};

/// Corners with the lowest and highest emitted power of a cylinder of radius `radius` at `temperature`.
std::pair<materials::CornerSelector, materials::CornerSelector> extremal_corners(
    const materials::RefractiveIndexTable& table, double radius, double temperature, fed::EmissivityStore& store,
    const thermal::PowerTableGrid& grid = {});

/// Radius profile scaled by 1 -/+ tolerance, each with the low- and high-emission corner.
std::vector<ParameterSet> parameter_sets(materials::CornerSelector low, materials::CornerSelector high,
                                         double radius_tolerance = 0.1);
fiber::RadiusProfile scale_profile(const fiber::RadiusProfile& profile, double factor);

// --- temperature scale ------------------------------------------------------------------------------------

struct ScaleSample {
    double dl_max = 0.0;   // m
    double t_waist = 0.0;  // K at the waist centre when dl_max is reached
};
using ScaleRun = std::function<ScaleSample(double p_heat)>;

ScaleSample equilibrium_sample(const thermal::ThermalSystem& system, const fiber::PathLengthModel& path,
                               double absorbed_power);

struct ScalePoint {
    double p_heat = 0.0;
    double dl_low = 0.0, dl_high = 0.0;
    double t_waist_min = 0.0, t_waist_max = 0.0;
    double t_mean = 0.0, t_half = 0.0;
};

enum class ScalePhase { Equilibrium, Heating, Cooling };
std::string to_string(ScalePhase phase);

struct TemperatureScale {
    ScalePhase phase = ScalePhase::Equilibrium;
    std::vector<ScalePoint> points;
    /// True when dl and both temperatures increase with P_heat.
    bool monotone() const;
};

/// Runs both extremal parameter sets on every grid power.
TemperatureScale temperature_scale(const std::vector<double>& p_heat, const ScaleRun& extremal_a,
                                   const ScaleRun& extremal_b, ScalePhase phase = ScalePhase::Equilibrium);

/// Waist temperature as a function of the path-length change along one phase of a cycle.
struct PhaseMapping {
    std::vector<double> heating_dl, heating_t;
    std::vector<double> cooling_dl, cooling_t;  // sorted by dl
    /// Linear interpolation; DomainError outside the phase's range.
    double temperature(double dl, ScalePhase phase) const;
};
PhaseMapping phase_mapping(const CycleResult& cycle);

// --- viscous stability ------------------------------------------------------------------------------------

struct StabilityOptions {
    double length = 5e-3;         // L0, m
    double density = 2200.0;      // kg/m^3
    double gravity = 9.80665;     // m/s^2
    double tau_v_fast = 0.5;      // s, measurement-cycle window for the breaking band
    double tau_v_slow = 5.0;
    double tau_s_cycle = 60.0;    // s, strain considered frozen beyond this
    double stress_temperature = 1800.0;  // K
    double search_lo = 800.0, search_hi = 6000.0;
};

double tau_s(const materials::ViscosityModel& viscosity, double temperature, double stress);
double tau_v(const materials::ViscosityModel& viscosity, double temperature, const StabilityOptions& options = {});

struct StabilityReport {
    double temperature = 0.0;
    double tau_s = 0.0, tau_v = 0.0;
    bool viscosity_extrapolated = false;
    double t_break_low = 0.0, t_break_high = 0.0;  // tau_v = tau_v_slow and tau_v_fast
    double t_break = 0.0, t_break_half_width = 0.0;
    double sigma_residual = 0.0;  // Pa, stress with tau_s = tau_s_cycle at stress_temperature
};

StabilityReport viscous_stability(const materials::ViscosityModel& viscosity, double temperature, double stress,
                                  const StabilityOptions& options = {});

}  // namespace nanotherm::analysis
