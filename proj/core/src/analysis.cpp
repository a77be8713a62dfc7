#include "nanotherm/analysis.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/numerics.hpp"
#include "nanotherm/tabular.hpp"

namespace nanotherm::analysis {

namespace {

std::string percent(double fraction) {
    std::ostringstream s;
    s << fraction * 100.0 << " %";
    return s.str();
}

std::string num(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

struct Crossing {
    double time;
    std::size_t index;  // first sample at or beyond the level
};

std::optional<Crossing> first_crossing(const std::vector<double>& t, const std::vector<double>& v, double level,
                                       bool rising) {
    auto beyond = [&](double x) { return rising ? x >= level : x <= level; };
    if (beyond(v.front())) return Crossing{t.front(), 0};
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (beyond(v[k])) {
            const double span = v[k] - v[k - 1];
            const double w = span == 0.0 ? 1.0 : (level - v[k - 1]) / span;
            return Crossing{t[k - 1] + std::clamp(w, 0.0, 1.0) * (t[k] - t[k - 1]), k};
        }
    }
    return std::nullopt;
}

}  // namespace

// --- time constants -----------------------------------------------------------------------------------

double crossing_interval(const std::vector<double>& times, const std::vector<double>& values, double max_value,
                         double from, double to) {
    if (times.size() != values.size() || times.size() < 2)
        throw DomainError("time constants: need at least two samples of equal-length time and value");
    if (!(max_value > 0.0)) throw DomainError("time constants: maximum value must be positive");
    const bool rising = to > from;
    const auto a = first_crossing(times, values, from * max_value, rising);
    if (!a) throw DomainError("threshold " + percent(from) + " never reached");
    const auto b = first_crossing(times, values, to * max_value, rising);
    if (!b) throw DomainError("threshold " + percent(to) + " never reached");
    // the trace must head the same way throughout the crossing region
    const double slack = 1e-9 * max_value;
    for (std::size_t k = a->index + 1; k <= b->index; ++k) {
        const double step = values[k] - values[k - 1];
        if ((rising && step < -slack) || (!rising && step > slack))
            throw DomainError("time constants: trace is not monotone between the " + percent(from) + " and " +
                              percent(to) + " crossings");
    }
    return b->time - a->time;
}

TimeConstants extract_time_constants(const std::vector<double>& times, const std::vector<double>& values,
                                     double t_switch, double max_value) {
    if (times.size() != values.size()) throw DomainError("time constants: times and values differ in length");
    std::vector<double> ht, hv, ct, cv;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] <= t_switch) ht.push_back(times[k]), hv.push_back(values[k]);
        if (times[k] >= t_switch) ct.push_back(times[k]), cv.push_back(values[k]);
    }
    if (!(max_value > 0.0)) max_value = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    TimeConstants tc;
    tc.rise_10_50 = crossing_interval(ht, hv, max_value, 0.10, 0.50);
    tc.rise_75_90 = crossing_interval(ht, hv, max_value, 0.75, 0.90);
    tc.fall_90_50 = crossing_interval(ct, cv, max_value, 0.90, 0.50);
    tc.fall_25_10 = crossing_interval(ct, cv, max_value, 0.25, 0.10);
    return tc;
}

std::pair<std::vector<double>, std::vector<double>> staircase_trace(const fiber::Staircase& staircase,
                                                                    double t_start, double offset) {
    std::vector<double> t{t_start}, v{offset};
    for (const auto& s : staircase.steps) {
        t.push_back(s.time);
        v.push_back(offset + s.value);
    }
    if (staircase.augmentation.time >= t.back()) {
        t.push_back(staircase.augmentation.time);
        v.push_back(offset + staircase.augmentation.value);
    }
    return {t, v};
}

// --- cycle ----------------------------------------------------------------------------------------------

CycleResult run_cycle(const thermal::ThermalSystem& system, const fiber::PathLengthModel& path, double readout_step) {
    CycleResult r;
    const auto& cfg = system.config();
    r.t_switch = cfg.schedule.pulses().empty() ? cfg.steps.t_end : cfg.schedule.pulses().front().t_off;
    r.field = system.solve();
    const std::size_t centre = cfg.profile.center_index();
    r.delta_l.reserve(r.field.times.size());
    for (const auto& row : r.field.temperature) {
        r.delta_l.push_back(path.delta_l_opt(row));
        r.t_waist.push_back(row[centre]);
    }
    const auto peak = std::max_element(r.delta_l.begin(), r.delta_l.end());
    r.delta_l_max = *peak;
    r.t_waist_at_max = r.t_waist[static_cast<std::size_t>(peak - r.delta_l.begin())];

    std::vector<double> ht, hv, ct, cv;
    for (std::size_t k = 0; k < r.field.times.size(); ++k) {
        const double t = r.field.times[k];
        if (t <= r.t_switch) ht.push_back(t), hv.push_back(r.delta_l[k]);
        if (t >= r.t_switch) ct.push_back(t), cv.push_back(r.delta_l[k]);
    }
    r.heating = fiber::quantize_readout(ht, hv, readout_step);
    r.cooling = fiber::quantize_readout(ct, cv, readout_step);
    if (r.delta_l_max > 0.0) {
        try {
            r.constants = extract_time_constants(r.field.times, r.delta_l, r.t_switch, r.delta_l_max);
        } catch (const DomainError& e) {
            r.constants_error = e.what();
        }
    } else {
        r.constants_error = "no path-length change";
    }
    return r;
}

// --- absorbed fraction ------------------------------------------------------------------------------------

std::vector<FitPoint> read_fit_data(std::istream& in) {
    const auto doc = tabular::read_csv(in);
    tabular::require_header(doc.header, {"P_heat_W", "dLopt_max_m"});
    std::vector<FitPoint> out;
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& row = doc.rows[i];
        if (row.size() != 2) throw ParseError("fit data row " + std::to_string(i + 1) + ": expected 2 fields", i + 1);
        const FitPoint p{tabular::parse_number(row[0], i + 1, "P_heat_W"),
                         tabular::parse_number(row[1], i + 1, "dLopt_max_m")};
        if (!(p.p_heat > 0.0))
            throw ParseError("fit data row " + std::to_string(i + 1) + ": P_heat_W must be positive", i + 1);
        out.push_back(p);
    }
    return out;
}

void write_fit_data(std::ostream& out, const std::vector<FitPoint>& points) {
    out << "P_heat_W,dLopt_max_m\n";
    for (const auto& p : points)
        out << numerics::format_double(p.p_heat) << ',' << numerics::format_double(p.dl_max) << '\n';
}

ForwardMap equilibrium_map(const thermal::ThermalSystem& system, const fiber::PathLengthModel& path) {
    return [&system, &path](double absorbed) { return path.delta_l_opt(system.steady_state(absorbed)); };
}

ForwardMap transient_map(thermal::SimulationConfig config, materials::SilicaThermalProperties props,
                         materials::GasProperties gas, const thermal::RadiationModel& radiation,
                         const fiber::PathLengthModel& path) {
    const double peak = config.schedule.peak();
    if (!(peak > 0.0)) throw ConfigError("transient forward map: the schedule has no heating");
    return [config, props, gas, &radiation, &path, peak](double absorbed) {
        auto c = config;
        std::vector<thermal::HeatingSchedule::Pulse> pulses = c.schedule.pulses();
        for (auto& p : pulses) p.power *= absorbed / peak;
        c.schedule = thermal::HeatingSchedule(pulses);
        c.eta_abs = 1.0;
        const auto field = thermal::ThermalSystem(c, props, gas, radiation).solve();
        double best = 0.0;
        for (const auto& row : field.temperature) best = std::max(best, path.delta_l_opt(row));
        return best;
    };
}

SetFit fit_eta_single(const std::vector<FitPoint>& data, const ForwardMap& model, const std::string& label,
                      const FitOptions& options) {
    if (data.size() < 3) throw ConfigError("fit_eta: at least three data points are required");
    if (!(options.eta_lo > 0.0 && options.eta_hi > options.eta_lo && options.eta_hi <= 1.0))
        throw ConfigError("fit_eta: need 0 < eta_lo < eta_hi <= 1");
    if (options.scan_points < 5) throw ConfigError("fit_eta: at least five scan points");
    constexpr double inf = std::numeric_limits<double>::infinity();

    auto objective = [&](double eta) {
        double s = 0.0;
        for (const auto& p : data) {
            double m;
            try {
                m = model(eta * p.p_heat);
            } catch (const CoverageError&) {
                return inf;
            }
            s += (m - p.dl_max) * (m - p.dl_max);
        }
        return s;
    };

    SetFit fit;
    fit.label = label;
    const auto etas = numerics::logspace(options.eta_lo, options.eta_hi, static_cast<std::size_t>(options.scan_points));
    for (double eta : etas) {
        const double s = objective(eta);
        fit.scan.emplace_back(eta, s);
        if (s == inf) break;  // larger eta only drives the model further out of range
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < fit.scan.size(); ++k)
        if (fit.scan[k].second < fit.scan[best].second) best = k;
    for (std::size_t k = 1; k < fit.scan.size(); ++k) {
        const double prev = fit.scan[k - 1].second, cur = fit.scan[k].second;
        const double slack = 1e-12 * std::max(prev, cur);
        if ((k <= best && cur > prev + slack) || (k > best && cur < prev - slack))
            throw ConvergenceError("fit_eta (" + label + "): objective is not unimodal over the eta scan");
    }
    if (best == 0 || best + 1 >= etas.size() || fit.scan[best + 1].second == inf)
        throw ConvergenceError("fit_eta (" + label + "): best eta " + num(etas[best]) +
                               " lies on the search boundary");

    auto in_log = [&](double x) { return objective(std::exp(x)); };
    std::uintmax_t iterations = 200;
    const auto [x, s] = boost::math::tools::brent_find_minima(in_log, std::log(etas[best - 1]),
                                                             std::log(etas[best + 1]), options.refine_bits, iterations);
    if (iterations >= 200) throw ConvergenceError("fit_eta (" + label + "): refinement did not converge");
    fit.eta = std::exp(x);
    double sum = 0.0;
    for (const auto& p : data) {
        fit.residuals.push_back(model(fit.eta * p.p_heat) - p.dl_max);
        sum += fit.residuals.back() * fit.residuals.back();
    }
    fit.rms = std::sqrt(sum / static_cast<double>(data.size()));
    (void)s;
    return fit;
}

EtaFit fit_eta(const std::vector<FitPoint>& data, const std::vector<std::pair<std::string, ForwardMap>>& models,
               const FitOptions& options) {
    if (models.empty()) throw ConfigError("fit_eta: no parameter sets");
    EtaFit out;
    for (const auto& [label, map] : models) out.sets.push_back(fit_eta_single(data, map, label, options));
    const auto [lo, hi] = std::minmax_element(out.sets.begin(), out.sets.end(),
                                              [](const SetFit& a, const SetFit& b) { return a.eta < b.eta; });
    out.eta_min = lo->eta;
    out.eta_max = hi->eta;
    out.eta_mean = 0.5 * (out.eta_min + out.eta_max);
    return out;
}

// --- parameter sets -------------------------------------------------------------------------------------

std::pair<materials::CornerSelector, materials::CornerSelector> extremal_corners(
    const materials::RefractiveIndexTable& table, double radius, double temperature, fed::EmissivityStore& store,
    const thermal::PowerTableGrid& grid) {
    const auto fgrid = fed::FrequencyGrid::planck_union(grid.t_lo, grid.t_hi, table);
    std::vector<std::pair<double, materials::CornerSelector>> powers;
    for (const auto& c : materials::CornerSelector::all())
        powers.emplace_back(store.get(radius, table, c, fgrid)->emitted_power_per_length(temperature), c);
    const auto [lo, hi] = std::minmax_element(powers.begin(), powers.end(),
                                              [](const auto& a, const auto& b) { return a.first < b.first; });
    return {lo->second, hi->second};
}

std::vector<ParameterSet> parameter_sets(materials::CornerSelector low, materials::CornerSelector high,
                                         double radius_tolerance) {
    if (!(radius_tolerance >= 0.0 && radius_tolerance < 1.0))
        throw ConfigError("parameter sets: radius tolerance must lie in [0, 1)");
    std::vector<ParameterSet> sets;
    for (double sign : {-1.0, 1.0}) {
        const double scale = 1.0 + sign * radius_tolerance;
        const std::string r = sign < 0 ? "radius_min" : "radius_max";
        sets.push_back({r + "/" + low.label(), scale, low});
        sets.push_back({r + "/" + high.label(), scale, high});
    }
    return sets;
}

fiber::RadiusProfile scale_profile(const fiber::RadiusProfile& profile, double factor) {
    if (!(factor > 0.0)) throw ConfigError("radius scale must be positive");
    std::vector<double> r = profile.radius();
    for (double& x : r) x *= factor;
    return {profile.z(), std::move(r)};
}

// --- temperature scale ------------------------------------------------------------------------------------

ScaleSample equilibrium_sample(const thermal::ThermalSystem& system, const fiber::PathLengthModel& path,
                               double absorbed_power) {
    const auto t = system.steady_state(absorbed_power);
    return {path.delta_l_opt(t), t[system.config().profile.center_index()]};
}

std::string to_string(ScalePhase phase) {
    switch (phase) {
        case ScalePhase::Equilibrium: return "equilibrium";
        case ScalePhase::Heating: return "heating";
        case ScalePhase::Cooling: return "cooling";
    }
    return "equilibrium";
}

bool TemperatureScale::monotone() const {
    for (std::size_t k = 1; k < points.size(); ++k) {
        const auto& a = points[k - 1];
        const auto& b = points[k];
        if (b.dl_low < a.dl_low || b.dl_high < a.dl_high || b.t_waist_min < a.t_waist_min ||
            b.t_waist_max < a.t_waist_max)
            return false;
    }
    return true;
}

TemperatureScale temperature_scale(const std::vector<double>& p_heat, const ScaleRun& extremal_a,
                                   const ScaleRun& extremal_b, ScalePhase phase) {
    if (p_heat.empty()) throw ConfigError("temperature scale: empty P_heat grid");
    TemperatureScale scale;
    scale.phase = phase;
    std::vector<double> grid = p_heat;
    std::sort(grid.begin(), grid.end());
    for (double p : grid) {
        if (!(p >= 0.0)) throw ConfigError("temperature scale: P_heat must be non-negative");
        const auto a = extremal_a(p), b = extremal_b(p);
        ScalePoint pt;
        pt.p_heat = p;
        pt.dl_low = std::min(a.dl_max, b.dl_max);
        pt.dl_high = std::max(a.dl_max, b.dl_max);
        pt.t_waist_min = std::min(a.t_waist, b.t_waist);
        pt.t_waist_max = std::max(a.t_waist, b.t_waist);
        pt.t_mean = 0.5 * (pt.t_waist_max + pt.t_waist_min);
        pt.t_half = 0.5 * (pt.t_waist_max - pt.t_waist_min);
        scale.points.push_back(pt);
    }
    return scale;
}

double PhaseMapping::temperature(double dl, ScalePhase phase) const {
    const bool heat = phase == ScalePhase::Heating;
    const auto& x = heat ? heating_dl : cooling_dl;
    const auto& y = heat ? heating_t : cooling_t;
    if (x.size() < 2 || dl < x.front() || dl > x.back())
        throw DomainError("phase mapping: path-length change " + num(dl) + " m outside the " + to_string(phase) +
                          " range");
    return numerics::interp_linear(x, y, dl);
}

PhaseMapping phase_mapping(const CycleResult& cycle) {
    PhaseMapping m;
    const auto& t = cycle.field.times;
    std::vector<std::pair<double, double>> heat, cool;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] <= cycle.t_switch) heat.emplace_back(cycle.delta_l[k], cycle.t_waist[k]);
        if (t[k] >= cycle.t_switch) cool.emplace_back(cycle.delta_l[k], cycle.t_waist[k]);
    }
    auto fill = [](std::vector<std::pair<double, double>> pts, std::vector<double>& x, std::vector<double>& y) {
        std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [d, T] : pts) {
            if (!x.empty() && d <= x.back()) continue;  // keep a strictly increasing abscissa
            x.push_back(d);
            y.push_back(T);
        }
    };
    fill(heat, m.heating_dl, m.heating_t);
    fill(cool, m.cooling_dl, m.cooling_t);
    return m;
}

// --- viscous stability ------------------------------------------------------------------------------------

double tau_s(const materials::ViscosityModel& viscosity, double temperature, double stress) {
    if (!(stress > 0.0)) throw DomainError("tau_s: stress must be positive");
    return 3.0 * viscosity(temperature).value / stress;
}

double tau_v(const materials::ViscosityModel& viscosity, double temperature, const StabilityOptions& o) {
    if (!(o.length > 0.0 && o.density > 0.0 && o.gravity > 0.0))
        throw DomainError("tau_v: length, density and gravity must be positive");
    return viscosity(temperature).value / (3.0 * o.density * o.gravity * o.length);
}

StabilityReport viscous_stability(const materials::ViscosityModel& viscosity, double temperature, double stress,
                                  const StabilityOptions& o) {
    if (!(o.tau_v_fast > 0.0 && o.tau_v_slow > o.tau_v_fast))
        throw ConfigError("stability: need 0 < tau_v_fast < tau_v_slow");
    StabilityReport r;
    r.temperature = temperature;
    r.viscosity_extrapolated = viscosity(temperature).extrapolated;
    r.tau_s = tau_s(viscosity, temperature, stress);
    r.tau_v = tau_v(viscosity, temperature, o);

    auto solve = [&](double target) {
        auto f = [&](double T) { return std::log(tau_v(viscosity, T, o)) - std::log(target); };
        if (!(f(o.search_lo) > 0.0 && f(o.search_hi) < 0.0))
            throw ConvergenceError("stability: tau_v = " + num(target) + " s not bracketed in [" + num(o.search_lo) +
                                   ", " + num(o.search_hi) + "] K");
        return numerics::find_root(f, o.search_lo, o.search_hi, 1e-6);
    };
    r.t_break_low = solve(o.tau_v_slow);
    r.t_break_high = solve(o.tau_v_fast);
    r.t_break = 0.5 * (r.t_break_low + r.t_break_high);
    r.t_break_half_width = 0.5 * (r.t_break_high - r.t_break_low);
    r.sigma_residual = 3.0 * viscosity(o.stress_temperature).value / o.tau_s_cycle;
    return r;
}

}  // namespace nanotherm::analysis
