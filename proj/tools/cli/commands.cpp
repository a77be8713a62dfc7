#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "nanotherm/analysis.hpp"
#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/radiometry.hpp"

namespace nanotherm::cli {

namespace {

using materials::CornerSelector;
using numerics::format_double;

std::string f(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

void row(std::ostream& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        out << (first ? "" : ",") << c;
        first = false;
    }
    out << '\n';
}

void row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
}

void log(const std::string& message) { std::clog << "nanotherm: " << message << std::endl; }

std::string one_line(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

double positive(const Settings& s, const std::string& key) {
    const double v = s.number(key);
    if (!(v > 0.0)) throw ConfigError(key + ": must be positive, got " + s.text(key));
    return v;
}

double non_negative(const Settings& s, const std::string& key) {
    const double v = s.number(key);
    if (!(v >= 0.0)) throw ConfigError(key + ": must not be negative, got " + s.text(key));
    return v;
}

std::string choice(const Settings& s, const std::string& key, std::initializer_list<const char*> allowed) {
    const std::string& v = s.text(key);
    std::string list;
    for (const char* a : allowed) {
        if (v == a) return v;
        list += (list.empty() ? "" : ", ") + std::string(a);
    }
    throw ConfigError(key + ": expected one of " + list + ", got '" + v + "'");
}

// --- shared model inputs ---------------------------------------------------------------------------------

materials::RefractiveIndexTable load_table(Run& run) {
    const auto& s = run.settings();
    const std::string& given = s.text("materials.nk_table");
    const std::filesystem::path file = given.empty() ? materials::data_directory() / "silica_nk.csv"
                                                     : std::filesystem::path(given);
    if (!std::filesystem::is_regular_file(file))
        throw ConfigError("materials.nk_table: file '" + file.string() + "' not found");
    auto table = given.empty() ? materials::silica_dataset() : materials::load_nk_table(file);
    const double k_eff = non_negative(s, "materials.k_eff_offset");
    if (k_eff > 0.0) table = table.with_extinction_offset(k_eff);
    run.dataset("nk_table", file.string(), table.content_hash());
    return table;
}

thermal::PowerTableGrid table_grid(const Settings& s) {
    thermal::PowerTableGrid g;
    g.t_lo = positive(s, "radiation.t_lo");
    g.t_hi = positive(s, "radiation.t_hi");
    g.t_step = positive(s, "radiation.t_step");
    if (g.t_hi <= g.t_lo) throw ConfigError("radiation.t_hi: must exceed radiation.t_lo");
    g.radii = static_cast<int>(s.integer("radiation.radii"));
    if (g.radii < 2) throw ConfigError("radiation.radii: at least 2 radii are needed");
    g.probes = static_cast<int>(s.integer("radiation.probes"));
    if (g.probes < 0) throw ConfigError("radiation.probes: must not be negative");
    g.probe_tolerance = positive(s, "radiation.probe_tolerance");
    return g;
}

struct Inputs {
    materials::RefractiveIndexTable table;
    materials::SilicaThermalProperties props;
    fiber::RadiusProfile profile;
    thermal::PowerTableGrid tables;
    CornerSelector corner;
    thermal::Radiator radiator;
    double ambient;
};

fiber::RadiusProfile load_profile(const Settings& s) {
    fiber::TaperParameters t;
    t.theta1 = s.number("geometry.theta1");
    t.theta2 = s.number("geometry.theta2");
    t.theta3 = s.number("geometry.theta3");
    t.r1 = s.number("geometry.r1");
    t.r2 = s.number("geometry.r2");
    t.a_waist = s.number("geometry.waist_radius");
    t.L_waist = s.number("geometry.waist_length");
    t.r_clad = s.number("geometry.cladding_radius");
    t.L_exp = s.number("geometry.exp_length");
    t.validate();
    const fiber::ProfileGrid grid{positive(s, "geometry.dz"), non_negative(s, "geometry.margin")};
    auto profile = fiber::build_radius_profile(t, grid);
    const double scale = positive(s, "geometry.radius_scale");
    return scale == 1.0 ? profile : analysis::scale_profile(profile, scale);
}

Inputs load_inputs(Run& run) {
    const auto& s = run.settings();
    auto table = load_table(run);
    auto props = materials::SilicaThermalProperties::load_default();
    run.dataset("thermal_properties", materials::data_directory().string(), props.content_hash());
    auto profile = load_profile(s);
    return Inputs{std::move(table),
                  std::move(props),
                  std::move(profile),
                  table_grid(s),
                  CornerSelector::parse(s.text("radiation.corner")),
                  thermal::parse_radiator(s.text("radiation.radiator")),
                  positive(s, "environment.ambient")};
}

thermal::SimulationConfig base_config(const Settings& s, const Inputs& in) {
    thermal::SimulationConfig c;
    c.profile = in.profile;
    c.radiator = in.radiator;
    c.corner = in.corner;
    c.eta_abs = s.number("heating.eta_abs");
    c.schedule = thermal::HeatingSchedule::single(s.number("heating.t_on"), s.number("heating.t_off"),
                                                  non_negative(s, "heating.power"));
    c.pressure = non_negative(s, "environment.pressure_mbar") * constants::pascal_per_mbar;
    c.ambient = in.ambient;
    c.heating = choice(s, "heating.model", {"surface", "volume"}) == "surface" ? fiber::HeatingModel::Surface
                                                                               : fiber::HeatingModel::Volume;
    c.conduction = s.flag("solver.conduction");
    c.steps.t_end = s.number("solver.t_end");
    c.steps.rtol = positive(s, "solver.rtol");
    c.steps.atol = positive(s, "solver.atol");
    c.steps.dt_initial = positive(s, "solver.dt_initial");
    c.steps.dt_max = positive(s, "solver.dt_max");
    const long max_steps = s.integer("solver.max_steps");
    if (max_steps < 1) throw ConfigError("solver.max_steps: must be positive");
    c.steps.max_steps = static_cast<std::size_t>(max_steps);
    c.steps.budget_tolerance = positive(s, "solver.budget_tolerance");
    c.validate();
    return c;
}

thermal::RadiationModel build_radiation(Run& run, const Inputs& in, const fiber::RadiusProfile& profile,
                                        CornerSelector corner) {
    switch (in.radiator) {
        case thermal::Radiator::Fed:
            log("radiation tables (cylinder emission, " + corner.label() + ", waist " +
                format_double(profile.min_radius()) + " m)");
            return thermal::RadiationModel::fed(profile.radius(), profile.min_radius(), in.table, corner, in.ambient,
                                                in.tables, run.store(), {}, run.threads());
        case thermal::Radiator::PlanckInterface:
            return thermal::RadiationModel::planck(profile.radius(), in.table, corner, in.ambient, in.tables);
        case thermal::Radiator::None:
            break;
    }
    return thermal::RadiationModel::none(profile.size(), in.ambient);
}

radiometry::InterfaceOptions interface_options() {
    radiometry::InterfaceOptions o;
    o.max_uncovered_fraction = fed::kMaxUncoveredFraction;
    return o;
}

/// Low- and high-emission corners of the configured radiator at the waist radius.
std::pair<CornerSelector, CornerSelector> band_corners(Run& run, const Inputs& in) {
    const auto& s = run.settings();
    const double temperature = positive(s, "radiation.band_temperature");
    if (in.radiator == thermal::Radiator::Fed)
        return analysis::extremal_corners(in.table, in.profile.min_radius(), temperature, run.store(), in.tables);
    if (in.radiator == thermal::Radiator::None)
        throw ConfigError("radiation.radiator: the parameter band needs a radiator");
    std::vector<std::pair<double, CornerSelector>> ranked;
    for (const auto& c : CornerSelector::all())
        ranked.emplace_back(radiometry::InterfaceEmissivitySpectrum(in.table, c, interface_options()).hemispherical(temperature),
                            c);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return {ranked.front().second, ranked.back().second};
}

struct SetModel {
    std::string label;
    fiber::RadiusProfile profile;
    CornerSelector corner;
    std::unique_ptr<thermal::RadiationModel> radiation;
    std::unique_ptr<fiber::PathLengthModel> path;
};

SetModel make_set(Run& run, const Inputs& in, std::string label, fiber::RadiusProfile profile, CornerSelector corner,
                  fiber::ModeCache& modes) {
    SetModel m{std::move(label), std::move(profile), corner, nullptr, nullptr};
    m.radiation = std::make_unique<thermal::RadiationModel>(build_radiation(run, in, m.profile, corner));
    m.path = std::make_unique<fiber::PathLengthModel>(m.profile, in.props, in.ambient, &modes);
    return m;
}

std::vector<SetModel> build_sets(Run& run, const Inputs& in, const std::string& key, fiber::ModeCache& modes) {
    std::vector<SetModel> sets;
    if (choice(run.settings(), key, {"nominal", "band"}) == "nominal") {
        sets.push_back(make_set(run, in, "nominal", in.profile, in.corner, modes));
        return sets;
    }
    const auto [low, high] = band_corners(run, in);
    const double tol = positive(run.settings(), "radiation.radius_tolerance");
    if (tol >= 1.0) throw ConfigError("radiation.radius_tolerance: must be below 1");
    for (const auto& p : analysis::parameter_sets(low, high, tol))
        sets.push_back(make_set(run, in, p.label, analysis::scale_profile(in.profile, p.radius_scale), p.corner, modes));
    return sets;
}

thermal::SimulationConfig set_config(thermal::SimulationConfig c, const SetModel& set) {
    c.profile = set.profile;
    c.corner = set.corner;
    return c;
}

/// Runs job(i) for i in [0, count) on up to `threads` workers; results are indexed, so order is fixed.
template <class Job>
void parallel_for(std::size_t count, int threads, Job job) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
}

std::vector<std::string> constants_cells(const std::optional<analysis::TimeConstants>& tc) {
    if (!tc) return {"nan", "nan", "nan", "nan"};
    return {f(tc->rise_10_50), f(tc->rise_75_90), f(tc->fall_90_50), f(tc->fall_25_10)};
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i], sxx += x[i] * x[i], sxy += x[i] * y[i];
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

// --- emissivity ----------------------------------------------------------------------------------------------

int cmd_emissivity(Run& run) {
    const auto& s = run.settings();
    const double radius = positive(s, "emissivity.radius");
    const auto overlays = s.numbers("emissivity.overlay_temperatures");
    for (double t : overlays)
        if (!(t > 0.0)) throw ConfigError("emissivity.overlay_temperatures: temperatures must be positive");
    const auto table = load_table(run);
    const auto tables = table_grid(s);
    const auto grid = fed::FrequencyGrid::planck_union(tables.t_lo, tables.t_hi, table);

    const auto corners = CornerSelector::all();
    std::vector<std::shared_ptr<const fed::SpectralEmissivity>> eps;
    for (const auto& c : corners) {
        log("spectral emissivity " + c.label() + " at a = " + format_double(radius) + " m");
        eps.push_back(run.store().get(radius, table, c, grid, {}, run.threads()));
    }

    const auto& nu = grid.frequencies();
    std::vector<double> peak(overlays.size(), 0.0);
    for (std::size_t j = 0; j < overlays.size(); ++j)
        for (double v : nu) peak[j] = std::max(peak[j], radiometry::planck_spectral_power(v, overlays[j]));

    std::vector<Column> cols{{"nu_Hz", "Hz"},           {"wavelength_m", "m"},
                             {"eps_min", "1"},          {"eps_max", "1"},
                             {"eps_interface_min", "1"}, {"eps_interface_max", "1"}};
    for (double t : overlays) cols.push_back({"planck_" + format_double(t) + "K", "1 (peak-normalised)"});
    auto out = run.table("emissivity.csv", cols,
                         {"cylinder radius " + format_double(radius) + " m; band over the four (n, k) corners",
                          "eps_interface: flat silica/vacuum interface at the same frequencies"});
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const double lambda = constants::speed_of_light / nu[i];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, ilo = lo, ihi = -lo;
        for (std::size_t c = 0; c < corners.size(); ++c) {
            const double e = eps[c]->values()[i];
            lo = std::min(lo, e), hi = std::max(hi, e);
            const double ei = radiometry::interface_spectral_emissivity(table.nk_at(lambda, corners[c]));
            ilo = std::min(ilo, ei), ihi = std::max(ihi, ei);
        }
        std::vector<std::string> cells{f(nu[i]), f(lambda), f(lo), f(hi), f(ilo), f(ihi)};
        for (std::size_t j = 0; j < overlays.size(); ++j)
            cells.push_back(f(radiometry::planck_spectral_power(nu[i], overlays[j]) / peak[j]));
        row(out, cells);
    }
    return kSuccess;
}

// --- power curve ----------------------------------------------------------------------------------------------

int cmd_power_curve(Run& run) {
    const auto& s = run.settings();
    const double radius = positive(s, "power_curve.radius");
    const double fit_lo = positive(s, "power_curve.fit_lo"), fit_hi = positive(s, "power_curve.fit_hi");
    if (fit_hi <= fit_lo) throw ConfigError("power_curve.fit_hi: must exceed power_curve.fit_lo");
    const auto table = load_table(run);
    const auto tables = table_grid(s);
    const auto grid = fed::FrequencyGrid::planck_union(tables.t_lo, tables.t_hi, table);
    const auto temps = tables.temperatures();
    const double area = 2.0 * constants::pi * radius;

    const auto corners = CornerSelector::all();
    std::vector<std::vector<double>> fed_p(corners.size()), planck_p(corners.size());
    for (std::size_t c = 0; c < corners.size(); ++c) {
        log("power curve " + corners[c].label());
        const auto eps = run.store().get(radius, table, corners[c], grid, {}, run.threads());
        const radiometry::InterfaceEmissivitySpectrum flat(table, corners[c], interface_options());
        for (double t : temps) {
            fed_p[c].push_back(eps->emitted_power_per_length(t));
            planck_p[c].push_back(flat.hemispherical(t) * radiometry::blackbody_power(t) * area);
        }
    }

    auto out = run.table("power_curve.csv",
                         {{"T_K", "K"},
                          {"fed_min_W_per_m", "W/m"},
                          {"fed_max_W_per_m", "W/m"},
                          {"planck_min_W_per_m", "W/m"},
                          {"planck_max_W_per_m", "W/m"}},
                         {"emitted power per unit length of a cylinder of radius " + format_double(radius) + " m",
                          "planck columns: flat-interface emissivity times sigma T^4 times 2 pi a"});
    for (std::size_t i = 0; i < temps.size(); ++i) {
        double flo = fed_p[0][i], fhi = flo, plo = planck_p[0][i], phi = plo;
        for (std::size_t c = 1; c < corners.size(); ++c) {
            flo = std::min(flo, fed_p[c][i]), fhi = std::max(fhi, fed_p[c][i]);
            plo = std::min(plo, planck_p[c][i]), phi = std::max(phi, planck_p[c][i]);
        }
        row(out, {f(temps[i]), f(flo), f(fhi), f(plo), f(phi)});
    }

    std::vector<double> lx;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < temps.size(); ++i)
        if (temps[i] >= fit_lo && temps[i] <= fit_hi) lx.push_back(std::log(temps[i])), idx.push_back(i);
    if (idx.size() < 2) throw ConfigError("power_curve.fit_lo: fewer than two tabulated temperatures in the fit range");
    auto fit = run.table("exponents.csv", {{"model", "-"}, {"corner", "-"}, {"exponent", "1"}},
                         {"least-squares p of P ~ T^p over " + format_double(fit_lo) + " to " + format_double(fit_hi) +
                          " K"});
    for (const auto& [name, data] : {std::pair{"fed", &fed_p}, std::pair{"planck", &planck_p}})
        for (std::size_t c = 0; c < corners.size(); ++c) {
            std::vector<double> ly;
            for (std::size_t i : idx) ly.push_back(std::log((*data)[c][i]));
            row(fit, {name, "\"" + corners[c].label() + "\"", f(least_squares_slope(lx, ly))});
        }
    return kSuccess;
}

// --- simulate ---------------------------------------------------------------------------------------------------

int cmd_simulate(Run& run) {
    const auto& s = run.settings();
    const auto in = load_inputs(run);
    const auto cfg = base_config(s, in);
    fiber::ModeCache modes;
    const auto radiation = build_radiation(run, in, in.profile, in.corner);
    const fiber::PathLengthModel path(in.profile, in.props, in.ambient, &modes);
    const thermal::ThermalSystem system(cfg, in.props, materials::GasProperties{}, radiation);
    log("solving the heating/cooling cycle");
    const auto cycle = analysis::run_cycle(system, path);
    const auto& field = cycle.field;

    {
        auto out = run.table("trace.csv", {{"time_s", "s"},
                                           {"P_heat_W", "W"},
                                           {"dLopt_m", "m"},
                                           {"T_waist_K", "K"},
                                           {"T_max_K", "K"}});
        for (std::size_t k = 0; k < field.times.size(); ++k) {
            const auto& t = field.temperature[k];
            const double t_heat = k == 0 ? field.times[k] : 0.5 * (field.times[k - 1] + field.times[k]);
            row(out, {f(field.times[k]), f(cfg.schedule.power(t_heat)), f(cycle.delta_l[k]), f(cycle.t_waist[k]),
                      f(*std::max_element(t.begin(), t.end()))});
        }
    }
    {
        auto out = run.table("staircase.csv",
                             {{"segment", "-"}, {"kind", "-"}, {"time_s", "s"}, {"dLopt_m", "m"}, {"error_m", "m"}},
                             {"counted transmission peaks, step " + format_double(fiber::kReadoutStep) + " m",
                              "dLopt_m is absolute: segment start value plus the counted levels"});
        const auto index_at = [&](double t) {
            return static_cast<std::size_t>(std::lower_bound(field.times.begin(), field.times.end(), t) -
                                            field.times.begin());
        };
        const std::pair<const char*, const fiber::Staircase*> segments[] = {{"heating", &cycle.heating},
                                                                           {"cooling", &cycle.cooling}};
        for (const auto& [name, st] : segments) {
            const double offset = name == std::string("heating") ? cycle.delta_l.front()
                                                                 : cycle.delta_l[std::min(index_at(cycle.t_switch),
                                                                                          cycle.delta_l.size() - 1)];
            for (const auto& p : st->steps) row(out, {name, "step", f(p.time), f(offset + p.value), f(p.error)});
            row(out, {name, "augmentation", f(st->augmentation.time), f(offset + st->augmentation.value),
                      f(st->augmentation.error)});
        }
    }
    {
        auto out = run.table("budget.csv", {{"time_s", "s"},
                                            {"dt_s", "s"},
                                            {"stored_W", "W"},
                                            {"absorbed_W", "W"},
                                            {"radiated_W", "W"},
                                            {"gas_W", "W"},
                                            {"residual", "1"}},
                             {"step averages; residual relative to " + format_double(field.reference_power) + " W"});
        for (const auto& b : field.budget)
            row(out, {f(b.time), f(b.dt), f(b.stored), f(b.absorbed), f(b.radiated), f(b.gas), f(b.residual)});
    }
    if (s.flag("solver.write_field")) {
        auto out = run.table("field.csv", {{"time_s", "s"}, {"z_m", "m"}, {"T_K", "K"}}, {}, false);
        field.write_csv(out);
    }
    {
        auto out = run.table("summary.csv", {{"quantity", "-"}, {"value", "-"}, {"unit", "-"}});
        row(out, {"radiator", thermal::to_string(in.radiator), "-"});
        row(out, {"corner", "\"" + in.corner.label() + "\"", "-"});
        row(out, {"absorbed_power", f(cfg.eta_abs * cfg.schedule.peak()), "W"});
        row(out, {"dLopt_max", f(cycle.delta_l_max), "m"});
        row(out, {"T_waist_at_dLopt_max", f(cycle.t_waist_at_max), "K"});
        row(out, {"T_max", f(field.max_temperature), "K"});
        row(out, {"t_switch", f(cycle.t_switch), "s"});
        const auto tc = constants_cells(cycle.constants);
        row(out, {"rise_10_50", tc[0], "s"});
        row(out, {"rise_75_90", tc[1], "s"});
        row(out, {"fall_90_50", tc[2], "s"});
        row(out, {"fall_25_10", tc[3], "s"});
        if (!cycle.constants) row(out, {"time_constants_error", "\"" + one_line(cycle.constants_error) + "\"", "-"});
        row(out, {"heating_peaks", std::to_string(cycle.heating.steps.size()), "1"});
        row(out, {"cooling_peaks", std::to_string(cycle.cooling.steps.size()), "1"});
        row(out, {"max_budget_residual", f(field.max_budget_residual()), "1"});
        row(out, {"accepted_steps", std::to_string(field.accepted), "1"});
        row(out, {"rejected_steps", std::to_string(field.rejected), "1"});
        row(out, {"properties_extrapolated", field.extrapolated ? "true" : "false", "-"});
        row(out, {"gas_beyond_validity", field.gas_beyond_validity ? "true" : "false", "-"});
        double probe = 0.0;
        for (const auto& p : radiation.probes()) probe = std::max(probe, p.max_relative_error);
        row(out, {"max_probe_error", f(probe), "1"});
    }
    log("peak dLopt " + format_double(cycle.delta_l_max) + " m, waist " + format_double(cycle.t_waist_at_max) + " K");
    return kSuccess;
}

// --- sweep --------------------------------------------------------------------------------------------------------

int cmd_sweep(Run& run) {
    const auto& s = run.settings();
    const std::string parameter = choice(s, "sweep.parameter", {"power", "pressure"});
    const bool transient = choice(s, "sweep.mode", {"transient", "equilibrium"}) == "transient";
    const auto values = s.numbers("sweep.values");
    if (values.empty()) throw ConfigError("sweep.values: the sweep grid is empty");
    for (double v : values)
        if (!(v >= 0.0)) throw ConfigError("sweep.values: values must not be negative");

    const auto in = load_inputs(run);
    const auto base = base_config(s, in);
    fiber::ModeCache modes;
    const auto sets = build_sets(run, in, "sweep.sets", modes);
    const materials::GasProperties gas;

    struct Point {
        bool ok = false;
        std::string message;
        double dl_max = 0.0, t_waist = 0.0, t_peak = 0.0, residual = 0.0;
        std::optional<analysis::TimeConstants> constants;
    };
    const std::size_t n = sets.size() * values.size();
    std::vector<Point> points(n);
    std::mutex log_mutex;
    parallel_for(n, run.threads(), [&](std::size_t i) {
        const auto& set = sets[i / values.size()];
        const double value = values[i % values.size()];
        Point& p = points[i];
        try {
            auto cfg = set_config(base, set);
            double power = cfg.schedule.peak();
            if (parameter == "power") {
                const auto& pulse = cfg.schedule.pulses().front();
                cfg.schedule = thermal::HeatingSchedule::single(pulse.t_on, pulse.t_off, value);
                power = value;
            } else {
                cfg.pressure = value * constants::pascal_per_mbar;
            }
            cfg.validate();
            const thermal::ThermalSystem system(cfg, in.props, gas, *set.radiation);
            if (transient) {
                const auto cycle = analysis::run_cycle(system, *set.path);
                p.dl_max = cycle.delta_l_max;
                p.t_waist = cycle.t_waist_at_max;
                p.t_peak = cycle.field.max_temperature;
                p.residual = cycle.field.max_budget_residual();
                p.constants = cycle.constants;
                if (!cycle.constants) p.message = cycle.constants_error;
            } else {
                const auto sample = analysis::equilibrium_sample(system, *set.path, cfg.eta_abs * power);
                p.dl_max = sample.dl_max;
                p.t_waist = sample.t_waist;
                p.t_peak = sample.t_waist;
            }
            p.ok = true;
        } catch (const Error& e) {
            p.message = e.what();
        }
        const std::lock_guard lock(log_mutex);
        log(set.label + " " + parameter + "=" + format_double(value) + (p.ok ? " done" : " failed: " + p.message));
    });

    const std::string unit = parameter == "power" ? "W" : "mbar";
    const std::string vname = parameter == "power" ? "P_heat_W" : "pressure_mbar";
    const std::string mode_note = transient ? "transient cycles; T_waist at the time of dLopt_max"
                                            : "steady states at constant absorbed power";
    std::size_t failures = 0;
    {
        auto out = run.table("sweep_runs.csv",
                             {{"set", "-"},
                              {vname, unit},
                              {"status", "-"},
                              {"dLopt_max_m", "m"},
                              {"T_waist_K", "K"},
                              {"T_peak_K", "K"},
                              {"rise_10_50_s", "s"},
                              {"rise_75_90_s", "s"},
                              {"fall_90_50_s", "s"},
                              {"fall_25_10_s", "s"},
                              {"max_budget_residual", "1"},
                              {"message", "-"}},
                             {mode_note});
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = points[i];
            failures += p.ok ? 0 : 1;
            std::vector<std::string> cells{sets[i / values.size()].label, f(values[i % values.size()]),
                                           p.ok ? "ok" : "failed"};
            if (p.ok) {
                for (const auto& c : {f(p.dl_max), f(p.t_waist), f(p.t_peak)}) cells.push_back(c);
                for (const auto& c : constants_cells(p.constants)) cells.push_back(c);
                cells.push_back(transient ? f(p.residual) : "nan");
            } else {
                for (int k = 0; k < 8; ++k) cells.push_back("nan");
            }
            cells.push_back("\"" + one_line(p.message) + "\"");
            row(out, cells);
        }
    }
    {
        auto out = run.table("sweep.csv",
                             {{vname, unit},
                              {"sets_ok", "1"},
                              {"dLopt_max_low_m", "m"},
                              {"dLopt_max_high_m", "m"},
                              {"T_waist_min_K", "K"},
                              {"T_waist_max_K", "K"},
                              {"T_waist_mean_K", "K"},
                              {"T_waist_half_width_K", "K"}},
                             {mode_note, "band over the parameter sets: mean = (max + min) / 2, half width = (max - min) / 2"});
        for (std::size_t j = 0; j < values.size(); ++j) {
            std::size_t ok = 0;
            double dlo = std::numeric_limits<double>::infinity(), dhi = -dlo, tlo = dlo, thi = -dlo;
            for (std::size_t k = 0; k < sets.size(); ++k) {
                const auto& p = points[k * values.size() + j];
                if (!p.ok) continue;
                ++ok;
                dlo = std::min(dlo, p.dl_max), dhi = std::max(dhi, p.dl_max);
                tlo = std::min(tlo, p.t_waist), thi = std::max(thi, p.t_waist);
            }
            if (ok == 0) {
                row(out, {f(values[j]), "0", "nan", "nan", "nan", "nan", "nan", "nan"});
                continue;
            }
            row(out, {f(values[j]), std::to_string(ok), f(dlo), f(dhi), f(tlo), f(thi), f(0.5 * (thi + tlo)),
                      f(0.5 * (thi - tlo))});
        }
    }
    if (failures == n) throw ConvergenceError("every sweep point failed; see sweep_runs.csv");
    return failures ? kPartialFailure : kSuccess;
}

// --- fit-eta --------------------------------------------------------------------------------------------------------

int cmd_fit_eta(Run& run) {
    const auto& s = run.settings();
    const bool transient = choice(s, "fit.forward", {"equilibrium", "transient"}) == "transient";
    const double planted = non_negative(s, "fit.synthetic_eta");
    const std::string& data_path = s.text("fit.data");
    if (planted > 0.0 && !data_path.empty())
        throw ConfigError("fit.data: give either a data file or fit.synthetic_eta, not both");
    if (planted == 0.0 && data_path.empty())
        throw ConfigError("fit.data: no data file given (or set fit.synthetic_eta for self-generated data)");
    analysis::FitOptions opts;
    opts.eta_lo = positive(s, "fit.eta_lo");
    opts.eta_hi = positive(s, "fit.eta_hi");
    if (!(opts.eta_hi > opts.eta_lo) || opts.eta_hi > 1.0)
        throw ConfigError("fit.eta_hi: need fit.eta_lo < fit.eta_hi <= 1");

    std::vector<analysis::FitPoint> data;
    if (!data_path.empty()) {
        std::ifstream in(data_path);
        if (!in) throw ConfigError("fit.data: cannot open '" + data_path + "'");
        data = analysis::read_fit_data(in);
        std::ifstream again(data_path);
        const std::string bytes((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
        run.dataset("fit_data", data_path, numerics::fnv1a(bytes));
    }
    if (planted == 0.0 && data.size() < 3) throw ConfigError("fit.data: at least 3 data points are needed");

    const auto in = load_inputs(run);
    const auto base = base_config(s, in);
    const materials::GasProperties gas;
    fiber::ModeCache modes;
    const auto sets = build_sets(run, in, "fit.sets", modes);

    std::vector<std::unique_ptr<thermal::ThermalSystem>> systems;
    std::vector<std::pair<std::string, analysis::ForwardMap>> maps;
    for (const auto& set : sets) {
        const auto cfg = set_config(base, set);
        systems.push_back(std::make_unique<thermal::ThermalSystem>(cfg, in.props, gas, *set.radiation));
        maps.emplace_back(set.label, transient ? analysis::transient_map(cfg, in.props, gas, *set.radiation, *set.path)
                                               : analysis::equilibrium_map(*systems.back(), *set.path));
    }

    if (planted > 0.0) {
        const auto powers = s.numbers("fit.synthetic_powers");
        if (powers.size() < 3) throw ConfigError("fit.synthetic_powers: at least 3 powers are needed");
        std::optional<SetModel> own;
        const SetModel* nominal = sets.size() == 1 ? &sets.front() : nullptr;
        if (!nominal) nominal = &own.emplace(make_set(run, in, "nominal", in.profile, in.corner, modes));
        const thermal::ThermalSystem gen(set_config(base, *nominal), in.props, gas, *nominal->radiation);
        const auto forward = transient
                                 ? analysis::transient_map(set_config(base, *nominal), in.props, gas,
                                                           *nominal->radiation, *nominal->path)
                                 : analysis::equilibrium_map(gen, *nominal->path);
        for (double p : powers) {
            if (!(p > 0.0)) throw ConfigError("fit.synthetic_powers: powers must be positive");
            data.push_back({p, forward(planted * p)});
        }
    }
    {
        auto out = run.table("data.csv", {{"P_heat_W", "W"}, {"dLopt_max_m", "m"}},
                             {planted > 0.0 ? "synthetic data from the nominal model at eta_abs = " + format_double(planted)
                                            : "data read from " + data_path},
                             false);
        analysis::write_fit_data(out, data);
    }

    log("fitting eta_abs over " + std::to_string(sets.size()) + " parameter set(s)");
    const auto fit = analysis::fit_eta(data, maps, opts);

    {
        auto out = run.table("fit.csv", {{"set", "-"}, {"eta_abs", "1"}, {"rms_residual_m", "m"}},
                             {std::string("forward map: ") + (transient ? "transient" : "equilibrium")});
        for (const auto& r : fit.sets) row(out, {r.label, f(r.eta), f(r.rms)});
    }
    {
        auto out = run.table("residuals.csv", {{"set", "-"},
                                               {"P_heat_W", "W"},
                                               {"dLopt_data_m", "m"},
                                               {"dLopt_model_m", "m"},
                                               {"residual_m", "m"}});
        for (const auto& r : fit.sets)
            for (std::size_t i = 0; i < data.size(); ++i)
                row(out, {r.label, f(data[i].p_heat), f(data[i].dl_max), f(data[i].dl_max + r.residuals[i]),
                          f(r.residuals[i])});
    }
    {
        auto out = run.table("scan.csv", {{"set", "-"}, {"eta_abs", "1"}, {"sum_of_squares_m2", "m^2"}},
                             {"objective scan; nan where the model fails"});
        for (const auto& r : fit.sets)
            for (const auto& [eta, sse] : r.scan) row(out, {r.label, f(eta), f(sse)});
    }
    {
        auto out = run.table("summary.csv", {{"quantity", "-"}, {"value", "-"}, {"unit", "-"}});
        row(out, {"eta_min", f(fit.eta_min), "1"});
        row(out, {"eta_max", f(fit.eta_max), "1"});
        row(out, {"eta_mean", f(fit.eta_mean), "1"});
        if (planted > 0.0) {
            row(out, {"eta_planted", f(planted), "1"});
            row(out, {"eta_mean_relative_error", f(std::abs(fit.eta_mean - planted) / planted), "1"});
        }
    }
    log("eta_abs band [" + format_double(fit.eta_min) + ", " + format_double(fit.eta_max) + "]");
    return kSuccess;
}

// --- stability --------------------------------------------------------------------------------------------------------

int cmd_stability(Run& run) {
    const auto& s = run.settings();
    const double t_lo = positive(s, "stability.t_lo"), t_hi = positive(s, "stability.t_hi");
    const double t_step = positive(s, "stability.t_step");
    if (t_hi < t_lo) throw ConfigError("stability.t_hi: must not be below stability.t_lo");
    const auto stresses = s.numbers("stability.stresses");
    for (double v : stresses)
        if (!(v > 0.0)) throw ConfigError("stability.stresses: stresses must be positive");
    analysis::StabilityOptions opts;
    opts.length = positive(s, "stability.length");
    opts.tau_v_fast = positive(s, "stability.tau_v_fast");
    opts.tau_v_slow = positive(s, "stability.tau_v_slow");
    if (opts.tau_v_slow <= opts.tau_v_fast) throw ConfigError("stability.tau_v_slow: must exceed stability.tau_v_fast");
    opts.tau_s_cycle = positive(s, "stability.tau_s_cycle");
    opts.stress_temperature = positive(s, "stability.temperature");
    const materials::ViscosityModel viscosity;

    std::vector<Column> cols{{"T_K", "K"}, {"viscosity_Pa_s", "Pa s"}, {"extrapolated", "-"}, {"tau_v_s", "s"}};
    for (double sigma : stresses) cols.push_back({"tau_s_" + format_double(sigma) + "Pa_s", "s"});
    {
        auto out = run.table("stability.csv", cols,
                             {"tau_v = viscosity / (3 rho g L0) with L0 = " + format_double(opts.length) + " m",
                              "tau_s = 3 viscosity / sigma_i per listed initial stress"});
        const auto n = static_cast<std::size_t>(std::floor((t_hi - t_lo) / t_step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t_lo + static_cast<double>(i) * t_step;
            const auto v = viscosity(t);
            std::vector<std::string> cells{f(t), f(v.value), v.extrapolated ? "true" : "false",
                                           f(analysis::tau_v(viscosity, t, opts))};
            for (double sigma : stresses) cells.push_back(f(analysis::tau_s(viscosity, t, sigma)));
            row(out, cells);
        }
    }
    const auto r = analysis::viscous_stability(viscosity, opts.stress_temperature, positive(s, "stability.stress"), opts);
    {
        auto out = run.table("summary.csv", {{"quantity", "-"}, {"value", "-"}, {"unit", "-"}});
        row(out, {"temperature", f(r.temperature), "K"});
        row(out, {"tau_s", f(r.tau_s), "s"});
        row(out, {"tau_v", f(r.tau_v), "s"});
        row(out, {"viscosity_extrapolated", r.viscosity_extrapolated ? "true" : "false", "-"});
        row(out, {"t_break_low", f(r.t_break_low), "K"});
        row(out, {"t_break_high", f(r.t_break_high), "K"});
        row(out, {"t_break", f(r.t_break), "K"});
        row(out, {"t_break_half_width", f(r.t_break_half_width), "K"});
        row(out, {"sigma_residual", f(r.sigma_residual), "Pa"});
    }
    return kSuccess;
}

// --- profile --------------------------------------------------------------------------------------------------------------

int cmd_profile(Run& run) {
    const auto profile = load_profile(run.settings());
    auto out = run.table("profile.csv", {{"z_m", "m"}, {"radius_m", "m"}},
                         {"waist centre at z = " + format_double(profile.z()[profile.center_index()]) + " m"}, false);
    fiber::write_profile(out, profile);
    return kSuccess;
}

}  // namespace nanotherm::cli
