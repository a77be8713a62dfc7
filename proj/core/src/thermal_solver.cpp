#include "nanotherm/thermal_solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/radiometry.hpp"

namespace nanotherm::thermal {

namespace {

std::string num(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

// Cubic in (ln T, ln P): radiated power is close to a power law in temperature.
numerics::CubicHermite log_log_curve(const std::vector<double>& temps, const std::vector<double>& power) {
    std::vector<double> x(temps.size()), y(power.size());
    for (std::size_t j = 0; j < temps.size(); ++j) {
        x[j] = std::log(temps[j]);
        y[j] = std::log(power[j]);
    }
    return {std::move(x), std::move(y)};
}

constexpr double kGamma = 1.0 + 0.70710678118654752440;  // ROS2, L-stable

}  // namespace

std::string to_string(Radiator radiator) {
    switch (radiator) {
        case Radiator::Fed: return "fed";
        case Radiator::PlanckInterface: return "planck";
        case Radiator::None: return "none";
    }
    return "none";
}

Radiator parse_radiator(const std::string& text) {
    std::string s;
    for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "fed") return Radiator::Fed;
    if (s == "planck" || s == "planck-interface" || s == "planck_interface") return Radiator::PlanckInterface;
    if (s == "none") return Radiator::None;
    throw ConfigError("invalid radiator '" + text + "', expected fed, planck or none");
}

std::vector<double> PowerTableGrid::temperatures() const {
    if (!(t_lo > 0.0 && t_hi > t_lo && t_step > 0.0)) throw ConfigError("power table: need 0 < t_lo < t_hi, t_step > 0");
    const double cells = (t_hi - t_lo) / t_step;
    const long n = std::lround(cells);
    if (std::abs(cells - static_cast<double>(n)) > 1e-9 * std::max(1.0, cells) || n < 3)
        throw ConfigError("power table: (t_hi - t_lo) / t_step must be an integer of at least 3");
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = t_lo + t_step * static_cast<double>(j);
    t.back() = t_hi;
    return t;
}

// --- radiation ------------------------------------------------------------------------------------

RadiationModel RadiationModel::fed(std::span<const double> node_radii, double waist_radius,
                                   const materials::RefractiveIndexTable& table, materials::CornerSelector corner,
                                   double ambient, const PowerTableGrid& grid, fed::EmissivityStore& store,
                                   const fed::EmissivityOptions& options, int threads) {
    if (node_radii.empty()) throw ConfigError("radiation model: no nodes");
    if (grid.radii < 2) throw ConfigError("power table: at least two radii required");
    RadiationModel m;
    m.kind_ = Radiator::Fed;
    m.ambient_ = ambient;
    m.t_lo_ = grid.t_lo;
    m.t_hi_ = grid.t_hi;
    if (!(ambient >= grid.t_lo && ambient <= grid.t_hi))
        throw ConfigError("ambient temperature " + num(ambient) + " K outside the power table range");
    const auto temps = grid.temperatures();

    const auto [lo_it, hi_it] = std::minmax_element(node_radii.begin(), node_radii.end());
    const double rmin = *lo_it, rmax = *hi_it;
    std::vector<double> radii;
    if (rmax > rmin * (1.0 + 1e-12))
        radii = numerics::logspace(rmin, rmax, static_cast<std::size_t>(grid.radii));
    else
        radii = {rmin};
    if (waist_radius > 0.0 && std::none_of(radii.begin(), radii.end(), [&](double r) {
            return std::abs(r - waist_radius) <= 1e-12 * waist_radius;
        }))
        radii.push_back(waist_radius);
    std::sort(radii.begin(), radii.end());
    m.table_radii_ = radii;

    const auto fgrid = fed::FrequencyGrid::planck_union(grid.t_lo, grid.t_hi, table);
    auto log_power = [&](double r) {
        const auto eps = store.get(r, table, corner, fgrid, options, threads);
        std::vector<double> lp(temps.size());
        for (std::size_t j = 0; j < temps.size(); ++j) lp[j] = std::log(eps->emitted_power_per_length(temps[j]));
        return lp;
    };
    std::vector<std::vector<double>> lp;
    lp.reserve(radii.size());
    for (double r : radii) lp.push_back(log_power(r));

    auto interpolated = [&](double a) {
        std::vector<double> p(temps.size());
        if (radii.size() == 1) {
            for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::exp(lp[0][j]);
            return p;
        }
        const std::size_t k = numerics::locate(radii, a);
        const double w = std::clamp(std::log(a / radii[k]) / std::log(radii[k + 1] / radii[k]), 0.0, 1.0);
        for (std::size_t j = 0; j < p.size(); ++j) p[j] = std::exp((1.0 - w) * lp[k][j] + w * lp[k + 1][j]);
        return p;
    };

    std::vector<double> unique(node_radii.begin(), node_radii.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (double a : unique) m.curves_.push_back(log_log_curve(temps, interpolated(a)));
    for (const auto& c : m.curves_) m.curve_ambient_.push_back(std::exp(c(std::log(ambient))));
    for (double a : node_radii) {
        m.node_curve_.push_back(static_cast<std::size_t>(std::lower_bound(unique.begin(), unique.end(), a) - unique.begin()));
        m.node_scale_.push_back(1.0);
    }

    if (radii.size() >= 2 && grid.probes > 0) {
        const std::size_t intervals = radii.size() - 1;
        std::set<std::size_t> picked;
        for (int k = 0; k < grid.probes; ++k)
            picked.insert(std::min(intervals - 1, static_cast<std::size_t>(k) * intervals / static_cast<std::size_t>(grid.probes)));
        for (std::size_t i : picked) {
            const double a = std::sqrt(radii[i] * radii[i + 1]);
            const auto direct = log_power(a);
            const auto interp = interpolated(a);
            double worst = 0.0;
            for (std::size_t j = 0; j < temps.size(); ++j) {
                const double exact = std::exp(direct[j]);
                worst = std::max(worst, std::abs(interp[j] - exact) / exact);
            }
            m.probes_.push_back({a, worst});
            if (worst > grid.probe_tolerance)
                throw ConvergenceError("radiated-power interpolation error " + num(worst) + " at probe radius " +
                                       num(a) + " m exceeds " + num(grid.probe_tolerance) + "; increase the radius count");
        }
    }
    return m;
}

RadiationModel RadiationModel::planck(std::span<const double> node_radii, const materials::RefractiveIndexTable& table,
                                      materials::CornerSelector corner, double ambient, const PowerTableGrid& grid) {
    RadiationModel m;
    m.kind_ = Radiator::PlanckInterface;
    m.ambient_ = ambient;
    m.t_lo_ = grid.t_lo;
    m.t_hi_ = grid.t_hi;
    if (!(ambient >= grid.t_lo && ambient <= grid.t_hi))
        throw ConfigError("ambient temperature " + num(ambient) + " K outside the power table range");
    const auto temps = grid.temperatures();
    radiometry::InterfaceOptions opts;
    opts.max_uncovered_fraction = fed::kMaxUncoveredFraction;
    const radiometry::InterfaceEmissivitySpectrum spectrum(table, corner, opts);
    std::vector<double> flux(temps.size());  // W/m^2
    for (std::size_t j = 0; j < temps.size(); ++j)
        flux[j] = spectrum.hemispherical(temps[j]) * radiometry::blackbody_power(temps[j]);
    m.curves_.push_back(log_log_curve(temps, flux));
    m.curve_ambient_.push_back(std::exp(m.curves_[0](std::log(ambient))));
    for (double a : node_radii) {
        m.node_curve_.push_back(0);
        m.node_scale_.push_back(2.0 * constants::pi * a);
    }
    return m;
}

RadiationModel RadiationModel::none(std::size_t nodes, double ambient) {
    RadiationModel m;
    m.kind_ = Radiator::None;
    m.ambient_ = ambient;
    m.t_lo_ = 0.0;
    m.t_hi_ = std::numeric_limits<double>::infinity();
    m.node_curve_.assign(nodes, 0);
    m.node_scale_.assign(nodes, 0.0);
    return m;
}

std::pair<double, double> RadiationModel::net(std::size_t node, double temperature) const {
    if (kind_ == Radiator::None) return {0.0, 0.0};
    if (!(temperature >= t_lo_ && temperature <= t_hi_))
        throw CoverageError("temperature " + num(temperature) + " K outside the radiated-power table [" + num(t_lo_) +
                            ", " + num(t_hi_) + "] K");
    const std::size_t c = node_curve_[node];
    const auto [lv, slope] = curves_[c].eval(std::log(temperature));
    const double v = std::exp(lv);
    return {node_scale_[node] * (v - curve_ambient_[c]), node_scale_[node] * v * slope / temperature};
}

double RadiationModel::emitted(std::size_t node, double temperature) const {
    if (kind_ == Radiator::None) return 0.0;
    return net(node, temperature).first + node_scale_[node] * curve_ambient_[node_curve_[node]];
}

double equilibrium_temperature(double absorbed_per_length, const RadiationModel& model, std::size_t node) {
    if (!(absorbed_per_length >= 0.0)) throw DomainError("equilibrium_temperature: absorbed power must be non-negative");
    const double t0 = model.ambient();
    if (absorbed_per_length == 0.0) return t0;
    if (model.kind() == Radiator::None) throw DomainError("equilibrium_temperature: no radiator");
    auto f = [&](double t) { return model.net(node, t).first - absorbed_per_length; };
    if (f(model.t_hi()) < 0.0)
        throw CoverageError("equilibrium_temperature: " + num(absorbed_per_length) +
                            " W/m exceeds the power radiated at the table limit " + num(model.t_hi()) + " K");
    return numerics::find_root(f, t0, model.t_hi(), 1e-3);
}

// --- schedule and configuration ---------------------------------------------------------------------

HeatingSchedule::HeatingSchedule(std::vector<Pulse> pulses) : pulses_(std::move(pulses)) {
    for (std::size_t i = 0; i < pulses_.size(); ++i) {
        const auto& p = pulses_[i];
        if (!(p.t_on >= 0.0 && p.t_off > p.t_on))
            throw ConfigError("heating schedule pulse " + std::to_string(i + 1) + ": need 0 <= t_on < t_off");
        if (!(p.power >= 0.0) || !std::isfinite(p.power))
            throw ConfigError("heating schedule pulse " + std::to_string(i + 1) + ": power must be non-negative");
    }
}

HeatingSchedule HeatingSchedule::single(double t_on, double t_off, double power) {
    return HeatingSchedule({{t_on, t_off, power}});
}

double HeatingSchedule::power(double time) const {
    double p = 0.0;
    for (const auto& pulse : pulses_)
        if (time >= pulse.t_on && time < pulse.t_off) p += pulse.power;
    return p;
}

double HeatingSchedule::peak() const {
    double best = 0.0;
    for (double t : breakpoints()) best = std::max(best, power(t));
    return best;
}

std::vector<double> HeatingSchedule::breakpoints() const {
    std::vector<double> b;
    for (const auto& p : pulses_) b.insert(b.end(), {p.t_on, p.t_off});
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

void SimulationConfig::validate() const {
    if (profile.size() < 3) throw ConfigError("simulation: 'profile' needs at least three nodes");
    if (!(eta_abs >= 0.0 && eta_abs <= 1.0)) throw ConfigError("simulation: 'eta_abs' must lie in [0, 1]");
    if (!(pressure >= 0.0)) throw ConfigError("simulation: 'pressure' must be non-negative");
    if (!(ambient > 0.0)) throw ConfigError("simulation: 'ambient' must be positive");
    if (!(steps.t_end > 0.0)) throw ConfigError("simulation: 't_end' must be positive");
    if (!(steps.rtol > 0.0 && steps.atol > 0.0)) throw ConfigError("simulation: tolerances must be positive");
    if (!(steps.dt_initial > 0.0 && steps.dt_max >= steps.dt_initial))
        throw ConfigError("simulation: need 0 < dt_initial <= dt_max");
    if (!(steps.budget_tolerance > 0.0)) throw ConfigError("simulation: 'budget_tolerance' must be positive");
    if (!initial_temperature.empty() && initial_temperature.size() != profile.size())
        throw ConfigError("simulation: 'initial_temperature' size differs from the profile");
}

// --- temperature field ---------------------------------------------------------------------------------

double TemperatureField::max_budget_residual() const {
    double worst = 0.0;
    for (const auto& b : budget) worst = std::max(worst, b.residual);
    return worst;
}

std::vector<double> TemperatureField::node_trace(std::size_t node) const {
    std::vector<double> out;
    out.reserve(temperature.size());
    for (const auto& row : temperature) out.push_back(row.at(node));
    return out;
}

void TemperatureField::write_csv(std::ostream& out) const {
    out << "time_s,z_m,T_K\n";
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t i = 0; i < z.size(); ++i)
            out << numerics::format_double(times[k]) << ',' << numerics::format_double(z[i]) << ','
                << numerics::format_double(temperature[k][i]) << '\n';
}

void TemperatureField::write_snapshot(std::ostream& out, std::size_t time_index) const {
    const auto& row = temperature.at(time_index);
    out << "# time_s=" << numerics::format_double(times[time_index]) << '\n' << "z_m,T_K\n";
    for (std::size_t i = 0; i < z.size(); ++i)
        out << numerics::format_double(z[i]) << ',' << numerics::format_double(row[i]) << '\n';
}

// --- system -----------------------------------------------------------------------------------------------

struct ThermalSystem::Eval {
    std::vector<double> g;           // W per node without heating
    std::vector<double> diag, off;   // dG/dT: diagonal, and the symmetric coupling between i and i+1
    std::vector<double> capacity;    // J/K per node
    double radiated = 0.0, gas = 0.0;
    bool extrapolated = false;
};

ThermalSystem::ThermalSystem(SimulationConfig config, materials::SilicaThermalProperties props,
                             materials::GasProperties gas, const RadiationModel& radiation)
    : config_(std::move(config)), props_(std::move(props)), gas_(gas), radiation_(&radiation) {
    config_.validate();
    const auto& prof = config_.profile;
    const std::size_t n = prof.size();
    if (radiation.size() != n)
        throw ConfigError("radiation model has " + std::to_string(radiation.size()) + " nodes, profile has " +
                          std::to_string(n));
    width_ = prof.trapezoid_weights();
    mass_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = prof.radius()[i];
        mass_[i] = props_.density * constants::pi * a * a * width_[i];
    }
    face_area_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a0 = prof.radius()[i], a1 = prof.radius()[i + 1];
        face_area_[i] = constants::pi * 0.5 * (a0 * a0 + a1 * a1);
    }
    shape_ = config_.eta_abs > 0.0 ? fiber::heating_profile(prof, 1.0, config_.heating) : std::vector<double>(n, 0.0);
    gas_coefficient_ = gas_.cooling_coefficient(config_.ambient);

    cp_t_ = props_.specific_heat.temperatures();
    const auto& cv = props_.specific_heat.values();
    if (cp_t_.empty()) throw ConfigError("specific heat table is empty");
    cp_e_.assign(cp_t_.size(), 0.0);
    for (std::size_t k = 1; k < cp_t_.size(); ++k)
        cp_e_[k] = cp_e_[k - 1] + 0.5 * (cv[k - 1] + cv[k]) * (cp_t_[k] - cp_t_[k - 1]);
}

// Integral of the piecewise-linear specific heat (held constant outside the table) from the first node.
double ThermalSystem::enthalpy_density(double t) const {
    const auto& cv = props_.specific_heat.values();
    if (t <= cp_t_.front()) return cv.front() * (t - cp_t_.front());
    if (t >= cp_t_.back()) return cp_e_.back() + cv.back() * (t - cp_t_.back());
    const std::size_t k = numerics::locate(cp_t_, t);
    const double d = t - cp_t_[k];
    const double slope = (cv[k + 1] - cv[k]) / (cp_t_[k + 1] - cp_t_[k]);
    return cp_e_[k] + cv[k] * d + 0.5 * slope * d * d;
}

double ThermalSystem::temperature_from_enthalpy(double e) const {
    const auto& cv = props_.specific_heat.values();
    if (e <= 0.0) return cp_t_.front() + e / cv.front();
    if (e >= cp_e_.back()) return cp_t_.back() + (e - cp_e_.back()) / cv.back();
    const std::size_t k = numerics::locate(cp_e_, e);
    const double de = e - cp_e_[k];
    const double slope = (cv[k + 1] - cv[k]) / (cp_t_[k + 1] - cp_t_[k]);
    // c d + slope d^2 / 2 = de, in the cancellation-free root form
    return cp_t_[k] + 2.0 * de / (cv[k] + std::sqrt(cv[k] * cv[k] + 2.0 * slope * de));
}

double ThermalSystem::node_enthalpy(std::size_t node, double temperature) const {
    return mass_.at(node) * (enthalpy_density(temperature) - enthalpy_density(config_.ambient));
}

double ThermalSystem::total_enthalpy(const std::vector<double>& temperature) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < temperature.size(); ++i) sum += node_enthalpy(i, temperature[i]);
    return sum;
}

void ThermalSystem::evaluate(const std::vector<double>& T, double /*heating_power*/, Eval& e, bool jacobian) const {
    const std::size_t n = T.size();
    const auto& z = config_.profile.z();
    const auto& a = config_.profile.radius();
    e.g.assign(n, 0.0);
    e.capacity.resize(n);
    if (jacobian) {
        e.diag.assign(n, 0.0);
        e.off.assign(n > 0 ? n - 1 : 0, 0.0);
    }
    e.radiated = e.gas = 0.0;
    e.extrapolated = false;
    const double t0 = config_.ambient;
    const double gas_k = gas_coefficient_ * config_.pressure * 2.0 * constants::pi;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(T[i]) || !(T[i] > 0.0))
            throw DomainError("temperature " + num(T[i]) + " K at node " + std::to_string(i) + " (z = " + num(z[i]) +
                              " m) is not physical");
        const auto cp = props_.specific_heat.at(T[i]);
        e.extrapolated |= cp.extrapolated;
        e.capacity[i] = mass_[i] * cp.value;
        std::pair<double, double> rad;
        try {
            rad = radiation_->net(i, T[i]);
        } catch (const CoverageError& err) {
            throw CoverageError(std::string(err.what()) + " at node " + std::to_string(i) + " (z = " + num(z[i]) + " m)");
        }
        const double gas = gas_k * a[i] * (T[i] - t0);
        e.g[i] = -width_[i] * (rad.first + gas);
        e.radiated += width_[i] * rad.first;
        e.gas += width_[i] * gas;
        if (jacobian) e.diag[i] = -width_[i] * (rad.second + gas_k * a[i]);
    }
    if (config_.conduction) {
        const double dz = config_.profile.dz();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto lambda = props_.conductivity.at(0.5 * (T[i] + T[i + 1]));
            e.extrapolated |= lambda.extrapolated;
            const double kappa = face_area_[i] * lambda.value / dz;
            const double flux = kappa * (T[i + 1] - T[i]);
            e.g[i] += flux;
            e.g[i + 1] -= flux;
            if (jacobian) {
                e.off[i] = kappa;
                e.diag[i] -= kappa;
                e.diag[i + 1] -= kappa;
            }
        }
    }
}

std::vector<double> ThermalSystem::rhs(const std::vector<double>& temperature, double heating_power) const {
    if (temperature.size() != mass_.size()) throw DomainError("rhs: temperature size differs from the profile");
    Eval e;
    evaluate(temperature, heating_power, e, false);
    const double absorbed = config_.eta_abs * heating_power;
    std::vector<double> dT(temperature.size());
    for (std::size_t i = 0; i < dT.size(); ++i)
        dT[i] = (e.g[i] + width_[i] * shape_[i] * absorbed) / e.capacity[i];
    return dT;
}

ThermalSystem::Terms ThermalSystem::totals(const std::vector<double>& temperature, double heating_power) const {
    Eval e;
    evaluate(temperature, heating_power, e, false);
    double shape_total = 0.0;
    for (std::size_t i = 0; i < shape_.size(); ++i) shape_total += width_[i] * shape_[i];
    return {config_.eta_abs * heating_power * shape_total, e.radiated, e.gas};
}

TemperatureField ThermalSystem::solve() const {
    const auto& cfg = config_;
    const auto& sc = cfg.steps;
    const std::size_t n = mass_.size();

    TemperatureField field;
    field.z = cfg.profile.z();
    field.ambient = cfg.ambient;
    const double peak_absorbed = cfg.eta_abs * cfg.schedule.peak();
    field.reference_power = peak_absorbed > 0.0 ? peak_absorbed : 1.0;
    field.gas_beyond_validity = cfg.pressure > field.gas_validity_pressure;

    std::vector<double> T = cfg.initial_temperature.empty() ? std::vector<double>(n, cfg.ambient) : cfg.initial_temperature;
    std::vector<double> E(n);
    for (std::size_t i = 0; i < n; ++i) E[i] = mass_[i] * enthalpy_density(T[i]);
    field.times.push_back(0.0);
    field.temperature.push_back(T);
    field.max_temperature = *std::max_element(T.begin(), T.end());

    std::vector<double> breaks;
    for (double b : cfg.schedule.breakpoints())
        if (b > 0.0 && b < sc.t_end) breaks.push_back(b);
    breaks.push_back(sc.t_end);

    double shape_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) shape_total += width_[i] * shape_[i];

    Eval now, stage, next;
    evaluate(T, 0.0, now, true);
    field.extrapolated |= now.extrapolated;

    std::vector<double> lower(n), diag(n), upper(n), k1(n), k2(n), E1(n), T1(n), En(n), Tn(n);
    double t = 0.0, h = std::min(sc.dt_initial, sc.dt_max);
    std::size_t steps = 0;
    while (t < sc.t_end) {
        if (++steps > sc.max_steps)
            throw ConvergenceError("thermal solve: step budget of " + std::to_string(sc.max_steps) +
                                   " exhausted at t = " + num(t) + " s");
        const double next_break = *std::upper_bound(breaks.begin(), breaks.end(), t * (1.0 + 1e-14) + 1e-300);
        bool hits = false;
        if (t + h >= next_break - 1e-12 * std::max(1.0, next_break)) {
            h = next_break - t;
            hits = true;
        }
        const double power = cfg.schedule.power(t + 0.5 * h);
        const double absorbed = cfg.eta_abs * power;

        // (I - gamma h J) with J = dG/dE = dG/dT diag(1 / C)
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = 1.0 - kGamma * h * now.diag[i] / now.capacity[i];
            lower[i] = i > 0 ? -kGamma * h * now.off[i - 1] / now.capacity[i - 1] : 0.0;
            upper[i] = i + 1 < n ? -kGamma * h * now.off[i] / now.capacity[i + 1] : 0.0;
        }
        for (std::size_t i = 0; i < n; ++i) k1[i] = now.g[i] + width_[i] * shape_[i] * absorbed;
        numerics::solve_tridiagonal(lower, diag, upper, k1);

        bool ok = true;
        double err = 0.0, residual = 0.0, stored = 0.0, in_avg = 0.0, radiated = 0.0, gas = 0.0;
        try {
            for (std::size_t i = 0; i < n; ++i) {
                E1[i] = E[i] + h * k1[i];
                T1[i] = temperature_from_enthalpy(E1[i] / mass_[i]);
            }
            evaluate(T1, power, stage, false);
            for (std::size_t i = 0; i < n; ++i) k2[i] = stage.g[i] + width_[i] * shape_[i] * absorbed - 2.0 * k1[i];
            numerics::solve_tridiagonal(lower, diag, upper, k2);
            for (std::size_t i = 0; i < n; ++i) {
                En[i] = E[i] + h * (1.5 * k1[i] + 0.5 * k2[i]);
                Tn[i] = temperature_from_enthalpy(En[i] / mass_[i]);
            }
            evaluate(Tn, power, next, true);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e_T = 0.5 * h * (k1[i] + k2[i]) / next.capacity[i];
                const double scale = sc.atol + sc.rtol * std::max(std::abs(T[i]), std::abs(Tn[i]));
                sum += (e_T / scale) * (e_T / scale);
                stored += En[i] - E[i];
            }
            err = std::sqrt(sum / static_cast<double>(n));
            stored /= h;
            radiated = 0.5 * (now.radiated + next.radiated);
            gas = 0.5 * (now.gas + next.gas);
            in_avg = absorbed * shape_total - radiated - gas;
            residual = std::abs(stored - in_avg) / field.reference_power;
        } catch (const Error&) {
            if (h <= 1e3 * sc.dt_min) throw;
            ok = false;
        }

        if (ok && err <= 1.0 && residual <= 0.5 * sc.budget_tolerance) {
            t = hits ? next_break : t + h;
            E.swap(En);
            T.swap(Tn);
            std::swap(now, next);
            field.extrapolated |= now.extrapolated;
            field.times.push_back(t);
            field.temperature.push_back(T);
            field.max_temperature = std::max(field.max_temperature, *std::max_element(T.begin(), T.end()));
            field.budget.push_back({t, h, stored, absorbed * shape_total, radiated, gas, residual});
            ++field.accepted;
            const double grow = err > 0.0 ? 0.9 / std::sqrt(err) : 5.0;
            h = std::min(sc.dt_max, h * std::clamp(grow, 0.2, 5.0));
        } else {
            ++field.rejected;
            double shrink = 0.25;
            if (ok && err > 1.0) shrink = std::clamp(0.9 / std::sqrt(err), 0.2, 0.9);
            if (ok && err <= 1.0) shrink = 0.5;  // energy budget
            h *= shrink;
            if (h < sc.dt_min)
                throw ConvergenceError("thermal solve: step size below " + num(sc.dt_min) + " s at t = " + num(t) + " s");
        }
    }
    return field;
}

std::vector<double> ThermalSystem::steady_state(double absorbed_power, double tolerance) const {
    if (!(absorbed_power >= 0.0)) throw DomainError("steady_state: absorbed power must be non-negative");
    const std::size_t n = mass_.size();
    std::vector<double> T(n, config_.ambient);
    if (absorbed_power == 0.0) return T;
    if (radiation_->kind() == Radiator::None && config_.pressure == 0.0)
        throw DomainError("steady_state: no heat sink without radiation or gas");

    auto residual = [&](const Eval& e) {
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) r += std::abs(e.g[i] + width_[i] * shape_[i] * absorbed_power);
        return r;
    };
    Eval now, trial;
    evaluate(T, 0.0, now, true);
    double r_now = residual(now);
    std::vector<double> lower(n), diag(n), upper(n), delta(n), Tn(n);
    double dt = 1e-3;
    int coverage_failures = 0;
    for (int it = 0; it < 5000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = now.capacity[i] / dt - now.diag[i];
            lower[i] = i > 0 ? -now.off[i - 1] : 0.0;
            upper[i] = i + 1 < n ? -now.off[i] : 0.0;
            delta[i] = now.g[i] + width_[i] * shape_[i] * absorbed_power;
        }
        numerics::solve_tridiagonal(lower, diag, upper, delta);
        bool ok = true;
        double moved = 0.0;
        try {
            for (std::size_t i = 0; i < n; ++i) {
                Tn[i] = T[i] + delta[i];
                moved = std::max(moved, std::abs(delta[i]));
            }
            evaluate(Tn, 0.0, trial, true);
        } catch (const CoverageError& e) {
            if (++coverage_failures > 40) throw CoverageError("steady_state: " + std::string(e.what()));
            ok = false;
        } catch (const DomainError&) {
            ok = false;
        }
        const double r_trial = ok ? residual(trial) : 0.0;
        // residuals below the floor are rounding noise and must not block the step growth
        if (!ok || r_trial > 2.0 * r_now + 1e-12 * absorbed_power) {
            dt *= 0.25;
            if (dt < 1e-12) {
                if (coverage_failures > 0) throw CoverageError("steady_state: field leaves the radiated-power table");
                throw ConvergenceError("steady_state: continuation step collapsed");
            }
            continue;
        }
        T.swap(Tn);
        std::swap(now, trial);
        r_now = r_trial;
        if (moved <= tolerance && dt >= 1e6) return T;
        dt = std::min(dt * 4.0, 1e12);
    }
    throw ConvergenceError("steady_state: no convergence within 5000 continuation steps");
}

}  // namespace nanotherm::thermal
