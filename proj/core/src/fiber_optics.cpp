#include "nanotherm/fiber_optics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/numerics.hpp"
#include "nanotherm/tabular.hpp"

namespace nanotherm::fiber {

namespace {

constexpr double kJ01 = 2.404825557695773;  // first zero of J0
constexpr double kMinW = 1e-280;
constexpr double kMaxV = 650.0;             // K_nu(W) underflows beyond this

std::string num(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

// Transverse parameters with their Bessel values, shared by the eigenvalue equation and the field sums.
struct Point {
    double U, W;
    double j0, j1;  // J0(U), J1(U)
    double r0;      // K0(W) / K1(W)
    double X;       // J1'(U) / (U J1(U))
    double g;       // K0(W) / (W K1(W))
};

Point make_point(double U, double W) {
    Point p{U, W, std::cyl_bessel_j(0.0, U), std::cyl_bessel_j(1.0, U), 0.0, 0.0, 0.0};
    p.r0 = std::cyl_bessel_k(0.0, W) / std::cyl_bessel_k(1.0, W);
    p.X = (p.j0 / p.j1 - 1.0 / U) / U;
    p.g = p.r0 / W;
    return p;
}

// Azimuthal order 1 eigenvalue equation (X + Y)(n1^2 X + n2^2 Y) = (beta/k0)^2 (1/U^2 + 1/W^2)^2 with
// Y = K1'(W)/(W K1(W)), multiplied by W^2 after expanding so that no 1/W^2 terms cancel.
double residual(const Point& p, double n1, double V) {
    const double n1s = n1 * n1, n2s = 1.0, delta = n1s - n2s;
    const double W2 = p.W * p.W, U2 = p.U * p.U;
    const double a = 1.0 + W2 / U2;
    return n1s * W2 * p.X * p.X - (n1s + n2s) * (1.0 + W2 * p.g) * p.X + n2s * (2.0 * p.g + W2 * p.g * p.g) -
           n2s * (2.0 / U2 + W2 / (U2 * U2)) - delta / (V * V) * a * a;
}

struct Variable {
    bool by_w;  // root sought in ln W (weak guidance) or in U
    double V;
    Point at(double t) const {
        if (by_w) {
            const double W = std::exp(t);
            return make_point(std::sqrt((V - W) * (V + W)), W);
        }
        return make_point(t, std::sqrt((V - t) * (V + t)));
    }
};

ModeSolution finish(double radius, double n1, double lambda, double V, const Point& p) {
    const double n1s = n1 * n1, n2s = 1.0, delta = n1s - n2s;
    const double U = p.U, W = p.W, U2 = U * U, W2 = W * W, V2 = V * V;
    ModeSolution m;
    m.radius = radius;
    m.index = n1;
    m.wavelength = lambda;
    m.V = V;
    m.U = U;
    m.W = W;
    // n_eff^2 - 1 = W^2 (n^2 - 1) / V^2 keeps n_eff - 1 resolved when the mode is barely guided.
    const double excess = W2 * delta / V2;
    const double neff2 = n2s + excess;
    m.n_eff_minus_one = excess / (1.0 + std::sqrt(1.0 + excess));
    m.n_eff = 1.0 + m.n_eff_minus_one;
    m.beta = 2.0 * constants::pi / lambda * m.n_eff;

    // s = (1/U^2 + 1/W^2) / (X + Y) and its companions s1, s2 with (beta/k0 n_i)^2 factors.
    const double den = W2 * p.X - 1.0 - W2 * p.g;
    const double s = (W2 / U2 + 1.0) / den;
    const double one_plus_s_over_w2 = (1.0 / U2 + p.X - p.g) / den;
    const double one_plus_s = W2 * one_plus_s_over_w2;
    const double b1 = neff2 / n1s, b2 = neff2 / n2s;
    const double one_plus_s1 = one_plus_s + (b1 - 1.0) * s, one_minus_s1 = 1.0 - b1 * s;
    const double one_plus_s2 = one_plus_s + (b2 - 1.0) * s, one_minus_s2 = 1.0 - b2 * s;
    const double one_minus_s = 1.0 - s;

    const double j2 = std::cyl_bessel_j(2.0, U), j3 = std::cyl_bessel_j(3.0, U);
    const double inside = one_minus_s * one_minus_s1 * (p.j0 * p.j0 + p.j1 * p.j1) +
                          one_plus_s * one_plus_s1 * (j2 * j2 - p.j1 * j3);
    // With K ratios r0 = K0/K1, W r2 = W r0 + 2, and (K1 K3 - K2^2)/K1^2 = 1 + 4/W^2 - r0^2.
    const double wr2 = W * p.r0 + 2.0;
    const double surface = one_minus_s * one_minus_s2 * p.r0 * p.r0 + one_plus_s_over_w2 * one_plus_s2 * wr2 * wr2;
    const double outside = one_minus_s * one_minus_s2 * (1.0 - p.r0 * p.r0) +
                           one_plus_s_over_w2 * one_plus_s2 * (W2 + 4.0 - W2 * p.r0 * p.r0);
    const double p_in = n1s * W2 / U2 * inside;
    const double p_out = n2s * p.j1 * p.j1 * outside;
    m.s_surf = 2.0 / radius * n2s * p.j1 * p.j1 * surface / (p_in + p_out);
    m.core_fraction = p_in / (p_in + p_out);
    return m;
}

ModeSolution solve(double radius, double n1, double lambda, const ModeSolution* hint) {
    if (!(radius > 0.0)) throw DomainError("solve_he11: radius must be positive");
    if (!(n1 > 1.0)) throw DomainError("solve_he11: index must exceed 1");
    if (!(lambda > 0.0)) throw DomainError("solve_he11: wavelength must be positive");
    const double V = 2.0 * constants::pi * radius * std::sqrt(n1 * n1 - 1.0) / lambda;
    const std::string ctx = " (V=" + num(V) + ", n=" + num(n1) + ")";
    if (V > kMaxV) throw DomainError("solve_he11: V too large for double-precision Bessel K" + ctx);

    const Variable var{V <= 2.0, V};
    auto f = [&](double t) { return residual(var.at(t), n1, V); };
    // As U -> 0 the leading 1/U^4 terms cancel and rounding produces spurious sign changes;
    // the HE11 root has U close to V for V <= 2 and U > 1.5 above, so U < 0.01 min(V, j01) is excluded.
    double lo, hi;
    if (var.by_w) {
        lo = std::log(kMinW);
        hi = std::log(V) + 0.5 * std::log1p(-1e-4);
    } else {
        lo = 1e-2 * std::min(V, kJ01);
        hi = std::min(V * (1.0 - 1e-9), kJ01);
    }

    double a = 0.0, b = 0.0;
    bool bracketed = false;
    if (hint != nullptr && hint->W > 0.0) {
        const double t0 = var.by_w ? std::log(hint->W) : hint->U;
        const double span = var.by_w ? 1e-2 : 1e-2 * t0;
        const double ta = std::max(lo, t0 - span), tb = std::min(hi, t0 + span);
        const double fa = f(ta), fb = f(tb);
        if (std::isfinite(fa) && std::isfinite(fb) && (fa > 0.0) != (fb > 0.0)) {
            a = ta, b = tb;
            bracketed = true;
        }
    }
    if (!bracketed) {
        constexpr int kScan = 240;
        double t_prev = lo, f_prev = f(lo);
        for (int i = 1; i <= kScan && !bracketed; ++i) {
            const double t = lo + (hi - lo) * i / kScan;
            const double ft = f(t);
            if (std::isfinite(f_prev) && std::isfinite(ft) && (f_prev > 0.0) != (ft > 0.0)) {
                a = t_prev, b = t;
                bracketed = true;
            }
            t_prev = t, f_prev = ft;
        }
    }
    if (!bracketed) throw ConvergenceError("solve_he11: no HE11 root bracketed" + ctx);
    const double xtol = 8.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(a), std::abs(b)});
    const double t = numerics::find_root(f, a, b, xtol);
    return finish(radius, n1, lambda, V, var.at(t));
}

}  // namespace

// --- taper geometry -----------------------------------------------------------------------------

TaperParameters TaperParameters::tof1() { return {}; }

TaperParameters TaperParameters::tof2() {
    TaperParameters p;
    p.L_waist = 5e-3;
    return p;
}

double TaperParameters::r3() const { return std::tan(theta3) * L_exp; }

void TaperParameters::validate() const {
    auto need = [](bool ok, const char* field, const std::string& what) {
        if (!ok) throw ConfigError(std::string("taper parameter '") + field + "': " + what);
    };
    need(theta1 > 0.0 && theta1 < constants::pi / 2, "theta1", "must lie in (0, pi/2)");
    need(theta2 > 0.0 && theta2 < constants::pi / 2, "theta2", "must lie in (0, pi/2)");
    need(theta3 > 0.0 && theta3 < constants::pi / 2, "theta3", "must lie in (0, pi/2)");
    need(a_waist > 0.0, "a_waist", "must be positive");
    need(L_waist > 0.0, "L_waist", "must be positive");
    need(L_exp > 0.0, "L_exp", "must be positive");
    need(r_clad > r1, "r1", "must be below r_clad");
    need(r1 > r2, "r2", "must be below r1");
    need(r2 > a_waist, "a_waist", "must be below r2");
    need(r3() < r2, "L_exp", "exponential section starts at tan(theta3) L_exp = " + num(r3()) + " m, above r2");
    need(r3() > a_waist, "L_exp", "exponential section starts at tan(theta3) L_exp = " + num(r3()) +
                                      " m, below a_waist");
}

double TaperParameters::radius_at(double d) const {
    double s = std::abs(d) - 0.5 * L_waist;
    if (s <= 0.0) return a_waist;
    const double rc = r3();
    const double s_exp = L_exp * std::log(rc / a_waist);
    if (s <= s_exp) return a_waist * std::exp(s / L_exp);
    s -= s_exp;
    struct Section {
        double r_from, r_to, slope;
    };
    const Section sections[] = {{rc, r2, std::tan(theta3)}, {r2, r1, std::tan(theta2)}, {r1, r_clad, std::tan(theta1)}};
    for (const auto& sec : sections) {
        const double len = (sec.r_to - sec.r_from) / sec.slope;
        if (s <= len) return sec.r_from + sec.slope * s;
        s -= len;
    }
    return r_clad;
}

RadiusProfile::RadiusProfile(std::vector<double> z, std::vector<double> radius) : z_(std::move(z)), a_(std::move(radius)) {
    if (z_.size() != a_.size()) throw InvariantError("radius profile: z and radius sizes differ", "radius_m");
    if (z_.size() < 3) throw InvariantError("radius profile: at least three nodes required", "z_m");
    dz_ = (z_.back() - z_.front()) / static_cast<double>(z_.size() - 1);
    for (std::size_t i = 0; i < z_.size(); ++i) {
        if (!(a_[i] > 0.0))
            throw InvariantError("radius profile row " + std::to_string(i + 1) + ": radius must be positive",
                                 "radius_m", i + 1);
        if (i > 0) {
            const double step = z_[i] - z_[i - 1];
            if (!(step > 0.0) || std::abs(step - dz_) > 1e-6 * dz_)
                throw InvariantError("radius profile row " + std::to_string(i + 1) + ": grid is not uniform", "z_m",
                                     i + 1);
        }
    }
}

double RadiusProfile::min_radius() const { return *std::min_element(a_.begin(), a_.end()); }

std::vector<double> RadiusProfile::trapezoid_weights() const {
    std::vector<double> w(z_.size(), dz_);
    w.front() = w.back() = 0.5 * dz_;
    return w;
}

std::uint64_t RadiusProfile::hash() const {
    return numerics::fnv1a(a_, numerics::fnv1a(z_, numerics::fnv1a(std::string_view("radius-profile"))));
}

RadiusProfile build_radius_profile(const TaperParameters& params, const ProfileGrid& grid) {
    params.validate();
    if (!(grid.dz > 0.0)) throw ConfigError("profile grid 'dz' must be positive");
    if (!(grid.margin >= grid.dz)) throw ConfigError("profile grid 'margin' must be at least one grid step");
    const double length = params.L_waist + 2.0 * grid.margin;
    const double cells = length / grid.dz;
    const long n = std::lround(cells);
    if (std::abs(cells - static_cast<double>(n)) > 1e-6)
        throw ConfigError("profile grid: L_waist + 2 margin = " + num(length) + " m is not a multiple of dz = " +
                          num(grid.dz) + " m");
    std::vector<double> z(static_cast<std::size_t>(n) + 1), a(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = (static_cast<double>(i) - 0.5 * static_cast<double>(n)) * grid.dz;
        a[i] = params.radius_at(z[i]);
    }
    return RadiusProfile(std::move(z), std::move(a));
}

void write_profile(std::ostream& out, const RadiusProfile& profile) {
    out << "z_m,radius_m\n";
    for (std::size_t i = 0; i < profile.size(); ++i)
        out << numerics::format_double(profile.z()[i]) << ',' << numerics::format_double(profile.radius()[i]) << '\n';
}

RadiusProfile read_profile(std::istream& in) {
    const auto doc = tabular::read_csv(in);
    tabular::require_header(doc.header, {"z_m", "radius_m"});
    std::vector<double> z, a;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        if (row.size() < 2) throw ParseError("radius profile row " + std::to_string(r + 1) + ": missing fields", r + 1);
        z.push_back(tabular::parse_number(row[0], r + 1, "z_m"));
        a.push_back(tabular::parse_number(row[1], r + 1, "radius_m"));
    }
    return RadiusProfile(std::move(z), std::move(a));
}

RadiusProfile read_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open radius profile '" + path.string() + "'");
    return read_profile(in);
}

// --- guided mode ---------------------------------------------------------------------------------

ModeSolution solve_he11(double radius, double index, double wavelength) {
    return solve(radius, index, wavelength, nullptr);
}

ModeDerivatives mode_derivatives(double radius, double index, double wavelength, double step) {
    const ModeSolution base = solve(radius, index, wavelength, nullptr);
    auto central = [&](auto&& at, double x, double h) {
        return (at(x + h).n_eff_minus_one - at(x - h).n_eff_minus_one) / (2.0 * h);
    };
    auto in_n = [&](double n) { return solve(radius, n, wavelength, &base); };
    auto in_a = [&](double a) { return solve(a, index, wavelength, &base); };

    const double hn = step * index, ha = step * radius;
    ModeDerivatives d{radius, index, base.n_eff, central(in_n, index, hn), central(in_a, radius, ha)};
    const double dn2 = central(in_n, index, 2.0 * hn), da2 = central(in_a, radius, 2.0 * ha);
    // The h and 2h estimates differ by O(h^2); anything larger is root-solver noise.
    const bool ok_n = std::abs(d.dneff_dn - dn2) * index <= 1e-4 * std::abs(d.dneff_dn) * index + 1e-11;
    const bool ok_a = std::abs(d.dneff_da - da2) * radius <= 1e-4 * std::abs(d.dneff_da) * radius + 1e-11;
    if (!ok_n || !ok_a)
        throw ConvergenceError("mode_derivatives: finite differences inconsistent at a=" + num(radius) +
                               " m (V=" + num(base.V) + ", n=" + num(index) + ")");
    return d;
}

double dneff_dT(const ModeDerivatives& mode, double temperature, const materials::SilicaThermalProperties& props) {
    const double dn_dT = materials::SilicaThermalProperties::thermo_optic(temperature).value;
    const double alpha = props.expansion(temperature);
    return mode.dneff_dn * (dn_dT - mode.index * alpha * props.strain_optic) +
           mode.dneff_da * (1.0 + props.poisson) * alpha * mode.radius;
}

double dneff_dT(double radius, double temperature, const materials::SilicaThermalProperties& props, double index,
                double wavelength) {
    return dneff_dT(mode_derivatives(radius, index, wavelength), temperature, props);
}

ModeCache::ModeCache(double index, double wavelength) : index_(index), wavelength_(wavelength) {}

ModeDerivatives ModeCache::derivatives(double radius) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = derivs_.find(radius); it != derivs_.end()) return it->second;
    }
    const auto d = mode_derivatives(radius, index_, wavelength_);
    std::lock_guard lock(mutex_);
    return derivs_.emplace(radius, d).first->second;
}

ModeSolution ModeCache::mode(double radius) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = modes_.find(radius); it != modes_.end()) return it->second;
    }
    const auto m = solve_he11(radius, index_, wavelength_);
    std::lock_guard lock(mutex_);
    return modes_.emplace(radius, m).first->second;
}

std::size_t ModeCache::size() const {
    std::lock_guard lock(mutex_);
    return derivs_.size() + modes_.size();
}

// --- heating and readout ---------------------------------------------------------------------------

std::vector<double> heating_profile(const RadiusProfile& profile, double absorbed_power, HeatingModel model,
                                    ModeCache* cache) {
    if (!(absorbed_power >= 0.0)) throw DomainError("heating_profile: absorbed power must be non-negative");
    ModeCache local;
    ModeCache& modes = cache != nullptr ? *cache : local;
    std::vector<double> q(profile.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto m = modes.mode(profile.radius()[i]);
        q[i] = model == HeatingModel::Surface ? m.s_surf : m.core_fraction;
    }
    const auto w = profile.trapezoid_weights();
    double total = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) total += w[i] * q[i];
    if (!(total > 0.0)) throw DomainError("heating_profile: deposition shape integrates to zero");
    for (double& v : q) v *= absorbed_power / total;
    return q;
}

PathLengthModel::PathLengthModel(const RadiusProfile& profile, materials::SilicaThermalProperties props,
                                 double ambient, ModeCache* cache)
    : weights_(profile.trapezoid_weights()), props_(std::move(props)), ambient_(ambient) {
    ModeCache local;
    ModeCache& modes = cache != nullptr ? *cache : local;
    modes_.reserve(profile.size());
    for (double a : profile.radius()) modes_.push_back(modes.derivatives(a));
}

double PathLengthModel::delta_l_opt(const std::vector<double>& temperatures) const {
    if (temperatures.size() != modes_.size())
        throw DomainError("optical_path_change: temperature field has " + std::to_string(temperatures.size()) +
                          " nodes, profile has " + std::to_string(modes_.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        const double dT = temperatures[i] - ambient_;
        if (dT == 0.0) continue;
        sum += weights_[i] * dneff_dT(modes_[i], 0.5 * (ambient_ + temperatures[i]), props_) * dT;
    }
    return sum;
}

double optical_path_change(const std::vector<double>& temperatures, const RadiusProfile& profile,
                           const materials::SilicaThermalProperties& props, double ambient) {
    return PathLengthModel(profile, props, ambient).delta_l_opt(temperatures);
}

Staircase quantize_readout(const std::vector<double>& times, const std::vector<double>& values, double step) {
    if (times.size() != values.size()) throw DomainError("quantize_readout: times and values differ in length");
    if (!(step > 0.0)) throw DomainError("quantize_readout: step must be positive");
    Staircase out;
    if (values.empty()) {
        out.augmentation = {0.0, 0.5 * step, 0.5 * step};
        return out;
    }
    const double x0 = values.front();
    long level = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
        const double prev = values[k - 1] - x0, cur = values[k] - x0;
        auto crossing = [&](double target) {
            const double span = cur - prev;
            const double t = span == 0.0 ? 1.0 : (target - prev) / span;
            return times[k - 1] + std::clamp(t, 0.0, 1.0) * (times[k] - times[k - 1]);
        };
        while (cur >= static_cast<double>(level + 1) * step) {
            ++level;
            const double target = static_cast<double>(level) * step;
            out.steps.push_back({crossing(target), target, 0.0});
        }
        while (cur <= static_cast<double>(level - 1) * step) {
            --level;
            const double target = static_cast<double>(level) * step;
            out.steps.push_back({crossing(target), target, 0.0});
        }
    }
    const double drift = values.back() - x0;
    const double sign = level != 0 ? (level > 0 ? 1.0 : -1.0) : (drift < 0.0 ? -1.0 : 1.0);
    out.augmentation = {times.back(), static_cast<double>(level) * step + sign * 0.5 * step, 0.5 * step};
    return out;
}

}  // namespace nanotherm::fiber
