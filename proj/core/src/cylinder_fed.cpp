#include "nanotherm/cylinder_fed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/numerics.hpp"
#include "nanotherm/radiometry.hpp"
#include "nanotherm/specfun.hpp"
#include "nanotherm/tabular.hpp"

namespace nanotherm::fed {

namespace c = constants;
using numerics::format_double;

namespace {

const cplx kI{0.0, 1.0};

cplx axial_root(cplx eps_mu, double xi) {
    cplx s = std::sqrt(eps_mu - xi * xi);
    if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() < 0.0)) s = -s;
    return s;
}

struct Elements {
    cplx perp_perp, par_par, cross;
};

// Elements from precomputed cylinder functions. `ratio1` is J_l'(x1)/J_l(x1).
// Written without dividing by J_l(qa), so zeros of J_l(qa) are harmless.
Elements elements(int l, double xi, double x, cplx x1, cplx eps, cplx mu, cplx sqrt_eps_mu, cplx j, cplx dj, cplx h,
                  cplx dh, cplx ratio1) {
    const cplx a1 = ratio1 / x1;
    const cplx hq = dh / (x * h);
    const cplx d1 = a1 - hq / eps;
    const cplx d2 = a1 - hq / mu;
    const cplx k = static_cast<double>(l) * xi / sqrt_eps_mu * (1.0 / (x1 * x1) - 1.0 / (x * x));
    const cplx k2 = k * k;
    const cplx denom = d1 * d2 - k2;
    const cplx ja = j * a1;
    Elements e;
    e.perp_perp = -(d1 * (ja - dj / (mu * x)) - k2 * j) / (h * denom);
    e.par_par = -(d2 * (ja - dj / (eps * x)) - k2 * j) / (h * denom);
    const cplx xh = x * h;
    e.cross = 2.0 * kI * k / (c::pi * sqrt_eps_mu * xh * xh * denom);
    return e;
}

double bracket(const Elements& e) {
    return e.perp_perp.real() + std::norm(e.perp_perp) + e.par_par.real() + std::norm(e.par_par) +
           2.0 * std::norm(e.cross);
}

struct AngleTerms {
    double sum = 0.0;   // over l = -L..L
    double tail = 0.0;  // |contribution| of the three highest |l|
};

AngleTerms angle_terms(double k0a, cplx eps, double xi, double sin_theta, int l_max) {
    const double x = k0a * sin_theta;
    const cplx x1 = k0a * axial_root(eps, xi);
    const cplx sqrt_eps = std::sqrt(eps);
    const auto batch = specfun::cylinder_functions(l_max, x, specfun::OverflowPolicy::Truncate);
    const int top = std::min(l_max, batch.size() - 1);
    const auto ratio = specfun::bessel_j_log_derivatives(top, x1);
    AngleTerms out;
    for (int l = 0; l <= top; ++l) {
        const auto e = elements(l, xi, x, x1, eps, 1.0, sqrt_eps, batch.j[l], batch.dj[l], batch.h[l], batch.dh[l],
                                ratio[l]);
        const double b = (l == 0 ? 1.0 : 2.0) * bracket(e);
        out.sum += b;
        if (top == l_max && l > l_max - 3) out.tail += std::abs(b);
    }
    return out;
}

struct XiIntegral {
    double value = 0.0;
    double tail = 0.0;
};

constexpr int kPanelOrder = 16;

// int_{-1}^{1} d xi sum_l (...) = 2 int_0^{pi/2} S(cos t) sin t dt, composite Gauss-Legendre
XiIntegral xi_integral(double k0a, cplx eps, int panels, int l_max) {
    const auto& rule = numerics::gauss_legendre(kPanelOrder);
    const double half = 0.25 * c::pi / panels;
    XiIntegral out;
    for (int p = 0; p < panels; ++p) {
        const double mid = (2 * p + 1) * half;
        for (int i = 0; i < kPanelOrder; ++i) {
            const double theta = mid + half * rule.nodes[i];
            const double s = std::sin(theta);
            const auto terms = angle_terms(k0a, eps, std::cos(theta), s, l_max);
            out.value += rule.weights[i] * s * terms.sum;
            out.tail += rule.weights[i] * s * terms.tail;
        }
    }
    out.value *= 2.0 * half;
    out.tail *= 2.0 * half;
    return out;
}

int automatic_l_max(double k0a, cplx eps) {
    const double size = std::max(1.0, std::abs(std::sqrt(eps))) * k0a;
    return static_cast<int>(std::ceil(size + 4.0 * std::cbrt(size) + 10.0));
}

std::string context(double nu, double radius) {
    return " (nu=" + format_double(nu) + " Hz, a=" + format_double(radius) + " m)";
}

}  // namespace

TMatrixBlock t_matrix(int l, double xi, double frequency, double radius, cplx eps, cplx mu) {
    if (!(std::abs(xi) < 1.0)) throw DomainError("t_matrix: |xi| must be < 1");
    if (!(radius > 0.0) || !(frequency > 0.0)) throw DomainError("t_matrix: radius and frequency must be positive");
    if (!std::isfinite(eps.real()) || !std::isfinite(eps.imag()) || eps.imag() < 0.0)
        throw DomainError("t_matrix: eps must be finite with Im eps >= 0");
    const double k0 = 2.0 * c::pi * frequency / c::speed_of_light;
    const double x = k0 * radius * std::sqrt(1.0 - xi * xi);
    const cplx x1 = k0 * radius * axial_root(eps * mu, xi);
    const int order = std::abs(l);
    try {
        const auto b = specfun::cylinder_functions(order, x);
        const auto r = specfun::bessel_j_log_derivatives(order, x1);
        // J'/J, H'/H and J/H are even in l; only K changes sign with l.
        const auto e = elements(l, xi, x, x1, eps, mu, std::sqrt(eps * mu), b.j[order], b.dj[order], b.h[order],
                                b.dh[order], r[order]);
        return {l, xi, e.perp_perp, e.par_par, e.cross};
    } catch (const Error& err) {
        throw DomainError(std::string(err.what()) + " in t_matrix(l=" + std::to_string(l) +
                          ", xi=" + format_double(xi) + ", nu=" + format_double(frequency) + ")");
    }
}

double mode_sum(double frequency, double radius, cplx eps, double xi, int l_max) {
    const double k0a = 2.0 * c::pi * frequency / c::speed_of_light * radius;
    return angle_terms(k0a, eps, xi, std::sqrt(1.0 - xi * xi), l_max).sum;
}

EmissivityResult cylinder_spectral_emissivity(double frequency, double radius, cplx eps,
                                              const EmissivityOptions& options) {
    if (!(frequency > 0.0) || !(radius > 0.0)) throw DomainError("emissivity: frequency and radius must be positive");
    if (eps.imag() < 0.0) throw DomainError("emissivity: Im eps must be non-negative");
    const double k0a = 2.0 * c::pi * frequency / c::speed_of_light * radius;
    // eps(nu) = -(2 / (pi k0 a)) * I
    const double scale = -2.0 / (c::pi * k0a);
    const double floor = options.absolute_floor / std::abs(scale);

    int l_max = options.l_max > 0 ? options.l_max : automatic_l_max(k0a, eps);
    while (true) {
        int panels = std::max(1, options.xi_initial_nodes / kPanelOrder);
        XiIntegral older, prev = xi_integral(k0a, eps, panels, l_max);
        XiIntegral cur = prev;
        while (true) {
            panels *= 2;
            cur = xi_integral(k0a, eps, panels, l_max);
            const int nodes = panels * kPanelOrder;
            const double diff = std::abs(cur.value - prev.value);
            if (diff <= options.xi_relative_tolerance * std::abs(cur.value) + floor) break;
            if (nodes >= options.xi_max_nodes) {
                const double loose = options.resonance_tolerance * std::abs(cur.value) + floor;
                if (diff <= loose && std::abs(cur.value - older.value) <= loose) break;
                throw ConvergenceError("emissivity xi-quadrature did not converge with " + std::to_string(nodes) +
                                       " nodes" + context(frequency, radius));
            }
            older = prev;
            prev = cur;
        }
        const bool fixed_l = options.l_max > 0;
        if (fixed_l || cur.tail <= options.l_tail_tolerance * std::abs(cur.value) + floor)
            return {std::max(0.0, scale * cur.value), l_max, panels * kPanelOrder,
                    std::abs(scale * (cur.value - prev.value))};
        const int next = static_cast<int>(std::ceil(1.5 * l_max)) + 10;
        if (next > options.l_max_cap)
            throw ConvergenceError("emissivity l-sum not converged at l_max=" + std::to_string(l_max) +
                                   context(frequency, radius));
        l_max = next;
    }
}

EmissivityResult cylinder_spectral_emissivity(double frequency, double radius,
                                              const materials::RefractiveIndexTable& table,
                                              materials::CornerSelector corner, const EmissivityOptions& options) {
    return cylinder_spectral_emissivity(frequency, radius, table.dielectric_at(c::speed_of_light / frequency, corner),
                                        options);
}

FrequencyGrid::FrequencyGrid(std::vector<double> nodes, std::vector<double> weights, double lower, double upper,
                             double t_lo, double t_hi)
    : nu_(std::move(nodes)), w_(std::move(weights)), lo_(lower), hi_(upper), t_lo_(t_lo), t_hi_(t_hi) {
    if (nu_.size() < 2 || w_.size() != nu_.size()) throw DomainError("frequency grid needs matching nodes and weights");
    for (std::size_t i = 0; i < nu_.size(); ++i) {
        if (!(nu_[i] > 0.0) || (i > 0 && !(nu_[i] > nu_[i - 1])))
            throw DomainError("frequency grid must be positive and strictly increasing");
        if (!(w_[i] > 0.0)) throw DomainError("frequency grid weights must be positive");
    }
    if (!(lo_ > 0.0 && lo_ <= nu_.front() && hi_ >= nu_.back()))
        throw DomainError("frequency grid bounds must enclose the nodes");
    if (!(t_lo_ >= 0.0 && t_hi_ >= t_lo_)) throw DomainError("frequency grid: invalid temperature range");
    const double bounds[] = {lo_, hi_, t_lo_, t_hi_};
    hash_ = numerics::fnv1a(bounds, numerics::fnv1a(w_, numerics::fnv1a(nu_)));
}

FrequencyGrid FrequencyGrid::planck_union(double t_lo, double t_hi, const materials::RefractiveIndexTable& table,
                                          double panels_per_decade, int gauss_order,
                                          const std::vector<Refinement>& refinements, double reduced_lo,
                                          double reduced_hi) {
    if (!(t_lo > 0.0 && t_hi >= t_lo)) throw DomainError("frequency grid: invalid temperature range");
    if (!(panels_per_decade > 0.0) || gauss_order < 1) throw DomainError("frequency grid: invalid resolution");
    const double lo = std::max(radiometry::frequency_for_reduced(reduced_lo, t_lo),
                               c::speed_of_light / table.wavelength_hi());
    const double hi = std::min(radiometry::frequency_for_reduced(reduced_hi, t_hi),
                               c::speed_of_light / table.wavelength_lo());
    if (!(hi > lo)) throw CoverageError("frequency grid: Planck window does not overlap the table");
    auto span = [](double a, double b, double ppd) {
        const auto n = static_cast<std::size_t>(std::ceil(std::log10(b / a) * ppd)) + 1;
        return numerics::logspace(a, b, std::max<std::size_t>(n, 2));
    };
    std::vector<double> edges = span(lo, hi, panels_per_decade);
    // panels end on table nodes, where the optical constants have kinks
    for (const auto& sample : table.samples()) {
        const double f = c::speed_of_light / sample.wavelength;
        if (f > lo && f < hi) edges.push_back(f);
    }
    for (const auto& r : refinements) {
        const double a = std::max(lo, r.nu_lo), b = std::min(hi, r.nu_hi);
        if (b > a) {
            const auto extra = span(a, b, r.panels_per_decade);
            edges.insert(edges.end(), extra.begin(), extra.end());
        }
    }
    std::sort(edges.begin(), edges.end());
    std::vector<double> unique;
    for (double v : edges)
        if (unique.empty() || v > unique.back() * (1.0 + 1e-9)) unique.push_back(v);

    const auto& rule = numerics::gauss_legendre(gauss_order);
    std::vector<double> nodes, weights;
    for (std::size_t i = 0; i + 1 < unique.size(); ++i) {
        const double u0 = std::log(unique[i]), u1 = std::log(unique[i + 1]);
        const double mid = 0.5 * (u0 + u1), half = 0.5 * (u1 - u0);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double nu = std::exp(mid + half * rule.nodes[k]);
            nodes.push_back(nu);
            weights.push_back(rule.weights[k] * half * nu);
        }
    }
    return FrequencyGrid(std::move(nodes), std::move(weights), lo, hi, t_lo, t_hi);
}

double FrequencyGrid::relevance(double frequency) const {
    if (t_hi_ <= 0.0) return 1.0;
    auto weight = [](double x) { return x * x * x * x / std::expm1(x); };
    constexpr double peak_x = 3.920690395;  // maximiser of x^4/(e^x-1)
    const double x_min = c::planck * frequency / (c::boltzmann * t_hi_);
    const double x_max = c::planck * frequency / (c::boltzmann * std::max(t_lo_, 1e-300));
    return weight(std::clamp(peak_x, x_min, x_max)) / weight(peak_x);
}

double FrequencyGrid::uncovered_fraction(double temperature) const {
    return radiometry::planck_fraction_below(lo_, temperature) + 1.0 -
           radiometry::planck_fraction_below(hi_, temperature);
}

std::string EmissivityKey::file_stem() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "eps_%s_a%.9e_%s%s_g%s_o%s", numerics::hex64(dataset_hash).c_str(), radius,
                  corner.n == materials::Bound::Min ? "nmin" : "nmax", corner.k == materials::Bound::Min ? "kmin" : "kmax",
                  numerics::hex64(grid_hash).c_str(), numerics::hex64(options_hash).c_str());
    return buf;
}

std::uint64_t options_hash(const EmissivityOptions& o) {
    const double v[] = {o.l_tail_tolerance, o.xi_relative_tolerance, o.absolute_floor, o.power_floor, o.resonance_tolerance,
                        static_cast<double>(o.xi_initial_nodes), static_cast<double>(o.xi_max_nodes),
                        static_cast<double>(o.l_max), static_cast<double>(o.l_max_cap)};
    return numerics::fnv1a(v);
}

SpectralEmissivity::SpectralEmissivity(EmissivityKey key, const FrequencyGrid& grid,
                                       std::vector<EmissivityResult> samples)
    : key_(key), grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
        throw InvariantError("spectral emissivity: sample count differs from the frequency grid", "frequency_Hz");
    if (key_.grid_hash != grid_.hash()) throw CacheMismatchError("spectral emissivity: grid hash mismatch");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!(samples_[i].value >= 0.0))
            throw InvariantError("spectral emissivity must be non-negative", "emissivity", i + 1);
        eps_.push_back(samples_[i].value);
    }
}

double SpectralEmissivity::at(double frequency) const {
    const auto& nu = grid_.frequencies();
    if (!(frequency >= nu.front() && frequency <= nu.back())) return 0.0;
    const std::size_t i = numerics::locate(nu, frequency);
    const double t = std::log(frequency / nu[i]) / std::log(nu[i + 1] / nu[i]);
    return eps_[i] + t * (eps_[i + 1] - eps_[i]);
}

double SpectralEmissivity::emitted_power_per_length(double temperature) const {
    if (!(temperature > 0.0)) throw DomainError("emitted power: temperature must be positive");
    const double uncovered = grid_.uncovered_fraction(temperature);
    if (uncovered > kMaxUncoveredFraction)
        throw CoverageError("frequency grid leaves " + format_double(uncovered) + " of the Planck power at T = " +
                            format_double(temperature) + " K uncovered");
    const auto& nu = grid_.frequencies();
    const auto& w = grid_.weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) sum += w[i] * eps_[i] * radiometry::planck_spectral_power(nu[i], temperature);
    return 2.0 * c::pi * key_.radius * sum;
}

double SpectralEmissivity::emitted_power_per_length(double temperature, double radius) const {
    if (radius != key_.radius)
        throw CacheMismatchError("spectral emissivity computed for a=" + format_double(key_.radius) +
                                 " m cannot be used for a=" + format_double(radius) + " m");
    return emitted_power_per_length(temperature);
}

void SpectralEmissivity::save(std::ostream& out) const {
    int lmax = 0, nodes = 0;
    for (const auto& r : samples_) {
        lmax = std::max(lmax, r.l_max);
        nodes = std::max(nodes, r.xi_nodes);
    }
    out << "# nanotherm spectral emissivity\n";
    out << "# radius_m=" << format_double(key_.radius) << '\n';
    out << "# corner=" << key_.corner.label() << '\n';
    out << "# dataset_hash=" << numerics::hex64(key_.dataset_hash) << '\n';
    out << "# grid_hash=" << numerics::hex64(key_.grid_hash) << '\n';
    out << "# options_hash=" << numerics::hex64(key_.options_hash) << '\n';
    out << "# l_max=" << lmax << '\n';
    out << "# xi_nodes_max=" << nodes << '\n';
    out << "# grid_lower_Hz=" << format_double(grid_.lower()) << '\n';
    out << "# grid_upper_Hz=" << format_double(grid_.upper()) << '\n';
    out << "# grid_t_lo_K=" << format_double(grid_.t_lo()) << '\n';
    out << "# grid_t_hi_K=" << format_double(grid_.t_hi()) << '\n';
    out << "frequency_Hz,weight_Hz,emissivity,l_max,xi_nodes,xi_error\n";
    const auto& nu = grid_.frequencies();
    const auto& w = grid_.weights();
    for (std::size_t i = 0; i < nu.size(); ++i) {
        const auto& r = samples_[i];
        out << format_double(nu[i]) << ',' << format_double(w[i]) << ',' << format_double(r.value) << ','
            << r.l_max << ',' << r.xi_nodes << ',' << format_double(r.xi_error) << '\n';
    }
}

SpectralEmissivity SpectralEmissivity::load(std::istream& in, const EmissivityKey& expected) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::map<std::string, std::string> meta;
    {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.rfind("# ", 0) != 0) continue;
            const auto eq = line.find('=');
            if (eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
        }
    }
    auto field = [&](const std::string& k) {
        auto it = meta.find(k);
        if (it == meta.end()) throw CacheMismatchError("emissivity cache lacks '" + k + "' metadata");
        return it->second;
    };
    const double radius = tabular::parse_number(field("radius_m"), 0, "radius_m");
    if (radius != expected.radius)
        throw CacheMismatchError("emissivity cache is for a=" + format_double(radius) + " m, requested a=" +
                                 format_double(expected.radius) + " m");
    if (materials::CornerSelector::parse(field("corner")) != expected.corner)
        throw CacheMismatchError("emissivity cache corner mismatch");
    if (field("dataset_hash") != numerics::hex64(expected.dataset_hash))
        throw CacheMismatchError("emissivity cache dataset hash mismatch");
    if (field("grid_hash") != numerics::hex64(expected.grid_hash))
        throw CacheMismatchError("emissivity cache frequency-grid hash mismatch");
    if (field("options_hash") != numerics::hex64(expected.options_hash))
        throw CacheMismatchError("emissivity cache quadrature-options mismatch");

    std::istringstream body(text);
    const auto doc = tabular::read_csv(body);
    tabular::require_header(doc.header,
                            {"frequency_Hz", "weight_Hz", "emissivity", "l_max", "xi_nodes", "xi_error"});
    std::vector<double> nu, w;
    std::vector<EmissivityResult> samples;
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& r = doc.rows[i];
        if (r.size() != 6) throw ParseError("emissivity cache row " + std::to_string(i + 1) + ": expected 6 fields", i + 1);
        nu.push_back(tabular::parse_number(r[0], i + 1, "frequency_Hz"));
        w.push_back(tabular::parse_number(r[1], i + 1, "weight_Hz"));
        EmissivityResult s;
        s.value = tabular::parse_number(r[2], i + 1, "emissivity");
        s.l_max = static_cast<int>(tabular::parse_number(r[3], i + 1, "l_max"));
        s.xi_nodes = static_cast<int>(tabular::parse_number(r[4], i + 1, "xi_nodes"));
        s.xi_error = tabular::parse_number(r[5], i + 1, "xi_error");
        samples.push_back(s);
    }
    FrequencyGrid grid(std::move(nu), std::move(w), tabular::parse_number(field("grid_lower_Hz"), 0, "grid_lower_Hz"),
                       tabular::parse_number(field("grid_upper_Hz"), 0, "grid_upper_Hz"),
                       tabular::parse_number(field("grid_t_lo_K"), 0, "grid_t_lo_K"),
                       tabular::parse_number(field("grid_t_hi_K"), 0, "grid_t_hi_K"));
    if (grid.hash() != expected.grid_hash)
        throw CacheMismatchError("emissivity cache frequencies do not reproduce the grid hash");
    return SpectralEmissivity(expected, grid, std::move(samples));
}

SpectralEmissivity compute_spectral_emissivity(double radius, const materials::RefractiveIndexTable& table,
                                               materials::CornerSelector corner, const FrequencyGrid& grid,
                                               const EmissivityOptions& options, int threads) {
    const auto& nu = grid.frequencies();
    const std::size_t n = nu.size();
    std::vector<EmissivityResult> samples(n);
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < n; i += stride) {
            EmissivityOptions local = options;
            local.absolute_floor = std::max(options.absolute_floor, options.power_floor / grid.relevance(nu[i]));
            samples[i] = cylinder_spectral_emissivity(nu[i], radius, table, corner, local);
        }
    };
    const std::size_t workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    work(w, workers);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    EmissivityKey key{table.content_hash(), radius, corner, grid.hash(), options_hash(options)};
    return SpectralEmissivity(key, grid, std::move(samples));
}

EmissivityStore::EmissivityStore(std::optional<std::filesystem::path> directory, bool read, bool write)
    : dir_(std::move(directory)), read_(read), write_(write) {
    if (dir_ && write_) std::filesystem::create_directories(*dir_);
}

std::shared_ptr<const SpectralEmissivity> EmissivityStore::get(double radius,
                                                               const materials::RefractiveIndexTable& table,
                                                               materials::CornerSelector corner,
                                                               const FrequencyGrid& grid,
                                                               const EmissivityOptions& options, int threads) {
    const EmissivityKey key{table.content_hash(), radius, corner, grid.hash(), options_hash(options)};
    const std::string stem = key.file_stem();
    {
        std::lock_guard lock(mutex_);
        if (auto it = memory_.find(stem); it != memory_.end()) return it->second;
    }
    std::shared_ptr<const SpectralEmissivity> result;
    std::optional<std::filesystem::path> path;
    if (dir_) path = *dir_ / (stem + ".csv");
    if (path && read_ && std::filesystem::exists(*path)) {
        std::ifstream in(*path);
        result = std::make_shared<const SpectralEmissivity>(SpectralEmissivity::load(in, key));
        std::lock_guard lock(mutex_);
        ++loaded_;
    } else {
        result = std::make_shared<const SpectralEmissivity>(
            compute_spectral_emissivity(radius, table, corner, grid, options, threads));
        if (path && write_) {
            const auto tmp = std::filesystem::path(path->string() + ".tmp");
            {
                std::ofstream out(tmp);
                result->save(out);
            }
            std::filesystem::rename(tmp, *path);
        }
        std::lock_guard lock(mutex_);
        ++computed_;
    }
    std::lock_guard lock(mutex_);
    if (path) files_.push_back(*path);
    return memory_.emplace(stem, result).first->second;
}

std::vector<std::filesystem::path> EmissivityStore::files_used() const {
    auto copy = files_;
    std::sort(copy.begin(), copy.end());
    copy.erase(std::unique(copy.begin(), copy.end()), copy.end());
    return copy;
}

double cylinder_radiated_power_per_length(double temperature, double ambient, double radius,
                                          const materials::RefractiveIndexTable& table,
                                          materials::CornerSelector corner, const FrequencyGrid& grid,
                                          const EmissivityOptions& options, int threads) {
    if (!(temperature > 0.0 && ambient > 0.0)) throw DomainError("radiated power: temperatures must be positive");
    if (temperature == ambient) return 0.0;
    const auto eps = compute_spectral_emissivity(radius, table, corner, grid, options, threads);
    return eps.emitted_power_per_length(temperature) - eps.emitted_power_per_length(ambient);
}

double pollutant_deviation(double radius, const materials::RefractiveIndexTable& table,
                           materials::CornerSelector corner, double k_eff, double temperature,
                           const FrequencyGrid& grid, const EmissivityOptions& options, int threads) {
    if (!(k_eff >= 0.0)) throw DomainError("pollutant_deviation: k_eff must be non-negative");
    if (k_eff == 0.0) return 0.0;
    const auto clean = compute_spectral_emissivity(radius, table, corner, grid, options, threads);
    const auto dirty =
        compute_spectral_emissivity(radius, table.with_extinction_offset(k_eff), corner, grid, options, threads);
    const double h0 = clean.emitted_power_per_length(temperature);
    return (dirty.emitted_power_per_length(temperature) - h0) / h0;
}

RadiatedPowerCurve radiated_power_curve(const SpectralEmissivity& emissivity, const std::vector<double>& temperatures) {
    RadiatedPowerCurve curve;
    curve.radius = emissivity.radius();
    curve.corner = emissivity.key().corner;
    curve.temperatures = temperatures;
    for (double T : temperatures) curve.power.push_back(emissivity.emitted_power_per_length(T));
    return curve;
}

}  // namespace nanotherm::fed
