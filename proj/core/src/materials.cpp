#include "nanotherm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/numerics.hpp"
#include "nanotherm/tabular.hpp"

#ifndef NANOTHERM_SOURCE_DATA_DIR
#define NANOTHERM_SOURCE_DATA_DIR ""
#endif
#ifndef NANOTHERM_INSTALL_DATA_DIR
#define NANOTHERM_INSTALL_DATA_DIR ""
#endif

namespace nanotherm::materials {

namespace {

std::string row_tag(std::size_t row) { return "row " + std::to_string(row); }

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file '" + path.string() + "'");
    return in;
}

}  // namespace

std::array<CornerSelector, 4> CornerSelector::all() {
    return {CornerSelector{Bound::Min, Bound::Min}, CornerSelector{Bound::Min, Bound::Max},
            CornerSelector{Bound::Max, Bound::Min}, CornerSelector{Bound::Max, Bound::Max}};
}

std::string CornerSelector::label() const {
    return std::string(n == Bound::Min ? "n_min" : "n_max") + "," + (k == Bound::Min ? "k_min" : "k_max");
}

CornerSelector CornerSelector::parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (c != '_' && c != ',' && c != ' ' && c != '/') s += static_cast<char>(std::tolower(c));
    if (s.size() == 8 && s[0] == 'n' && s[4] == 'k') {
        const std::string a = s.substr(1, 3), b = s.substr(5, 3);
        if ((a == "min" || a == "max") && (b == "min" || b == "max"))
            return {a == "min" ? Bound::Min : Bound::Max, b == "min" ? Bound::Min : Bound::Max};
    }
    throw ConfigError("invalid corner '" + text + "', expected e.g. n_min,k_max");
}

RefractiveIndexTable::RefractiveIndexTable(std::vector<NkSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw InvariantError("refractive-index table is empty", "wavelength_m");
    std::vector<double> flat;
    flat.reserve(samples_.size() * 5);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        const std::size_t row = i + 1;
        if (!(s.wavelength > 0.0))
            throw InvariantError(row_tag(row) + ": wavelength_m must be positive", "wavelength_m", row);
        if (i > 0 && !(s.wavelength > samples_[i - 1].wavelength))
            throw ParseError(row_tag(row) + ": wavelengths not strictly increasing", row);
        if (!(s.n_min <= s.n_max))
            throw InvariantError(row_tag(row) + ": n_min > n_max", "n_min", row);
        if (!(s.k_min >= 0.0))
            throw InvariantError(row_tag(row) + ": k_min must be non-negative", "k_min", row);
        if (!(s.k_min <= s.k_max))
            throw InvariantError(row_tag(row) + ": k_min > k_max", "k_min", row);
        log_wavelength_.push_back(std::log(s.wavelength));
        flat.insert(flat.end(), {s.wavelength, s.n_min, s.n_max, s.k_min, s.k_max});
    }
    hash_ = numerics::fnv1a(flat);
}

bool RefractiveIndexTable::covers(double wavelength) const {
    const double slack = 1e-12;
    return wavelength >= wavelength_lo() * (1 - slack) && wavelength <= wavelength_hi() * (1 + slack);
}

std::complex<double> RefractiveIndexTable::nk_at(double wavelength, CornerSelector corner) const {
    if (!covers(wavelength))
        throw CoverageError("wavelength " + numerics::format_double(wavelength) +
                            " m outside refractive-index table coverage [" +
                            numerics::format_double(wavelength_lo()) + ", " +
                            numerics::format_double(wavelength_hi()) + "] m");
    auto pick = [&](const NkSample& s) {
        return std::pair{corner.n == Bound::Min ? s.n_min : s.n_max,
                         corner.k == Bound::Min ? s.k_min : s.k_max};
    };
    if (samples_.size() == 1) {
        auto [n, k] = pick(samples_[0]);
        return {n, k};
    }
    const double x = std::log(wavelength);
    const std::size_t i = numerics::locate(log_wavelength_, x);
    const double t = std::clamp((x - log_wavelength_[i]) / (log_wavelength_[i + 1] - log_wavelength_[i]), 0.0, 1.0);
    const auto [n0, k0] = pick(samples_[i]);
    const auto [n1, k1] = pick(samples_[i + 1]);
    if (t == 0.0) return {n0, k0};
    if (t == 1.0) return {n1, k1};
    const double n = n0 + t * (n1 - n0);
    const double k = (k0 > 0.0 && k1 > 0.0) ? std::exp(std::log(k0) + t * (std::log(k1) - std::log(k0)))
                                            : k0 + t * (k1 - k0);
    return {n, k};
}

std::complex<double> RefractiveIndexTable::dielectric_at(double wavelength, CornerSelector corner) const {
    const auto nk = nk_at(wavelength, corner);
    return nk * nk;
}

RefractiveIndexTable RefractiveIndexTable::with_extinction_offset(double k_eff) const {
    if (!(k_eff >= 0.0)) throw DomainError("k_eff must be non-negative");
    auto copy = samples_;
    for (auto& s : copy) {
        s.k_min += k_eff;
        s.k_max += k_eff;
    }
    return RefractiveIndexTable(std::move(copy));
}

RefractiveIndexTable load_nk_table(std::istream& in) {
    const auto doc = tabular::read_csv(in);
    tabular::require_header(doc.header, {"wavelength_m", "n_min", "n_max", "k_min", "k_max"}, {"source"});
    const bool has_source = doc.header.size() == 6;
    std::vector<NkSample> samples;
    samples.reserve(doc.rows.size());
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& r = doc.rows[i];
        const std::size_t row = i + 1;
        if (r.size() != doc.header.size())
            throw ParseError(row_tag(row) + ": expected " + std::to_string(doc.header.size()) + " fields, got " +
                                 std::to_string(r.size()),
                             row);
        NkSample s;
        s.wavelength = tabular::parse_number(r[0], row, "wavelength_m");
        s.n_min = tabular::parse_number(r[1], row, "n_min");
        s.n_max = tabular::parse_number(r[2], row, "n_max");
        s.k_min = tabular::parse_number(r[3], row, "k_min");
        s.k_max = tabular::parse_number(r[4], row, "k_max");
        if (has_source) s.source = r[5];
        samples.push_back(std::move(s));
    }
    return RefractiveIndexTable(std::move(samples));
}

RefractiveIndexTable load_nk_table(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return load_nk_table(in);
}

void write_nk_table(std::ostream& out, const RefractiveIndexTable& table) {
    const bool has_source = std::any_of(table.samples().begin(), table.samples().end(),
                                        [](const NkSample& s) { return !s.source.empty(); });
    out << "wavelength_m,n_min,n_max,k_min,k_max" << (has_source ? ",source" : "") << '\n';
    for (const auto& s : table.samples()) {
        out << numerics::format_double(s.wavelength) << ',' << numerics::format_double(s.n_min) << ','
            << numerics::format_double(s.n_max) << ',' << numerics::format_double(s.k_min) << ','
            << numerics::format_double(s.k_max);
        if (has_source) out << ',' << s.source;
        out << '\n';
    }
}

void require_full_coverage(const RefractiveIndexTable& table) {
    if (table.wavelength_lo() > kCoverageLo * (1 + 1e-9) || table.wavelength_hi() < kCoverageHi * (1 - 1e-9))
        throw CoverageError("refractive-index table must span 30 nm to 2 mm");
}

std::filesystem::path data_directory() {
    if (const char* env = std::getenv("NANOTHERM_DATA_DIR"); env && *env) return env;
    for (const char* candidate : {NANOTHERM_SOURCE_DATA_DIR, NANOTHERM_INSTALL_DATA_DIR}) {
        std::filesystem::path p(candidate);
        if (!p.empty() && std::filesystem::exists(p / "silica_nk.csv")) return p;
    }
    throw ConfigError("silica data directory not found; set NANOTHERM_DATA_DIR");
}

RefractiveIndexTable silica_dataset() {
    auto table = load_nk_table(data_directory() / "silica_nk.csv");
    require_full_coverage(table);
    return table;
}

PropertyTable::PropertyTable(std::string name, std::vector<double> temperatures, std::vector<double> values,
                             double lower_bound, double upper_bound, Extrapolation above)
    : name_(std::move(name)), t_(std::move(temperatures)), v_(std::move(values)), lo_(lower_bound),
      hi_(upper_bound), above_(above) {
    if (t_.size() != v_.size() || t_.size() < 2)
        throw InvariantError(name_ + ": property table needs at least two rows", "T_K");
    for (std::size_t i = 0; i < t_.size(); ++i) {
        const std::size_t row = i + 1;
        if (!(t_[i] > 0.0)) throw InvariantError(name_ + " " + row_tag(row) + ": T_K must be positive", "T_K", row);
        if (i > 0 && !(t_[i] > t_[i - 1]))
            throw ParseError(name_ + " " + row_tag(row) + ": temperatures not strictly increasing", row);
        if (!(v_[i] >= lo_ && v_[i] <= hi_))
            throw InvariantError(name_ + " " + row_tag(row) + ": value " + numerics::format_double(v_[i]) +
                                     " outside validated range [" + numerics::format_double(lo_) + ", " +
                                     numerics::format_double(hi_) + "]",
                                 "value", row);
    }
}

FlaggedValue PropertyTable::at(double temperature) const {
    if (!(temperature > 0.0)) throw DomainError(name_ + ": temperature must be positive");
    if (temperature < t_.front()) return {v_.front(), true};
    if (temperature > t_.back()) {
        if (above_ == Extrapolation::Hold) return {v_.back(), true};
        const std::size_t n = t_.size();
        const double s = (v_[n - 1] - v_[n - 2]) / (t_[n - 1] - t_[n - 2]);
        return {v_[n - 1] + s * (temperature - t_[n - 1]), true};
    }
    return {numerics::interp_linear(t_, v_, temperature), false};
}

double PropertyTable::slope(double temperature) const {
    const std::size_t n = t_.size();
    if (temperature < t_.front()) return 0.0;
    if (temperature > t_.back())
        return above_ == Extrapolation::Hold ? 0.0 : (v_[n - 1] - v_[n - 2]) / (t_[n - 1] - t_[n - 2]);
    const std::size_t i = numerics::locate(t_, temperature);
    return (v_[i + 1] - v_[i]) / (t_[i + 1] - t_[i]);
}

PropertyTable load_property_table(std::istream& in, const std::string& name, double lower_bound,
                                  double upper_bound, Extrapolation above) {
    const auto doc = tabular::read_csv(in);
    tabular::require_header(doc.header, {"T_K", "value"});
    std::vector<double> t, v;
    for (std::size_t i = 0; i < doc.rows.size(); ++i) {
        const auto& r = doc.rows[i];
        const std::size_t row = i + 1;
        if (r.size() != 2) throw ParseError(name + " " + row_tag(row) + ": expected 2 fields", row);
        t.push_back(tabular::parse_number(r[0], row, "T_K"));
        v.push_back(tabular::parse_number(r[1], row, "value"));
    }
    return PropertyTable(name, std::move(t), std::move(v), lower_bound, upper_bound, above);
}

PropertyTable load_property_table(const std::filesystem::path& path, const std::string& name,
                                  double lower_bound, double upper_bound, Extrapolation above) {
    auto in = open_or_throw(path);
    return load_property_table(in, name, lower_bound, upper_bound, above);
}

FlaggedValue SilicaThermalProperties::thermo_optic(double temperature) {
    if (!(temperature >= 0.0)) throw DomainError("thermo_optic: temperature below absolute zero");
    return {9.627e-6 + 7.74e-9 * (temperature - 299.0), temperature > 1570.0 || temperature < 294.0};
}

SilicaThermalProperties SilicaThermalProperties::load_default() {
    const auto dir = data_directory();
    SilicaThermalProperties p;
    p.specific_heat = load_property_table(dir / "silica_cp.csv", "specific_heat", 700.0, 1500.0, Extrapolation::Hold);
    p.conductivity = load_property_table(dir / "silica_conductivity.csv", "conductivity", 1.3, 2.1, Extrapolation::Hold);
    p.expansion = load_property_table(dir / "silica_expansion.csv", "expansion", 4e-7, 7e-7, Extrapolation::Linear);
    return p;
}

std::uint64_t SilicaThermalProperties::content_hash() const {
    std::uint64_t h = numerics::fnv1a(std::string_view("silica-thermal"));
    for (const PropertyTable* t : {&specific_heat, &conductivity, &expansion}) {
        h = numerics::fnv1a(t->temperatures(), h);
        h = numerics::fnv1a(t->values(), h);
    }
    const double scalars[] = {density, strain_optic, poisson};
    return numerics::fnv1a(scalars, h);
}

double GasProperties::cooling_coefficient(double ambient_temperature) const {
    if (!(ambient_temperature > 0.0)) throw DomainError("ambient temperature must be positive");
    if (!(degrees_of_freedom > 0.0 && molecular_mass > 0.0)) throw DomainError("gas properties must be positive");
    return std::sqrt(boltzmann * degrees_of_freedom * degrees_of_freedom /
                     (8.0 * constants::pi * molecular_mass * ambient_temperature));
}

FlaggedValue ViscosityModel::operator()(double temperature) const {
    if (!(temperature > 0.0)) throw DomainError("viscosity: temperature must be positive");
    const double eta = prefactor * std::exp(activation_energy / (constants::gas_constant * temperature));
    return {eta, temperature < valid_lo || temperature > valid_hi};
}

}  // namespace nanotherm::materials
