#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nanotherm/errors.hpp"
#include "nanotherm/numerics.hpp"

namespace nanotherm::cli {

namespace {

struct Entry {
    const char* section;
    const char* key;
    const char* value;
    const char* help;
};

// clang-format off
constexpr Entry kEntries[] = {
    {"materials", "nk_table", "", "CSV of wavelength_m,n_min,n_max,k_min,k_max[,source]; empty selects the shipped silica dataset"},
    {"materials", "k_eff_offset", "0", "extinction coefficient added to k_min and k_max (surface pollutant bound)"},

    {"geometry", "theta1", "5e-3", "taper angle of the first linear section [rad]"},
    {"geometry", "theta2", "2e-3", "taper angle of the second linear section [rad]"},
    {"geometry", "theta3", "4e-3", "taper angle of the third linear section [rad]"},
    {"geometry", "r1", "40e-6", "cladding radius at the first transition [m]"},
    {"geometry", "r2", "15e-6", "cladding radius at the second transition [m]"},
    {"geometry", "waist_radius", "250e-9", "nanofiber waist radius [m]"},
    {"geometry", "waist_length", "10e-3", "homogeneous waist length [m]"},
    {"geometry", "cladding_radius", "62.5e-6", "unprocessed fiber radius [m]"},
    {"geometry", "exp_length", "2e-3", "decay length of the exponential section [m]"},
    {"geometry", "dz", "1e-4", "axial grid spacing [m]"},
    {"geometry", "margin", "10e-3", "simulated length beyond each end of the waist [m]"},
    {"geometry", "radius_scale", "1", "factor applied to the whole radius profile"},

    {"radiation", "radiator", "fed", "fed (cylinder emission) or planck (flat-interface emissivity on 2 pi a)"},
    {"radiation", "corner", "n_min,k_min", "refractive-index corner: n_min|n_max , k_min|k_max"},
    {"radiation", "t_lo", "250", "lowest tabulated temperature [K]"},
    {"radiation", "t_hi", "3000", "highest tabulated temperature [K]"},
    {"radiation", "t_step", "25", "temperature spacing of the power tables [K]"},
    {"radiation", "radii", "24", "log-spaced radii of the FED power tables"},
    {"radiation", "probes", "3", "radius-interpolation probes checked against direct computation"},
    {"radiation", "probe_tolerance", "0.01", "largest accepted relative probe error"},
    {"radiation", "band_temperature", "1500", "temperature at which the band's low- and high-emission corners are chosen [K]"},
    {"radiation", "radius_tolerance", "0.1", "relative radius uncertainty of the band's parameter sets"},

    {"heating", "eta_abs", "2e-3", "absorbed fraction of the transmitted heating power"},
    {"heating", "power", "32.7e-3", "transmitted heating power while on [W]"},
    {"heating", "t_on", "0", "switch-on time [s]"},
    {"heating", "t_off", "1", "switch-off time [s]"},
    {"heating", "model", "surface", "surface or volume absorption"},

    {"environment", "pressure_mbar", "1e-6", "background gas pressure [mbar]"},
    {"environment", "ambient", "294", "ambient temperature [K]"},

    {"solver", "t_end", "2", "end of the simulated cycle [s]"},
    {"solver", "rtol", "1e-4", "relative temperature tolerance per step"},
    {"solver", "atol", "1e-3", "absolute temperature tolerance per step [K]"},
    {"solver", "dt_initial", "1e-5", "first trial step [s]"},
    {"solver", "dt_max", "2e-2", "largest step [s]"},
    {"solver", "max_steps", "200000", "step budget"},
    {"solver", "budget_tolerance", "0.01", "accepted energy-budget residual relative to the absorbed power"},
    {"solver", "conduction", "true", "axial heat conduction on/off"},
    {"solver", "write_field", "false", "write the full T(t, z) table (large)"},

    {"emissivity", "radius", "250e-9", "cylinder radius [m]"},
    {"emissivity", "overlay_temperatures", "300,1000,2000", "blackbody overlay columns [K]"},

    {"power_curve", "radius", "250e-9", "cylinder radius [m]"},
    {"power_curve", "fit_lo", "400", "lower end of the power-law exponent fit [K]"},
    {"power_curve", "fit_hi", "1800", "upper end of the power-law exponent fit [K]"},

    {"sweep", "parameter", "power", "power (heating power, W) or pressure (mbar)"},
    {"sweep", "values", "0.01,0.02,0.03", "grid of the swept parameter"},
    {"sweep", "mode", "transient", "transient (full heating/cooling cycle per point) or equilibrium (steady state)"},
    {"sweep", "sets", "nominal", "nominal (configured corner and radius) or band (four parameter sets)"},

    {"fit", "data", "", "CSV with columns P_heat_W,dLopt_max_m"},
    {"fit", "forward", "equilibrium", "equilibrium (steady state) or transient (full heating pulse)"},
    {"fit", "sets", "nominal", "nominal or band (four parameter sets)"},
    {"fit", "eta_lo", "1e-5", "lower end of the eta search"},
    {"fit", "eta_hi", "1", "upper end of the eta search"},
    {"fit", "synthetic_eta", "0", "when positive, generate the data from the nominal model at this eta"},
    {"fit", "synthetic_powers", "0.01,0.02,0.03", "heating powers of the synthetic data [W]"},

    {"stability", "t_lo", "1400", "table start [K]"},
    {"stability", "t_hi", "2800", "table end [K]"},
    {"stability", "t_step", "50", "table spacing [K]"},
    {"stability", "stresses", "1e5,1e6,1e7", "initial stresses for tau_s columns [Pa]"},
    {"stability", "length", "5e-3", "filament length L0 for tau_v [m]"},
    {"stability", "temperature", "1800", "temperature of the residual-stress estimate [K]"},
    {"stability", "stress", "1e6", "initial stress for the reported tau_s [Pa]"},
    {"stability", "tau_v_fast", "0.5", "short end of the measurement-cycle window [s]"},
    {"stability", "tau_v_slow", "5", "long end of the measurement-cycle window [s]"},
    {"stability", "tau_s_cycle", "60", "strain relaxation considered frozen beyond this time [s]"},

    {"output", "dir", "nanotherm_out", "output directory"},
};
// clang-format on

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string t = s.substr(b, e - b + 1);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

}  // namespace

Settings::Settings() {
    for (const auto& e : kEntries) values_[std::string(e.section) + "." + e.key] = e.value;
}

void Settings::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second = trim(value);
}

void Settings::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void Settings::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path.string() + "'");
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("configuration file '" + path.string() + "' line " + std::to_string(e.line()) + ": " +
                          e.message());
    }
    for (const auto& [section, keys] : tree) {
        if (keys.empty() && !keys.data().empty())
            throw ConfigError("configuration key '" + section + "' outside a section");
        for (const auto& [key, node] : keys) set(section + "." + key, node.data());
    }
}

const std::string& Settings::text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
    return it->second;
}

double Settings::number(const std::string& key) const { return parse_double(key, text(key)); }

long Settings::integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 1e15) throw ConfigError(key + ": expected an integer");
    return static_cast<long>(v);
}

bool Settings::flag(const std::string& key) const {
    const std::string& v = text(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> Settings::numbers(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

std::uint64_t Settings::hash() const {
    std::string canonical;
    for (const auto& [k, v] : values_)
        if (k != "output.dir") canonical += k + "=" + v + "\n";
    return numerics::fnv1a(canonical);
}

std::string Settings::hash_hex() const { return numerics::hex64(hash()); }

std::string Settings::default_config_text() {
    std::ostringstream out;
    out << "# nanotherm reference configuration. Every key is shown at its default.\n"
           "# Command-line options and --set section.key=value override file values.\n";
    std::string section;
    for (const auto& e : kEntries) {
        if (section != e.section) {
            section = e.section;
            out << "\n[" << section << "]\n";
        }
        out << "# " << e.help << "\n" << e.key << " = " << e.value << "\n";
    }
    return out.str();
}

}  // namespace nanotherm::cli
