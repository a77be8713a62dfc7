#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "nanotherm/errors.hpp"
#include "nanotherm/version.hpp"

namespace {

using namespace nanotherm;
using namespace nanotherm::cli;

/// Subcommand flag that writes its value into a settings key when given.
struct Mapped {
    std::string key;
    std::optional<std::string> value;
};

class Flags {
public:
    void add(CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        entries_.push_back(std::make_unique<Mapped>(Mapped{key, std::nullopt}));
        sub->add_option(flag, entries_.back()->value, help + " (" + key + ")");
    }
    void apply(Settings& settings) const {
        for (const auto& e : entries_)
            if (e->value) settings.set(e->key, *e->value);
    }

private:
    std::vector<std::unique_ptr<Mapped>> entries_;
};

int run_command(const std::string& name, const Settings& settings, int threads, bool no_cache) {
    using Command = int (*)(Run&);
    const std::vector<std::pair<std::string, Command>> table{
        {"emissivity", cmd_emissivity}, {"power-curve", cmd_power_curve}, {"simulate", cmd_simulate},
        {"sweep", cmd_sweep},           {"fit-eta", cmd_fit_eta},         {"stability", cmd_stability},
        {"profile", cmd_profile}};
    for (const auto& [n, cmd] : table) {
        if (n != name) continue;
        Run run(name, settings, threads, CacheSettings{default_cache_directory(), !no_cache});
        int code = kNumericFailure;
        try {
            code = cmd(run);
        } catch (...) {
            run.finish(code);
            throw;
        }
        run.finish(code);
        return code;
    }
    throw ConfigError("unknown subcommand '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nanotherm: radiative and conductive thermalisation of tapered optical nanofibers"};
    app.set_version_flag("--version", std::string(kVersion));

    std::string config_file;
    std::vector<std::string> overrides;
    std::string output_dir;
    int threads = 1;
    bool no_cache = false, emit_default = false;
    app.add_option("-c,--config", config_file, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override a configuration key: section.key=value (repeatable)");
    app.add_option("-o,--output", output_dir, "output directory (output.dir)");
    app.add_option("-j,--threads", threads, "worker threads; 1 gives bit-reproducible output")->check(CLI::PositiveNumber);
    app.add_flag("--no-cache", no_cache, "recompute emissivities instead of reading or writing the disk cache");
    app.add_flag("--emit-default-config", emit_default, "print the fully commented default configuration and exit");
    app.require_subcommand(0, 1);

    Flags flags;
    auto* emissivity = app.add_subcommand("emissivity", "spectral emissivity band of one cylinder radius");
    flags.add(emissivity, "--radius", "emissivity.radius", "cylinder radius [m]");
    flags.add(emissivity, "--overlay", "emissivity.overlay_temperatures", "blackbody overlay temperatures [K]");

    auto* power = app.add_subcommand("power-curve", "radiated power per length against temperature, both models");
    flags.add(power, "--radius", "power_curve.radius", "cylinder radius [m]");

    auto* simulate = app.add_subcommand("simulate", "one heating/cooling cycle");
    auto* sweep = app.add_subcommand("sweep", "grid of runs over heating power or gas pressure");
    flags.add(sweep, "--parameter", "sweep.parameter", "power or pressure");
    flags.add(sweep, "--values", "sweep.values", "comma-separated grid");
    flags.add(sweep, "--sets", "sweep.sets", "nominal or band");
    flags.add(sweep, "--mode", "sweep.mode", "transient or equilibrium");
    for (auto* sub : {simulate, sweep}) {
        flags.add(sub, "--radiator", "radiation.radiator", "fed, planck or none");
        flags.add(sub, "--corner", "radiation.corner", "refractive-index corner, e.g. n_min,k_max");
        flags.add(sub, "--eta", "heating.eta_abs", "absorbed fraction");
        flags.add(sub, "--power", "heating.power", "heating power [W]");
        flags.add(sub, "--pressure", "environment.pressure_mbar", "gas pressure [mbar]");
        flags.add(sub, "--t-end", "solver.t_end", "end time [s]");
    }

    auto* fit = app.add_subcommand("fit-eta", "least-squares absorbed fraction from (P_heat, dLopt_max) data");
    flags.add(fit, "--data", "fit.data", "CSV with header P_heat_W,dLopt_max_m");
    flags.add(fit, "--forward", "fit.forward", "equilibrium or transient");
    flags.add(fit, "--sets", "fit.sets", "nominal or band");
    flags.add(fit, "--synthetic-eta", "fit.synthetic_eta", "generate data from the nominal model at this eta");
    flags.add(fit, "--radiator", "radiation.radiator", "fed, planck or none");

    auto* stability = app.add_subcommand("stability", "viscous relaxation and breaking-temperature estimates");
    flags.add(stability, "--t-lo", "stability.t_lo", "table start [K]");
    flags.add(stability, "--t-hi", "stability.t_hi", "table end [K]");
    flags.add(stability, "--length", "stability.length", "filament length [m]");

    app.add_subcommand("profile", "radius profile of the configured taper");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigFailure;
    }

    try {
        if (emit_default) {
            std::cout << Settings::default_config_text();
            return kSuccess;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return kConfigFailure;
        }
        Settings settings;
        if (!config_file.empty()) settings.load_file(config_file);
        for (const auto& o : overrides) settings.apply_override(o);
        flags.apply(settings);
        if (!output_dir.empty()) settings.set("output.dir", output_dir);
        return run_command(app.get_subcommands().front()->get_name(), settings, threads, no_cache);
    } catch (const ConfigError& e) {
        std::cerr << "nanotherm: configuration error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const ParseError& e) {
        std::cerr << "nanotherm: input error (row " << e.row() << "): " << e.what() << "\n";
        return kConfigFailure;
    } catch (const InvariantError& e) {
        std::cerr << "nanotherm: invalid input (" << e.field() << "): " << e.what() << "\n";
        return kConfigFailure;
    } catch (const Error& e) {
        std::cerr << "nanotherm: numeric failure: " << e.what() << "\n";
        return kNumericFailure;
    } catch (const std::exception& e) {
        std::cerr << "nanotherm: " << e.what() << "\n";
        return kNumericFailure;
    }
}
