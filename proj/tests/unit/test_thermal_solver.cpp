#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nanotherm/errors.hpp"
#include "nanotherm/thermal_solver.hpp"

using namespace nanotherm;
using namespace nanotherm::thermal;

namespace {

const materials::SilicaThermalProperties& props() {
    static const auto p = materials::SilicaThermalProperties::load_default();
    return p;
}

const materials::RefractiveIndexTable& silica() {
    static const auto t = materials::silica_dataset();
    return t;
}

const materials::CornerSelector kMin{materials::Bound::Min, materials::Bound::Min};

const fiber::RadiusProfile& tof1() {
    static const auto p = fiber::build_radius_profile(fiber::TaperParameters{}, {});
    return p;
}

const RadiationModel& planck_tof1() {
    static const auto m = RadiationModel::planck(tof1().radius(), silica(), kMin, kAmbient, {});
    return m;
}

SimulationConfig base_config() {
    SimulationConfig c{tof1()};
    c.radiator = Radiator::PlanckInterface;
    c.eta_abs = 2e-2;
    c.schedule = HeatingSchedule::single(0.0, 0.3, 32.7e-3);
    c.steps.t_end = 0.6;
    return c;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::vector<double> bump(const fiber::RadiusProfile& p, double height, double width) {
    std::vector<double> t(p.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = kAmbient + height * std::exp(-std::pow(p.z()[i] / width, 2));
    return t;
}

}  // namespace

TEST_CASE("ambient state with heating off is a fixed point") {
    auto cfg = base_config();
    cfg.pressure = 1e-3;
    ThermalSystem sys(cfg, props(), {}, planck_tof1());
    const auto d = sys.rhs(std::vector<double>(tof1().size(), kAmbient), 0.0);
    for (double x : d) CHECK(x == 0.0);
    const auto terms = sys.totals(std::vector<double>(tof1().size(), kAmbient), 0.0);
    CHECK(terms.radiated == 0.0);
    CHECK(terms.gas == 0.0);
}

TEST_CASE("conduction-only bump decays and conserves thermal energy") {
    SimulationConfig cfg{tof1()};
    cfg.radiator = Radiator::None;
    cfg.eta_abs = 0.0;
    cfg.schedule = HeatingSchedule{};
    cfg.initial_temperature = bump(tof1(), 600.0, 2e-3);
    cfg.steps.t_end = 0.5;
    const auto none = RadiationModel::none(tof1().size(), kAmbient);
    ThermalSystem sys(cfg, props(), {}, none);
    const auto f = sys.solve();
    const double e0 = sys.total_enthalpy(f.temperature.front());
    const double e1 = sys.total_enthalpy(f.temperature.back());
    CHECK(relative(e1, e0) < 1e-6);
    const auto peak = [](const std::vector<double>& t) { return *std::max_element(t.begin(), t.end()); };
    CHECK(peak(f.temperature.back()) < peak(f.temperature.front()) - 50.0);
    for (std::size_t k = 1; k < f.temperature.size(); ++k) CHECK(peak(f.temperature[k]) <= peak(f.temperature[k - 1]) + 1e-9);
}

TEST_CASE("gas term cools above ambient and vanishes in vacuum") {
    auto cfg = base_config();
    cfg.conduction = false;
    const auto none = RadiationModel::none(tof1().size(), kAmbient);
    const std::vector<double> hot(tof1().size(), 500.0);
    cfg.pressure = 1e-2;
    for (double d : ThermalSystem(cfg, props(), {}, none).rhs(hot, 0.0)) CHECK(d < 0.0);
    cfg.pressure = 0.0;
    for (double d : ThermalSystem(cfg, props(), {}, none).rhs(hot, 0.0)) CHECK(d == 0.0);
    cfg.pressure = 1e-2;
    const std::vector<double> cold(tof1().size(), 250.0);
    for (double d : ThermalSystem(cfg, props(), {}, none).rhs(cold, 0.0)) CHECK(d > 0.0);
}

TEST_CASE("symmetric profile and source give a symmetric field") {
    const auto f = ThermalSystem(base_config(), props(), {}, planck_tof1()).solve();
    const std::size_t n = tof1().size();
    for (const auto& row : f.temperature)
        for (std::size_t i = 0; i < n / 2; ++i) CHECK(std::abs(row[i] - row[n - 1 - i]) <= 1e-9 * row[i]);
}

TEST_CASE("field starts at ambient, never drops below it and respects the energy budget") {
    auto cfg = base_config();
    cfg.pressure = 1e-4;
    const auto f = ThermalSystem(cfg, props(), {}, planck_tof1()).solve();
    for (double t : f.temperature.front()) CHECK(t == kAmbient);
    for (const auto& row : f.temperature)
        for (double t : row) CHECK(t >= kAmbient - 1e-9);
    CHECK(f.max_budget_residual() < 1e-2);
    CHECK(f.times.back() == doctest::Approx(cfg.steps.t_end));
    CHECK(std::find(f.times.begin(), f.times.end(), 0.3) != f.times.end());
    CHECK(f.max_temperature > 400.0);
    CHECK_FALSE(f.gas_beyond_validity);
}

TEST_CASE("energy budget closes under independent post-hoc integration") {
    auto cfg = base_config();
    cfg.pressure = 1e-2;
    ThermalSystem sys(cfg, props(), {}, planck_tof1());
    const auto f = sys.solve();
    // stored heat against the trapezoid integral of net power recomputed from the stored states
    double integral = 0.0;
    for (std::size_t k = 1; k < f.times.size(); ++k) {
        const double t0 = f.times[k - 1], t1 = f.times[k];
        const double p = cfg.schedule.power(0.5 * (t0 + t1));
        const auto a = sys.totals(f.temperature[k - 1], p), b = sys.totals(f.temperature[k], p);
        integral += 0.5 * (t1 - t0) * ((a.absorbed - a.radiated - a.gas) + (b.absorbed - b.radiated - b.gas));
    }
    const double stored = sys.total_enthalpy(f.temperature.back()) - sys.total_enthalpy(f.temperature.front());
    const double absorbed = cfg.eta_abs * 32.7e-3 * 0.3;
    CHECK(std::abs(stored - integral) < 1e-2 * absorbed);
}

TEST_CASE("steady state under constant heating balances absorbed power") {
    auto cfg = base_config();
    cfg.pressure = 1e-2;
    cfg.schedule = HeatingSchedule::single(0.0, 10.0, 32.7e-3);
    cfg.steps.t_end = 3.0;
    ThermalSystem sys(cfg, props(), {}, planck_tof1());
    const auto f = sys.solve();
    const auto terms = sys.totals(f.temperature.back(), 32.7e-3);
    CHECK(terms.absorbed == doctest::Approx(cfg.eta_abs * 32.7e-3).epsilon(1e-9));
    CHECK(std::abs(terms.absorbed - terms.radiated - terms.gas) < 1e-2 * terms.absorbed);
}

TEST_CASE("maximum principle without heating or gas") {
    auto cfg = base_config();
    cfg.eta_abs = 0.0;
    cfg.initial_temperature = bump(tof1(), 1200.0, 1e-3);
    cfg.steps.t_end = 0.2;
    const auto f = ThermalSystem(cfg, props(), {}, planck_tof1()).solve();
    double last = 1e300;
    for (const auto& row : f.temperature) {
        const double m = *std::max_element(row.begin(), row.end());
        CHECK(m <= last + 1e-9);
        last = m;
        CHECK(*std::min_element(row.begin(), row.end()) >= kAmbient - 1e-9);
    }
}

TEST_CASE("heating and cooling profiles differ at equal path-length change") {
    auto cfg = base_config();
    cfg.eta_abs = 5e-3;
    const auto f = ThermalSystem(cfg, props(), {}, planck_tof1()).solve();
    const fiber::PathLengthModel pl(tof1(), props(), kAmbient);
    std::vector<double> dl;
    for (const auto& row : f.temperature) dl.push_back(pl.delta_l_opt(row));
    const double target = 0.5 * *std::max_element(dl.begin(), dl.end());
    auto profile_at = [&](bool heating) {
        for (std::size_t k = 1; k < dl.size(); ++k) {
            const bool up = dl[k - 1] < target && dl[k] >= target;
            const bool down = dl[k - 1] > target && dl[k] <= target;
            if ((heating && up) || (!heating && down)) {
                const double w = (target - dl[k - 1]) / (dl[k] - dl[k - 1]);
                std::vector<double> row(tof1().size());
                for (std::size_t i = 0; i < row.size(); ++i)
                    row[i] = (1 - w) * f.temperature[k - 1][i] + w * f.temperature[k][i];
                return row;
            }
        }
        FAIL("crossing not found");
        return std::vector<double>{};
    };
    const auto h = profile_at(true), c = profile_at(false);
    double diff = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) diff = std::max(diff, std::abs(h[i] - c[i]));
    CHECK(diff > 5.0);
    // cooling leaves the tapers warmer, heating concentrates it at the waist
    const std::size_t mid = tof1().center_index();
    CHECK(h[mid] > c[mid]);
}

TEST_CASE("grid refinement changes the peak path-length change by less than 0.5 %") {
    auto run = [&](double dz, double rtol) {
        const auto prof = fiber::build_radius_profile(fiber::TaperParameters{}, {dz, 10e-3});
        const auto model = RadiationModel::planck(prof.radius(), silica(), kMin, kAmbient, {});
        auto cfg = base_config();
        cfg.profile = prof;
        cfg.steps.rtol = rtol;
        const auto f = ThermalSystem(cfg, props(), {}, model).solve();
        const fiber::PathLengthModel pl(prof, props(), kAmbient);
        double best = 0.0;
        for (const auto& row : f.temperature) best = std::max(best, pl.delta_l_opt(row));
        return best;
    };
    const double coarse = run(1e-4, 1e-4), fine = run(5e-5, 1e-5);
    CHECK(relative(coarse, fine) < 5e-3);
}

TEST_CASE("solve is deterministic") {
    const auto a = ThermalSystem(base_config(), props(), {}, planck_tof1()).solve();
    const auto b = ThermalSystem(base_config(), props(), {}, planck_tof1()).solve();
    REQUIRE(a.times == b.times);
    CHECK(a.temperature == b.temperature);
    std::ostringstream sa, sb;
    a.write_csv(sa);
    b.write_csv(sb);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("time_s,z_m,T_K\n", 0) == 0);
}

TEST_CASE("equilibrium temperature") {
    const std::vector<double> r{250e-9};
    const auto planck = RadiationModel::planck(r, silica(), kMin, kAmbient, {});
    fed::EmissivityStore store;
    const auto fedm = RadiationModel::fed(r, 250e-9, silica(), kMin, kAmbient, {}, store);

    CHECK(equilibrium_temperature(0.0, planck) == kAmbient);
    double last = kAmbient;
    for (double q : {1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3}) {
        const double t = equilibrium_temperature(q, fedm);
        CHECK(t > last);
        CHECK(std::abs(fedm.net(0, t).first - q) < 1e-3 * fedm.net(0, t).second);
        CHECK(t > equilibrium_temperature(q, planck));
        last = t;
    }
    CHECK_THROWS_AS(equilibrium_temperature(1e3, fedm), CoverageError);
    CHECK_THROWS_AS(equilibrium_temperature(-1.0, fedm), DomainError);
}

TEST_CASE("radiated-power tables: cubic in temperature, log-log across radii") {
    fed::EmissivityStore store;
    const std::vector<double> nodes{250e-9, 300e-9, 420e-9};
    PowerTableGrid grid;
    grid.radii = 3;
    const auto model = RadiationModel::fed(nodes, 250e-9, silica(), kMin, kAmbient, grid, store);
    CHECK(model.table_radii().size() == 3);
    REQUIRE_FALSE(model.probes().empty());
    for (const auto& p : model.probes()) CHECK(p.max_relative_error < 1e-2);

    // table radii are exact nodes, so only the temperature interpolation remains
    const auto fgrid = fed::FrequencyGrid::planck_union(grid.t_lo, grid.t_hi, silica());
    const auto eps = store.get(420e-9, silica(), kMin, fgrid);
    double worst = 0.0;
    for (double t = grid.t_lo + 12.5; t < grid.t_hi; t += 25.0) {
        const double direct = eps->emitted_power_per_length(t);
        worst = std::max(worst, relative(model.emitted(2, t), direct));
    }
    CHECK(worst < 1e-3);
    CHECK_THROWS_AS(model.net(0, 3100.0), CoverageError);
    CHECK(model.net(0, kAmbient).first == 0.0);
}

TEST_CASE("temperatures beyond the table are reported with the node") {
    auto cfg = base_config();
    cfg.eta_abs = 1.0;
    cfg.schedule = HeatingSchedule::single(0.0, 1.0, 5.0);
    cfg.steps.t_end = 1.0;
    try {
        ThermalSystem(cfg, props(), {}, planck_tof1()).solve();
        FAIL("expected a coverage error");
    } catch (const CoverageError& e) {
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
}

TEST_CASE("configuration validation") {
    auto bad = [](auto mutate) {
        auto c = base_config();
        mutate(c);
        CHECK_THROWS_AS(c.validate(), ConfigError);
    };
    bad([](SimulationConfig& c) { c.eta_abs = 1.5; });
    bad([](SimulationConfig& c) { c.eta_abs = -0.1; });
    bad([](SimulationConfig& c) { c.pressure = -1.0; });
    bad([](SimulationConfig& c) { c.steps.t_end = 0.0; });
    bad([](SimulationConfig& c) { c.initial_temperature = {300.0}; });
    CHECK_NOTHROW(base_config().validate());
    CHECK_THROWS_AS(HeatingSchedule::single(1.0, 0.5, 1.0), ConfigError);
    CHECK_THROWS_AS(HeatingSchedule::single(0.0, 1.0, -1.0), ConfigError);
    CHECK(parse_radiator("FED") == Radiator::Fed);
    CHECK(parse_radiator("planck") == Radiator::PlanckInterface);
    CHECK_THROWS_AS(parse_radiator("stefan"), ConfigError);
    CHECK_THROWS_AS(ThermalSystem(base_config(), props(), {}, RadiationModel::none(3, kAmbient)), ConfigError);
}

TEST_CASE("heating schedule sums overlapping pulses") {
    const HeatingSchedule s({{0.0, 1.0, 1.0}, {0.5, 2.0, 2.0}});
    CHECK(s.power(0.25) == 1.0);
    CHECK(s.power(0.75) == 3.0);
    CHECK(s.power(1.0) == 2.0);
    CHECK(s.power(2.0) == 0.0);
    CHECK(s.peak() == 3.0);
    CHECK(s.breakpoints() == std::vector<double>{0.0, 0.5, 1.0, 2.0});
}

TEST_CASE("steady state matches the long-time transient and closes the balance") {
    auto cfg = base_config();
    cfg.pressure = 1e-2;
    cfg.schedule = HeatingSchedule::single(0.0, 10.0, 32.7e-3);
    cfg.steps.t_end = 4.0;
    cfg.steps.rtol = 1e-6;
    ThermalSystem sys(cfg, props(), {}, planck_tof1());
    const double absorbed = cfg.eta_abs * 32.7e-3;
    const auto steady = sys.steady_state(absorbed);
    const auto terms = sys.totals(steady, 32.7e-3);
    CHECK(std::abs(terms.absorbed - terms.radiated - terms.gas) < 1e-8 * absorbed);
    const auto f = sys.solve();
    for (std::size_t i = 0; i < steady.size(); ++i) CHECK(std::abs(f.temperature.back()[i] - steady[i]) < 0.05);
    CHECK(sys.steady_state(0.0) == std::vector<double>(tof1().size(), kAmbient));
    CHECK_THROWS_AS(sys.steady_state(10.0), CoverageError);
}
