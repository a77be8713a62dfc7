#include <benchmark/benchmark.h>

#include "nanotherm/constants.hpp"
#include "nanotherm/cylinder_fed.hpp"
#include "nanotherm/fiber_optics.hpp"
#include "nanotherm/radiometry.hpp"
#include "nanotherm/specfun.hpp"
#include "nanotherm/thermal_solver.hpp"

using namespace nanotherm;

namespace {

const materials::RefractiveIndexTable& silica() {
    static const auto t = materials::silica_dataset();
    return t;
}

const materials::SilicaThermalProperties& props() {
    static const auto p = materials::SilicaThermalProperties::load_default();
    return p;
}

void BM_BesselSet(benchmark::State& state) {
    const specfun::cplx x(7.5, 0.8);
    const int l = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(specfun::bessel_set(l, x));
}
BENCHMARK(BM_BesselSet)->Arg(0)->Arg(10)->Arg(50);

void BM_TMatrix(benchmark::State& state) {
    const double nu = constants::speed_of_light / 10e-6;
    const fed::cplx eps = silica().dielectric_at(10e-6, {});
    for (auto _ : state) benchmark::DoNotOptimize(fed::t_matrix(3, 0.4, nu, 250e-9, eps));
}
BENCHMARK(BM_TMatrix);

void BM_CylinderEmissivity(benchmark::State& state) {
    const double lambda = static_cast<double>(state.range(0)) * 1e-6;
    const double nu = constants::speed_of_light / lambda;
    const fed::cplx eps = silica().dielectric_at(lambda, {});
    for (auto _ : state) benchmark::DoNotOptimize(fed::cylinder_spectral_emissivity(nu, 250e-9, eps));
}
BENCHMARK(BM_CylinderEmissivity)->Arg(3)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_InterfaceEmissivity(benchmark::State& state) {
    const radiometry::InterfaceEmissivitySpectrum spectrum(silica(), {});
    double t = 300.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(spectrum.hemispherical(t));
        t = t > 2900.0 ? 300.0 : t + 1.0;
    }
}
BENCHMARK(BM_InterfaceEmissivity);

void BM_He11(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(fiber::solve_he11(250e-9));
}
BENCHMARK(BM_He11)->Unit(benchmark::kMicrosecond);

struct PlanckRig {
    fiber::RadiusProfile profile = fiber::build_radius_profile(fiber::TaperParameters::tof1(), {});
    thermal::RadiationModel model =
        thermal::RadiationModel::planck(profile.radius(), silica(), {}, thermal::kAmbient, {});
    thermal::SimulationConfig config() const {
        thermal::SimulationConfig c;
        c.profile = profile;
        c.radiator = thermal::Radiator::PlanckInterface;
        c.eta_abs = 2e-2;
        c.schedule = thermal::HeatingSchedule::single(0.0, 1.0, 32.7e-3);
        c.steps.t_end = 2.0;
        return c;
    }
};

void BM_ThermalCycle(benchmark::State& state) {
    const PlanckRig rig;
    const thermal::ThermalSystem system(rig.config(), props(), {}, rig.model);
    for (auto _ : state) benchmark::DoNotOptimize(system.solve());
}
BENCHMARK(BM_ThermalCycle)->Unit(benchmark::kMillisecond);

void BM_SteadyState(benchmark::State& state) {
    const PlanckRig rig;
    const thermal::ThermalSystem system(rig.config(), props(), {}, rig.model);
    for (auto _ : state) benchmark::DoNotOptimize(system.steady_state(5e-4));
}
BENCHMARK(BM_SteadyState)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
