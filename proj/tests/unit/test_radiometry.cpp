#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "nanotherm/constants.hpp"
#include "nanotherm/errors.hpp"
#include "interface_oracle.hpp"
#include "nanotherm/radiometry.hpp"

using namespace nanotherm;
using namespace nanotherm::radiometry;
using materials::Bound;
using materials::CornerSelector;
using cplx = std::complex<double>;

namespace {

materials::RefractiveIndexTable constant_table(cplx nk) {
    std::vector<materials::NkSample> rows;
    for (double lam : {1e-9, 1e-6, 1.0}) rows.push_back({lam, nk.real(), nk.real(), nk.imag(), nk.imag(), ""});
    return materials::RefractiveIndexTable(rows);
}

}  // namespace

TEST_CASE("Planck closure") {
    for (double T : {300.0, 1000.0, 2000.0}) {
        CHECK(std::abs(planck_integral(T) / blackbody_power(T) - 1.0) < 1e-6);
    }
    CHECK(blackbody_power(1000.0) == doctest::Approx(5.670374419e-8 * 1e12).epsilon(1e-9));
}

TEST_CASE("Planck limits and domain") {
    CHECK(planck_spectral_power(1e13, 0.0) == 0.0);
    CHECK(planck_spectral_power(1e13, 1e-3) < 1e-300);
    CHECK_THROWS_AS(planck_spectral_power(0.0, 300.0), DomainError);
    CHECK_THROWS_AS(planck_spectral_power(1e13, -1.0), DomainError);
}

TEST_CASE("Wien peak at 1000 K by golden-section maximisation") {
    const double T = 1000.0;
    double a = 1e13, b = 2e14;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (planck_spectral_power(c, T) > planck_spectral_power(d, T)) b = d; else a = c;
    }
    CHECK(0.5 * (a + b) / T == doctest::Approx(5.879e10).epsilon(1e-4));
}

TEST_CASE("fraction below agrees with numerical partial integrals") {
    for (double x : {0.01, 0.3, 2.0, 8.0}) {
        const double T = 700.0;
        const double nu = frequency_for_reduced(x, T);
        PlanckWindow w{1e-6, x};
        const double partial = planck_integral(T, w) / blackbody_power(T);
        CHECK(planck_fraction_below(nu, T) == doctest::Approx(partial).epsilon(1e-6));
    }
}

TEST_CASE("Fresnel reflectivity") {
    for (double th : {0.0, 0.3, 1.0, 1.4}) CHECK(fresnel_reflectivity(th, {1.0, 0.0}) == doctest::Approx(0.0));
    CHECK(fresnel_reflectivity(std::numbers::pi / 2 - 1e-7, {1.5, 0.01}) > 0.9999);
    CHECK(fresnel_reflectivity(0.0, {1.5, 0.0}) == doctest::Approx(0.04).epsilon(1e-12));
    for (double th = 0.0; th < 1.57; th += 0.05) {
        for (cplx n : {cplx(0.3, 2.0), cplx(1.45, 1e-6), cplx(2.5, 0.5), cplx(0.8, 0.0)}) {
            const double r = fresnel_reflectivity(th, n);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            CHECK(r == doctest::Approx(oracle::reflectivity_snell(th, n)).epsilon(1e-9));
        }
    }
}

TEST_CASE("interface emissivity limits") {
    const auto vacuum = constant_table({1.0, 0.0});
    CHECK(interface_hemispherical_emissivity(500.0, vacuum, {}) == doctest::Approx(1.0).epsilon(1e-9));
    const auto mirror = constant_table({1e4, 1e4});
    CHECK(interface_hemispherical_emissivity(500.0, mirror, {}) < 1e-3);
}

TEST_CASE("interface emissivity against a 2D trapezoid oracle") {
    const auto silica = materials::silica_dataset();
    for (auto corner : {CornerSelector{Bound::Min, Bound::Min}, CornerSelector{Bound::Max, Bound::Max}}) {
        const double e = interface_hemispherical_emissivity(300.0, silica, corner);
        const double ref = oracle::interface_emissivity(300.0, silica, corner);
        CHECK(e == doctest::Approx(ref).epsilon(1e-3));
        CHECK(e > 0.5);
        CHECK(e < 1.0);
    }
}

TEST_CASE("larger k raises reststrahlen reflection at low temperature") {
    // Where k exceeds n the interface behaves like a metal: more extinction
    // means more reflection, so the k_max corners emit less than k_min.
    const auto silica = materials::silica_dataset();
    const cplx lo = silica.nk_at(9.1e-6, {Bound::Min, Bound::Min});
    const cplx hi = silica.nk_at(9.1e-6, {Bound::Min, Bound::Max});
    CHECK(interface_spectral_emissivity(hi) < interface_spectral_emissivity(lo));
    for (double T : {300.0, 400.0, 500.0}) {
        for (Bound n : {Bound::Min, Bound::Max}) {
            const double e_kmin = interface_hemispherical_emissivity(T, silica, {n, Bound::Min});
            const double e_kmax = interface_hemispherical_emissivity(T, silica, {n, Bound::Max});
            CHECK(e_kmax <= e_kmin);
            CHECK(e_kmin - e_kmax < 0.05);
        }
    }
}

TEST_CASE("coverage error when the window leaves the table") {
    const auto silica = materials::silica_dataset();
    CHECK_THROWS_AS(interface_hemispherical_emissivity(20.0, silica, {}), CoverageError);
    std::vector<materials::NkSample> rows{{1e-6, 1.5, 1.5, 0, 0, ""}, {1e-5, 1.5, 1.5, 0, 0, ""}};
    CHECK_THROWS_AS(interface_hemispherical_emissivity(300.0, materials::RefractiveIndexTable(rows), {}), CoverageError);
}

TEST_CASE("interface net power") {
    const auto silica = materials::silica_dataset();
    CHECK(interface_radiated_power(500.0, 500.0, 1.0, silica, {}) == 0.0);
    const double p1 = interface_radiated_power(800.0, 294.0, 1e-6, silica, {});
    const double p2 = interface_radiated_power(800.0, 294.0, 2e-6, silica, {});
    CHECK(p2 == doctest::Approx(2.0 * p1).epsilon(1e-12));
    CHECK(p1 > 0.0);
    const auto black = constant_table({1.0, 0.0});
    // T0 -> 0 limit via a negligible ambient
    CHECK(interface_radiated_power(1000.0, 1e-3, 1.0, black, {}, {{1e-3, 50.0}, 1e-9, 1.0}) ==
          doctest::Approx(blackbody_power(1000.0)).epsilon(1e-6));
}

TEST_CASE("emissivity band export") {
    const auto silica = materials::silica_dataset();
    const auto band = interface_emissivity_band({300.0, 1000.0}, silica);
    CHECK(band.eps_min[0] <= band.eps_max[0]);
    std::ostringstream out;
    write_emissivity_band(out, band);
    CHECK(out.str().rfind("T_K,eps_min,eps_max\n", 0) == 0);
}

TEST_CASE("precomputed spectrum agrees with the adaptive integral") {
    const auto silica = materials::silica_dataset();
    for (const auto& corner : CornerSelector::all()) {
        const InterfaceEmissivitySpectrum fast(silica, corner);
        for (double T : {294.0, 600.0, 1500.0, 3000.0}) {
            CHECK(fast.hemispherical(T) ==
                  doctest::Approx(interface_hemispherical_emissivity(T, silica, corner)).epsilon(1e-6));
        }
    }
}
