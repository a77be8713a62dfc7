#pragma once

// Reference values of J_l and Y_l from their ascending series, summed in
// 50-digit arithmetic. Independent of the production recurrences.

#include <complex>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

namespace oracle {

using real50 = boost::multiprecision::cpp_bin_float_50;
using cplx50 = boost::multiprecision::cpp_complex_50;

struct SeriesValues {
    std::complex<double> j, dj, h, dh;
};

inline cplx50 series_j(int l, const cplx50& z) {
    const cplx50 half = z / 2;
    const cplx50 q = -half * half;
    cplx50 term = pow(half, l);
    for (int i = 1; i <= l; ++i) term /= i;
    cplx50 sum = term;
    for (int k = 1; k < 400; ++k) {
        term *= q / (real50(k) * real50(k + l));
        sum += term;
        if (abs(term) < abs(sum) * real50("1e-45") && k > 5) break;
    }
    return sum;
}

inline real50 digamma_int(int m) {  // psi(m) for m >= 1
    real50 s = -boost::math::constants::euler<real50>();
    for (int i = 1; i < m; ++i) s += real50(1) / i;
    return s;
}

inline cplx50 series_y(int l, const cplx50& z) {
    const real50 pi = boost::math::constants::pi<real50>();
    const cplx50 half = z / 2;
    const cplx50 t = half * half;

    cplx50 first = 0;
    if (l > 0) {
        // sum_{k<l} (l-k-1)!/k! t^k
        real50 fact_hi = 1;  // (l-1)!
        for (int i = 2; i < l; ++i) fact_hi *= i;
        real50 fact_k = 1;
        cplx50 tk = 1;
        for (int k = 0; k < l; ++k) {
            if (k > 0) {
                fact_k *= k;
                tk *= t;
                fact_hi /= (l - k);
            }
            first += fact_hi / fact_k * tk;
        }
        first *= -pow(half, -l) / pi;
    }

    const cplx50 log_half = log(half);
    cplx50 second = (2 / pi) * log_half * series_j(l, z);

    real50 kfact = 1, lkfact = 1;
    for (int i = 2; i <= l; ++i) lkfact *= i;
    cplx50 tk = 1;
    cplx50 sum = 0;
    real50 psi_a = digamma_int(1), psi_b = digamma_int(l + 1);
    for (int k = 0; k < 400; ++k) {
        if (k > 0) {
            kfact *= k;
            lkfact *= (l + k);
            tk *= -t;
            psi_a += real50(1) / k;
            psi_b += real50(1) / (l + k);
        }
        const cplx50 term = (psi_a + psi_b) * tk / (kfact * lkfact);
        sum += term;
        if (k > 5 && abs(term) < abs(sum) * real50("1e-45")) break;
    }
    cplx50 third = -pow(half, l) / pi * sum;
    return first + second + third;
}

inline std::complex<double> to_double(const cplx50& v) {
    return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

/// J_l, J_l', H1_l, H1_l' at a double-precision argument.
inline SeriesValues cylinder_series(int l, std::complex<double> x) {
    const cplx50 z(x.real(), x.imag());
    const cplx50 i(0, 1);
    auto jf = [&](int m) { return m >= 0 ? series_j(m, z) : (m % 2 ? -series_j(-m, z) : series_j(-m, z)); };
    auto yf = [&](int m) { return m >= 0 ? series_y(m, z) : (m % 2 ? -series_y(-m, z) : series_y(-m, z)); };
    const cplx50 jl = jf(l), jm = jf(l - 1);
    const cplx50 yl = yf(l), ym = yf(l - 1);
    const cplx50 hl = jl + i * yl, hm = jm + i * ym;
    const cplx50 dj = jm - real50(l) / z * jl;
    const cplx50 dh = hm - real50(l) / z * hl;
    return {to_double(jl), to_double(dj), to_double(hl), to_double(dh)};
}

}  // namespace oracle
