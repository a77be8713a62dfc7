#include "nanotherm/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "nanotherm/errors.hpp"

namespace nanotherm::specfun {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kRescale = 1e250;
constexpr double kHankelLimit = 1e300;
constexpr double kHankelFloor = 1e-290;
const cplx kI{0.0, 1.0};

std::string describe(int order, cplx x) {
    std::ostringstream os;
    os.precision(10);
    os << "(l=" << order << ", x=" << x.real() << (x.imag() < 0 ? "" : "+") << x.imag() << "i)";
    return os.str();
}

double magnitude(cplx z) { return std::max(std::abs(z.real()), std::abs(z.imag())); }

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

int miller_start(int max_order, double abs_x) {
    const double base = std::max(static_cast<double>(max_order), std::ceil(abs_x));
    return static_cast<int>(base) + 30 + static_cast<int>(std::ceil(10.0 * std::cbrt(abs_x)));
}

// J_0..J_n by Miller's backward recurrence normalised with
// exp(-iz) = J_0 + 2 sum_k (-i)^k J_k, valid for Im z >= 0.
std::vector<cplx> bessel_j_miller(int n, cplx z) {
    const int start = miller_start(n, std::abs(z));
    const cplx inv = 1.0 / z;
    static const cplx phase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};

    std::vector<cplx> f(n + 1);
    cplx next{0.0, 0.0};  // order k+1
    cplx cur{1.0, 0.0};   // order k
    cplx sum{0.0, 0.0};
    int lowest_stored = n + 1;
    for (int k = start; k >= 1; --k) {
        sum += phase[k & 3] * cur;
        if (k <= n) {
            f[k] = cur;
            lowest_stored = k;
        }
        const cplx prev = (2.0 * k) * inv * cur - next;
        next = cur;
        cur = prev;
        if (magnitude(cur) > kRescale) {
            const double s = 1.0 / kRescale;
            cur *= s;
            next *= s;
            sum *= s;
            for (int i = lowest_stored; i <= n; ++i) f[i] *= s;
        }
    }
    f[0] = cur;
    const cplx norm = std::exp(-kI * z) / (cur + 2.0 * sum);
    for (auto& v : f) v *= norm;
    return f;
}

// Y_0 and Y_1 from their ascending series; |z| <= 2, Im z >= 0.
std::pair<cplx, cplx> bessel_y01_series(cplx z, cplx j0, cplx j1) {
    const cplx t = 0.25 * z * z;
    const cplx log_half = std::log(0.5 * z);

    cplx s0{0.0, 0.0};
    cplx term{1.0, 0.0};  // (-t)^k / (k!)^2
    double harmonic = 0.0;
    for (int k = 1; k < 80; ++k) {
        term *= -t / (static_cast<double>(k) * k);
        harmonic += 1.0 / k;
        const cplx add = -harmonic * term;  // (-1)^{k+1} H_k t^k/(k!)^2
        s0 += add;
        if (std::abs(add) < 1e-18 * std::abs(s0)) break;
    }
    const cplx y0 = (2.0 / kPi) * ((log_half + kEulerGamma) * j0 + s0);

    cplx s1{0.0, 0.0};
    cplx term1{1.0, 0.0};  // (-t)^k / (k! (k+1)!)
    double hk = 0.0, hk1 = 1.0;
    for (int k = 0; k < 80; ++k) {
        if (k > 0) {
            term1 *= -t / (static_cast<double>(k) * (k + 1));
            hk += 1.0 / k;
            hk1 += 1.0 / (k + 1);
        }
        const cplx add = (hk + hk1 - 2.0 * kEulerGamma) * term1;
        s1 += add;
        if (k > 2 && std::abs(add) < 1e-18 * std::abs(s1)) break;
    }
    const cplx y1 = -2.0 / (kPi * z) + (2.0 / kPi) * log_half * j1 - (0.5 / kPi) * z * s1;
    return {y0, y1};
}

// H1_0'/H1_0 by Steed's continued fraction, modified Lentz; |z| > 2.
cplx hankel_log_derivative_cf(cplx z) {
    constexpr double tiny = 1e-300;
    cplx f{tiny, 0.0};
    cplx c = f;
    cplx d{0.0, 0.0};
    for (int j = 1; j < 20000; ++j) {
        const double a = (j - 0.5) * (j - 0.5);
        const cplx b = 2.0 * (z + kI * static_cast<double>(j));
        d = b + a * d;
        if (d == 0.0) d = tiny;
        d = 1.0 / d;
        c = b + a / c;
        if (c == 0.0) c = tiny;
        const cplx delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) return -0.5 / z + kI + (kI / z) * f;
    }
    throw ConvergenceError("Hankel continued fraction did not converge at " + describe(0, z));
}

// Upper half plane (Im z >= 0) batch.
CylinderBatch batch_upper(int max_order, cplx z, OverflowPolicy policy) {
    const int n = std::max(max_order, 1);
    CylinderBatch out;
    out.x = z;
    out.j = bessel_j_miller(n, z);

    cplx h0, h1;
    if (std::abs(z) <= 2.0) {
        auto [y0, y1] = bessel_y01_series(z, out.j[0], out.j[1]);
        h0 = out.j[0] + kI * y0;
        h1 = out.j[1] + kI * y1;
    } else {
        const cplx g = hankel_log_derivative_cf(z);
        h0 = 2.0 * kI / (kPi * z * (g * out.j[0] + out.j[1]));
        h1 = -g * h0;
    }
    if (!finite(h0) || magnitude(h0) < kHankelFloor)
        throw OverflowError("Hankel function not representable at " + describe(0, z));

    const cplx inv = 1.0 / z;
    out.h.reserve(n + 1);
    out.h.push_back(h0);
    out.h.push_back(h1);
    int last = n;
    for (int k = 1; k < n; ++k) {
        const cplx next = (2.0 * k) * inv * out.h[k] - out.h[k - 1];
        const double guard = magnitude(next) * (1.0 + (k + 1) / std::abs(z));
        if (!(guard < kHankelLimit)) {
            if (policy == OverflowPolicy::Throw)
                throw OverflowError("Hankel function overflows at " + describe(k + 1, z));
            last = k;
            break;
        }
        out.h.push_back(next);
    }
    out.j.resize(last + 1);

    out.dj.resize(last + 1);
    out.dh.resize(last + 1);
    out.dj[0] = -out.j[1];
    out.dh[0] = -out.h[1];
    for (int k = 1; k <= last; ++k) {
        const double kd = static_cast<double>(k);
        out.dj[k] = out.j[k - 1] - kd * inv * out.j[k];
        out.dh[k] = out.h[k - 1] - kd * inv * out.h[k];
    }
    if (max_order == 0 || (policy == OverflowPolicy::Throw && last > max_order)) {
        const int keep = std::max(max_order, 0) + 1;
        out.j.resize(keep);
        out.dj.resize(keep);
        out.h.resize(keep);
        out.dh.resize(keep);
    }
    for (int k = 0; k < out.size(); ++k) {
        if (!finite(out.j[k]) || !finite(out.dj[k]) || !finite(out.h[k]) || !finite(out.dh[k]))
            throw OverflowError("non-finite cylinder function at " + describe(k, z));
    }
    return out;
}

void check_argument(cplx x) {
    if (x == 0.0) throw DomainError("cylinder functions undefined at x = 0");
    if (!finite(x)) throw DomainError("non-finite argument");
    if (std::abs(x) > kMaxArgument)
        throw DomainError("argument modulus exceeds supported range: " + describe(0, x));
    if (std::abs(x.imag()) > kMaxImaginary)
        throw OverflowError("|Im x| too large, J would overflow: " + describe(0, x));
}

}  // namespace

CylinderBatch cylinder_functions(int max_order, cplx x, OverflowPolicy policy) {
    if (max_order < 0) throw DomainError("max_order must be non-negative");
    check_argument(x);
    if (x.imag() >= 0.0) return batch_upper(max_order, x, policy);

    // H1(z) = conj(2 J(conj z) - H1(conj z)) below the real axis
    CylinderBatch up = batch_upper(max_order, std::conj(x), policy);
    CylinderBatch out;
    out.x = x;
    const int n = up.size();
    out.j.resize(n);
    out.dj.resize(n);
    out.h.resize(n);
    out.dh.resize(n);
    for (int k = 0; k < n; ++k) {
        out.j[k] = std::conj(up.j[k]);
        out.dj[k] = std::conj(up.dj[k]);
        out.h[k] = std::conj(2.0 * up.j[k] - up.h[k]);
        out.dh[k] = std::conj(2.0 * up.dj[k] - up.dh[k]);
    }
    return out;
}

CylinderFunctionSet bessel_set(int order, cplx x) {
    const int l = std::abs(order);
    if (l > kMaxSingleOrder) throw DomainError("order out of range: " + describe(order, x));
    CylinderBatch b = cylinder_functions(l, x, OverflowPolicy::Throw);
    const double sign = (order < 0 && (l & 1)) ? -1.0 : 1.0;
    return {order, x, sign * b.j[l], sign * b.dj[l], sign * b.h[l], sign * b.dh[l]};
}

std::vector<cplx> bessel_j_log_derivatives(int max_order, cplx x) {
    if (max_order < 0) throw DomainError("max_order must be non-negative");
    if (x == 0.0 || !finite(x)) throw DomainError("log-derivative undefined at x = 0");
    const int n = std::max(max_order, 1);
    const int start = miller_start(n, std::abs(x));
    const cplx inv = 1.0 / x;

    // ratio[k] = J_k / J_{k-1}
    std::vector<cplx> ratio(n + 1);
    cplx r{0.0, 0.0};
    for (int k = start; k >= 1; --k) {
        cplx denom = (2.0 * k) * inv - r;
        if (denom == 0.0) denom = 1e-300;
        r = 1.0 / denom;
        if (k <= n) ratio[k] = r;
    }
    std::vector<cplx> out(max_order + 1);
    out[0] = -ratio[1];
    for (int k = 1; k <= max_order; ++k) out[k] = 1.0 / ratio[k] - static_cast<double>(k) * inv;
    return out;
}

}  // namespace nanotherm::specfun
