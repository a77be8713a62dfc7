#include "nanotherm/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "nanotherm/errors.hpp"

namespace nanotherm::numerics {

namespace {

QuadratureRule make_gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: order must be positive");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(make_gauss_legendre(n));
    return *slot;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
    const auto& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.back() = hi;
    return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
    if (lo <= 0.0 || hi <= 0.0) throw DomainError("logspace: bounds must be positive");
    auto out = linspace(std::log(lo), std::log(hi), count);
    for (auto& v : out) v = std::exp(v);
    if (!out.empty()) {
        out.front() = lo;
        out.back() = hi;
    }
    return out;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double xtol,
                 int max_iter) {
    const double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw ConvergenceError("find_root: no sign change on [" + format_double(lo) + ", " +
                               format_double(hi) + "]");
    auto tol = [xtol](double a, double b) { return std::abs(b - a) <= xtol; };
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
    if (iters >= static_cast<std::uintmax_t>(max_iter) && !tol(a, b))
        throw ConvergenceError("find_root: iteration budget exhausted");
    return 0.5 * (a + b);
}

std::size_t locate(std::span<const double> xs, double x) {
    if (xs.size() < 2) return 0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = (it == xs.begin()) ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(i, xs.size() - 2);
}

double interp_linear(std::span<const double> xs, std::span<const double> ys, double x) {
    if (xs.size() == 1 || x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const std::size_t i = locate(xs, x);
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    std::vector<double> c(n);
    double denom = diag[0];
    c[0] = n > 1 ? upper[0] / denom : 0.0;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * c[i - 1];
        c[i] = i + 1 < n ? upper[i] / denom : 0.0;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

CubicHermite::CubicHermite(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n) throw DomainError("CubicHermite: need at least two matching points");
    slopes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            slopes_[i] = (ys_[1] - ys_[0]) / (xs_[1] - xs_[0]);
        } else if (i == n - 1) {
            slopes_[i] = (ys_[n - 1] - ys_[n - 2]) / (xs_[n - 1] - xs_[n - 2]);
        } else {
            // three-point derivative, exact for quadratics on non-uniform grids
            const double h0 = xs_[i] - xs_[i - 1], h1 = xs_[i + 1] - xs_[i];
            const double d0 = (ys_[i] - ys_[i - 1]) / h0, d1 = (ys_[i + 1] - ys_[i]) / h1;
            slopes_[i] = (h1 * d0 + h0 * d1) / (h0 + h1);
        }
    }
}

std::pair<double, double> CubicHermite::eval(double x) const {
    const std::size_t i = locate(xs_, x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double y0 = ys_[i], y1 = ys_[i + 1];
    const double m0 = slopes_[i] * h, m1 = slopes_[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    const double value = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 +
                         (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
    const double deriv = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 +
                          (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h;
    return {value, deriv};
}

double CubicHermite::operator()(double x) const { return eval(x).first; }

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (double v : values) {
        unsigned char buf[sizeof(double)];
        std::memcpy(buf, &v, sizeof(double));
        h = fnv1a(std::string_view(reinterpret_cast<const char*>(buf), sizeof(buf)), h);
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace nanotherm::numerics
