#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nanotherm::numerics {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule. Thread-safe; the returned reference stays valid.
const QuadratureRule& gauss_legendre(int n);

/// Integrate f over [a, b] with a fixed n-point Gauss-Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n);

std::vector<double> linspace(double lo, double hi, std::size_t count);
std::vector<double> logspace(double lo, double hi, std::size_t count);

/// Bracketed root of f on [lo, hi] to absolute tolerance `xtol` (TOMS 748).
/// Throws ConvergenceError if f(lo) and f(hi) do not differ in sign.
double find_root(const std::function<double(double)>& f, double lo, double hi, double xtol,
                 int max_iter = 200);

/// Piecewise-linear interpolation on increasing `xs`; values outside are held constant.
double interp_linear(std::span<const double> xs, std::span<const double> ys, double x);

/// Index i with xs[i] <= x < xs[i+1], clamped to [0, xs.size()-2].
std::size_t locate(std::span<const double> xs, double x);

/// Solve a tridiagonal system in place. `lower[0]` and `upper[n-1]` are ignored.
/// `rhs` is overwritten by the solution.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

/// Cubic Hermite interpolant with finite-difference slopes on a strictly increasing grid.
class CubicHermite {
public:
    CubicHermite() = default;
    CubicHermite(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const;
    /// Value and derivative in one pass.
    std::pair<double, double> eval(double x) const;

    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }
    bool empty() const { return xs_.empty(); }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }

private:
    std::vector<double> xs_, ys_, slopes_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Exact round-trip text form of a double.
std::string format_double(double value);

}  // namespace nanotherm::numerics
