#pragma once

#include <complex>
#include <vector>

namespace nanotherm::specfun {

using cplx = std::complex<double>;

inline constexpr int kMaxSingleOrder = 200;
inline constexpr double kMaxArgument = 1e4;
/// Beyond this |Im x| the Bessel function J overflows double precision.
inline constexpr double kMaxImaginary = 690.0;

/// J_l, H1_l and their derivatives at one (l, x).
struct CylinderFunctionSet {
    int order = 0;
    cplx x;
    cplx j, dj, h, dh;
};

/// J_l, J_l', H1_l, H1_l' for l = 0..size()-1 at a common argument.
struct CylinderBatch {
    cplx x;
    std::vector<cplx> j, dj, h, dh;
    int size() const { return static_cast<int>(j.size()); }
};

enum class OverflowPolicy {
    Throw,     ///< any non-representable value raises OverflowError
    Truncate,  ///< stop at the first order whose Hankel function leaves the safe range
};

/// Single order, negative orders via J_{-l} = (-1)^l J_l (same for H1).
CylinderFunctionSet bessel_set(int order, cplx x);

/// Orders 0..max_order. With OverflowPolicy::Truncate the batch may be shorter
/// than requested but always contains orders 0 and 1.
CylinderBatch cylinder_functions(int max_order, cplx x,
                                 OverflowPolicy policy = OverflowPolicy::Throw);

/// J_l'(x)/J_l(x) for l = 0..max_order via backward ratio recurrence. Never overflows.
std::vector<cplx> bessel_j_log_derivatives(int max_order, cplx x);

}  // namespace nanotherm::specfun
