#pragma once

// Adaptive Gauss-Kronrod (G7, K15) quadrature on finite intervals.

#include <cmath>
#include <cstddef>
#include <vector>

#include "regenmc/errors.hpp"

namespace regenmc {
namespace detail {

// K15 abscissae (positive half) and weights; rows 0..3 carry the embedded
// G7 weights.
inline constexpr double kGkNodes[8] = {
    0.000000000000000, 0.405845151377397, 0.741531185599394, 0.949107912342759,
    0.207784955007898, 0.586087235467691, 0.864864423359769, 0.991455371120813};
inline constexpr double kGaussWeights[4] = {0.417959183673469, 0.381830050505119,
                                            0.279705391489277, 0.129484966168870};
inline constexpr double kKronrodWeights[8] = {
    0.209482141084728, 0.190350578064785, 0.140653259715525, 0.063092092629979,
    0.204432940075298, 0.169004726639267, 0.104790010322250, 0.022935322010529};

template <class Func>
std::pair<double, double> gk15(Func&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double gauss = kGaussWeights[0] * f0;
    double kronrod = kKronrodWeights[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kGkNodes[i];
        const double fi = f(mid + dx) + f(mid - dx);
        kronrod += kKronrodWeights[i] * fi;
        if (i < 4) gauss += kGaussWeights[i] * fi;
    }
    gauss *= half;
    kronrod *= half;
    return {kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integral of f over [a, b] to the given absolute tolerance per panel,
/// by bisection of the panels with the largest embedded error estimate.
template <class Func>
double integrate(Func&& f, double a, double b, double abs_tol = 1e-9,
                 std::size_t max_panels = 4000) {
    struct Panel {
        double a, b, value, error;
    };
    std::vector<Panel> stack;
    auto [v0, e0] = detail::gk15(f, a, b);
    stack.push_back({a, b, v0, e0});
    double sum = 0.0;
    std::size_t splits = 0;
    while (!stack.empty()) {
        const Panel panel = stack.back();
        stack.pop_back();
        if (panel.error <= abs_tol || splits >= max_panels ||
            panel.b - panel.a < 1e-14 * (std::abs(panel.a) + std::abs(panel.b) + 1.0)) {
            sum += panel.value;
            continue;
        }
        ++splits;
        const double mid = 0.5 * (panel.a + panel.b);
        auto [vl, el] = detail::gk15(f, panel.a, mid);
        auto [vr, er] = detail::gk15(f, mid, panel.b);
        stack.push_back({panel.a, mid, vl, el});
        stack.push_back({mid, panel.b, vr, er});
    }
    return sum;
}

}  // namespace regenmc
