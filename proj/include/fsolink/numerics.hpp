#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fsolink::numerics {

// Pairwise (cascade) summation: O(log n) error growth instead of O(n),
// and a fixed evaluation order so results are reproducible.
template <typename T, typename F>
double pairwise_sum(std::span<const T> v, F&& term) {
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 32) {
        double s = 0.0;
        for (const auto& x : v) s += term(x);
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.subspan(0, half), term) + pairwise_sum(v.subspan(half), term);
}

template <typename T>
double pairwise_sum(std::span<const T> v) {
    return pairwise_sum(v, [](const T& x) { return static_cast<double>(x); });
}

// Adaptive Simpson quadrature with a relative tolerance.
namespace detail {
inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole,
                                   double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

// Integrate f over [a, b] to roughly rel_tol relative accuracy. The interval
// is pre-split so that narrow features (boundary-layer exponentials in the
// turbulence profile) are not missed by the first Simpson estimate.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-9, int presplit = 64) {
    if (b <= a) return 0.0;
    double coarse = 0.0;
    const double h = (b - a) / presplit;
    std::vector<double> fs(static_cast<std::size_t>(presplit) * 2 + 1);
    for (std::size_t i = 0; i < fs.size(); ++i) fs[i] = f(a + 0.5 * h * static_cast<double>(i));
    for (int i = 0; i < presplit; ++i) {
        coarse += (h / 6.0) * (fs[2 * i] + 4.0 * fs[2 * i + 1] + fs[2 * i + 2]);
    }
    const double tol = std::max(std::abs(coarse), 1e-300) * rel_tol;
    double total = 0.0;
    for (int i = 0; i < presplit; ++i) {
        const double x0 = a + i * h;
        const double x1 = x0 + h;
        const double whole = (h / 6.0) * (fs[2 * i] + 4.0 * fs[2 * i + 1] + fs[2 * i + 2]);
        total += detail::adaptive_simpson_rec(f, x0, x1, fs[2 * i], fs[2 * i + 1], fs[2 * i + 2],
                                              whole, tol / presplit, 48);
    }
    return total;
}

// Bisection for a monotone function; returns x in [lo, hi] with f(x) ~ target.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double target, double x_tol) {
    double flo = f(lo) - target;
    for (int it = 0; it < 200 && (hi - lo) > x_tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid) - target;
        if ((fm >= 0.0) == (flo >= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace fsolink::numerics
