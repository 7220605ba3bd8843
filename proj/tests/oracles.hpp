// Test-side oracles, deliberately independent of the implementation paths
// they check: closed-form integrals, quadrature of spectra, and brute-force
// references.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "fsolink/field.hpp"
#include "fsolink/random.hpp"

namespace oracles {

// Term-by-term closed-form integral of the Hufnagel-Valley profile over
// [0, top]: the h^10 exp(-h/1000) term via the lower incomplete gamma
// function, the two exponentials directly.
inline double hv_integral_closed_form(double ground_cn2, double wind_rms, double top) {
    // integral_0^T h^10 e^(-h/s) dh = s^11 * gamma_lower(11, T/s)
    // gamma_lower(11, x) = 10! (1 - e^-x sum_{k=0}^{10} x^k / k!)
    const double s = 1000.0;
    const double x = top / s;
    double sum = 0.0, term = 1.0;
    for (int k = 0; k <= 10; ++k) {
        sum += term;
        term *= x / (k + 1);
    }
    const double fact10 = 3628800.0;
    const double gamma_lower = fact10 * (1.0 - std::exp(-x) * sum);
    const double t1 = 0.00594 * std::pow(wind_rms / 27.0, 2.0) * 1e-50 *
                      std::pow(s, 11.0) * gamma_lower;
    const double t2 = 2.7e-16 * 1500.0 * (1.0 - std::exp(-top / 1500.0));
    const double t3 = ground_cn2 * 100.0 * (1.0 - std::exp(-top / 100.0));
    return t1 + t2 + t3;
}

// Theoretical von Karman phase structure function by direct quadrature of
// D(r) = 4 pi int [1 - J0(kappa r)] Phi(kappa) kappa dkappa with
// Phi(kappa) = 0.49 r0^(-5/3) (kappa^2 + kappa0^2)^(-11/6) exp(-kappa^2/kappa_m^2).
inline double von_karman_structure_function(double r, double r0, double outer_scale,
                                            double inner_scale) {
    if (r == 0.0) return 0.0;
    const double kappa0 = 2.0 * M_PI / outer_scale;
    const double kappa_m = inner_scale > 0.0 ? 5.92 / inner_scale : 0.0;
    auto integrand = [&](double kappa) {
        const double shape = std::pow(kappa * kappa + kappa0 * kappa0, -11.0 / 6.0) *
                             (kappa_m > 0.0 ? std::exp(-(kappa * kappa) / (kappa_m * kappa_m))
                                            : 1.0);
        return (1.0 - std::cyl_bessel_j(0.0, kappa * r)) * shape * kappa;
    };
    // log-spaced composite Simpson; integrand ~ kappa^3 near 0 and decays as
    // kappa^(-8/3) (faster once the inner-scale cutoff bites).
    const double k_lo = 1e-6 * kappa0;
    const double k_hi = (kappa_m > 0.0 ? 20.0 * kappa_m : 1e7 / outer_scale) + 200.0 / r;
    const int steps = 20000;
    const double lg_lo = std::log(k_lo), lg_hi = std::log(k_hi);
    const double h = (lg_hi - lg_lo) / steps;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double a = std::exp(lg_lo + i * h);
        const double b = std::exp(lg_lo + (i + 1) * h);
        const double m = 0.5 * (a + b);
        acc += (b - a) / 6.0 * (integrand(a) + 4.0 * integrand(m) + integrand(b));
    }
    return 4.0 * M_PI * 0.49 * std::pow(r0, -5.0 / 3.0) * acc;
}

// Kolmogorov inertial-range reference 6.88 (r/r0)^(5/3).
inline double kolmogorov_structure_function(double r, double r0) {
    return 6.88 * std::pow(r / r0, 5.0 / 3.0);
}

// Overlap of two centered Gaussian spots with 1/e^2 field radii w1, w2.
inline double two_gaussian_coupling(double w1, double w2) {
    const double t = 2.0 * w1 * w2 / (w1 * w1 + w2 * w2);
    return t * t;
}

// Deterministic pseudo-random field for property tests.
inline fsolink::ComplexField random_field(int n, double dx, double wavelength,
                                          std::uint64_t seed) {
    fsolink::ComplexField f(n, dx, wavelength);
    fsolink::rng::Xoshiro256pp gen(seed);
    for (auto& a : f.samples()) {
        double g0, g1;
        gen.next_gaussian_pair(g0, g1);
        a = {g0, g1};
    }
    return f;
}

} // namespace oracles
