#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "fsolink/errors.hpp"
#include "fsolink/fft.hpp"
#include "fsolink/numerics.hpp"

namespace fsolink {

// Sampled scalar optical field on a square n-by-n grid.
//
// Samples are row-major, sample (ix, iy) sits at x = (ix - n/2)*dx,
// y = (iy - n/2)*dx, so the beam axis is the (n/2, n/2) sample. Grid sizes
// are restricted to powers of two. The pitch dx changes only through the
// scaled propagation path, which records the new value.
class ComplexField {
public:
    ComplexField(int n, double dx, double wavelength)
        : n_(n), dx_(dx), wavelength_(wavelength),
          samples_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
        if (n < 2 || (n & (n - 1)) != 0)
            throw SimulationError("grid size must be a power of two >= 2, got " + std::to_string(n));
        if (!(dx > 0.0)) throw SimulationError("grid pitch must be positive");
        if (!(wavelength > 0.0)) throw SimulationError("wavelength must be positive");
    }

    int n() const { return n_; }
    double dx() const { return dx_; }
    double wavelength() const { return wavelength_; }
    double window() const { return n_ * dx_; }

    double coord(int i) const { return (i - n_ / 2) * dx_; }

    std::complex<double>& at(int ix, int iy) {
        return samples_[static_cast<std::size_t>(iy) * n_ + ix];
    }
    const std::complex<double>& at(int ix, int iy) const {
        return samples_[static_cast<std::size_t>(iy) * n_ + ix];
    }

    std::span<std::complex<double>> samples() { return samples_; }
    std::span<const std::complex<double>> samples() const { return samples_; }
    std::complex<double>* data() { return samples_.data(); }
    const std::complex<double>* data() const { return samples_.data(); }

    // Used by the scaled propagation step only.
    void rescale_pitch(double new_dx) {
        if (!(new_dx > 0.0)) throw SimulationError("grid pitch must be positive");
        dx_ = new_dx;
    }

private:
    int n_;
    double dx_;
    double wavelength_;
    fft::ComplexBuffer samples_;
};

// Total optical power sum(|a|^2) * dx^2, in watts. Pairwise summation keeps
// the result reproducible and accurate to well below the 1e-9 tolerances the
// conservation checks use.
inline double total_power(const ComplexField& f) {
    const double s = numerics::pairwise_sum(
        f.samples(), [](const std::complex<double>& a) { return std::norm(a); });
    return s * f.dx() * f.dx();
}

// Fraction of power in the outermost frame of the window (frame width
// `border_frac` of the window per side). Cheap guard against beams or focal
// spots running into the periodic boundary.
inline double border_power_fraction(const ComplexField& f, double border_frac) {
    const int n = f.n();
    const int b = std::max(1, static_cast<int>(border_frac * n));
    double border = 0.0, total = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        const bool edge_row = iy < b || iy >= n - b;
        for (int ix = 0; ix < n; ++ix) {
            const double p = std::norm(f.at(ix, iy));
            total += p;
            if (edge_row || ix < b || ix >= n - b) border += p;
        }
    }
    return total > 0.0 ? border / total : 0.0;
}

} // namespace fsolink
