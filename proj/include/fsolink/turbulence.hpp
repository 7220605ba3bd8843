#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>
#include <vector>

#include "fsolink/constants.hpp"
#include "fsolink/errors.hpp"
#include "fsolink/field.hpp"
#include "fsolink/numerics.hpp"
#include "fsolink/random.hpp"

// Refractive-index turbulence statistics: Hufnagel-Valley C_n^2 altitude
// profile, path integration, Fried parameter, atmosphere slicing and
// von Karman phase-screen realizations.
namespace fsolink {

struct HVProfile {
    double ground_cn2 = 1e-13; // A, m^(-2/3)
    double wind_rms = 21.0;    // v, m/s
    // Turbulence-free sentinel profile. The literal Hufnagel-Valley form keeps
    // a constant 2.7e-16 background term even at A = 0, v = 0, so "no
    // turbulence" needs its own representation.
    bool disabled = false;

    static HVProfile none() { return {0.0, 0.0, true}; }

    void validate() const {
        if (!(ground_cn2 >= 0.0)) throw SimulationError("ground C_n^2 must be non-negative");
        if (!(wind_rms >= 0.0)) throw SimulationError("wind rms must be non-negative");
    }
};

// Hufnagel-Valley C_n^2(h), h in meters above ground.
inline double cn2_at_altitude(const HVProfile& p, double h) {
    if (!(h >= 0.0)) throw SimulationError("altitude must be non-negative");
    if (p.disabled) return 0.0;
    const double v_term = p.wind_rms / 27.0;
    const double hk = 1e-5 * h;
    const double pow10 = hk * hk * hk * hk * hk * hk * hk * hk * hk * hk;
    return 0.00594 * v_term * v_term * pow10 * std::exp(-h / 1000.0) +
           2.7e-16 * std::exp(-h / 1500.0) +
           p.ground_cn2 * std::exp(-h / 100.0);
}

// Integral of C_n^2 over an altitude range, m^(1/3).
inline double integrate_cn2(const HVProfile& p, double h_lo, double h_hi) {
    if (h_hi <= h_lo) return 0.0;
    return numerics::integrate([&](double h) { return cn2_at_altitude(p, h); }, h_lo, h_hi);
}

// r0 from a path-vertical C_n^2 integral: [0.423 k^2 sec(zenith) J]^(-3/5).
// Returns +infinity for a turbulence-free path.
inline double fried_parameter_from_integral(double cn2_integral, double wavelength,
                                            double elevation_deg) {
    if (!(elevation_deg > 0.0 && elevation_deg <= 90.0))
        throw SimulationError("elevation must be in (0, 90] degrees");
    if (cn2_integral <= 0.0) return std::numeric_limits<double>::infinity();
    const double k = 2.0 * constants::pi / wavelength;
    const double zenith = (90.0 - elevation_deg) * constants::pi / 180.0;
    const double sec_z = 1.0 / std::cos(zenith);
    return std::pow(0.423 * k * k * sec_z * cn2_integral, -3.0 / 5.0);
}

inline double fried_parameter(const HVProfile& p, double wavelength, double elevation_deg,
                              double atmosphere_top) {
    p.validate();
    return fried_parameter_from_integral(integrate_cn2(p, 0.0, atmosphere_top), wavelength,
                                         elevation_deg);
}

struct AtmosphereSlice {
    double altitude_lo = 0.0;     // m
    double altitude_hi = 0.0;     // m
    double path_thickness = 0.0;  // m, along the line of sight
    double integrated_cn2 = 0.0;  // m^(1/3), vertical integral over the slice
    double r0 = 0.0;              // m, Fried parameter of this slice alone
};

enum class SlicingMode { EqualStrength, EqualThickness };

struct AtmosphereSlicing {
    std::vector<AtmosphereSlice> slices;
    double elevation_deg = 90.0;
    double atmosphere_top = 30e3;

    double total_integrated_cn2() const {
        double s = 0.0;
        for (const auto& sl : slices) s += sl.integrated_cn2;
        return s;
    }
};

// Split [0, atmosphere_top] into n_slices slices. Equal-strength slicing
// (default) chooses boundaries so every slice carries the same integrated
// C_n^2, making all screens statistically comparable; equal-thickness is the
// naive alternative. Slice r0 values compose back to the whole-path r0 via
// sum(r0_i^(-5/3)).
inline AtmosphereSlicing slice_atmosphere(const HVProfile& p, int n_slices, double elevation_deg,
                                          double atmosphere_top, double wavelength,
                                          SlicingMode mode = SlicingMode::EqualStrength) {
    p.validate();
    if (n_slices < 1) throw SimulationError("need at least one atmosphere slice");
    if (!(elevation_deg > 0.0 && elevation_deg <= 90.0))
        throw SimulationError("elevation must be in (0, 90] degrees");
    if (!(atmosphere_top > 0.0)) throw SimulationError("atmosphere top must be positive");

    const double sin_el = std::sin(elevation_deg * constants::pi / 180.0);
    const double total = integrate_cn2(p, 0.0, atmosphere_top);

    std::vector<double> bounds(static_cast<std::size_t>(n_slices) + 1);
    bounds.front() = 0.0;
    bounds.back() = atmosphere_top;
    if (mode == SlicingMode::EqualThickness || total <= 0.0) {
        for (int j = 1; j < n_slices; ++j)
            bounds[j] = atmosphere_top * static_cast<double>(j) / n_slices;
    } else {
        for (int j = 1; j < n_slices; ++j) {
            const double target = total * static_cast<double>(j) / n_slices;
            bounds[j] = numerics::bisect(
                [&](double h) { return integrate_cn2(p, 0.0, h); },
                bounds[j - 1], atmosphere_top, target, atmosphere_top * 1e-12);
        }
    }

    AtmosphereSlicing out;
    out.elevation_deg = elevation_deg;
    out.atmosphere_top = atmosphere_top;
    out.slices.reserve(n_slices);
    for (int j = 0; j < n_slices; ++j) {
        AtmosphereSlice s;
        s.altitude_lo = bounds[j];
        s.altitude_hi = bounds[j + 1];
        s.path_thickness = (s.altitude_hi - s.altitude_lo) / sin_el;
        s.integrated_cn2 = integrate_cn2(p, s.altitude_lo, s.altitude_hi);
        s.r0 = fried_parameter_from_integral(s.integrated_cn2, wavelength, elevation_deg);
        out.slices.push_back(s);
    }
    return out;
}

// One realization of turbulence-induced phase over the grid, piston-free,
// bit-reproducible from (seed, parameters, n, dx).
struct PhaseScreen {
    int n = 0;
    double dx = 0.0;         // m
    double r0 = 0.0;         // m
    double outer_scale = 0.0; // L0, m
    double inner_scale = 0.0; // l0, m
    std::uint64_t seed = 0;
    std::vector<double> phase; // n*n radians, row-major, same layout as ComplexField

    double at(int ix, int iy) const { return phase[static_cast<std::size_t>(iy) * n + ix]; }
};

namespace detail {

// von Karman phase spectrum with r0 factored out:
// Phi(kappa) = 0.49 r0^(-5/3) * vk_shape(kappa^2), all in rad/m units.
inline double vk_shape(double kappa2, double kappa0_2, double inv_kappa_m2) {
    return std::pow(kappa2 + kappa0_2, -11.0 / 6.0) * std::exp(-kappa2 * inv_kappa_m2);
}

// Variance (integral of vk_shape) and spectral centroid of a square cell, by
// 5x5 Gauss-Legendre. The spectrum is steep across the lowest cells (kappa
// comparable to 2 pi / L0); a wave carrying the cell's integrated variance at
// the spectrum-weighted centroid keeps both the variance and the correlation
// shape of the synthesized screens on the theoretical curve.
struct SpectralCell {
    double variance = 0.0;
    double kx = 0.0;
    double ky = 0.0;
};

inline SpectralCell vk_cell_stat(double kx_c, double ky_c, double cell_w, double kappa0_2,
                                 double inv_kappa_m2) {
    static constexpr double node[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                                       0.538469310105683, 0.906179845938664};
    static constexpr double weight[5] = {0.236926885056189, 0.478628670499366,
                                         0.568888888888889, 0.478628670499366,
                                         0.236926885056189};
    const double h = 0.5 * cell_w;
    double acc = 0.0, mx = 0.0, my = 0.0;
    for (int a = 0; a < 5; ++a) {
        const double kx = kx_c + h * node[a];
        for (int b = 0; b < 5; ++b) {
            const double ky = ky_c + h * node[b];
            const double f =
                weight[a] * weight[b] * vk_shape(kx * kx + ky * ky, kappa0_2, inv_kappa_m2);
            acc += f;
            mx += f * kx;
            my += f * ky;
        }
    }
    SpectralCell c;
    c.variance = acc * h * h; // (cell_w/2)^2 Jacobian for the [-1,1]^2 mapping
    c.kx = mx / acc;
    c.ky = my / acc;
    return c;
}

// sqrt(vk_shape) * delta_kappa per FFT bin, shared across screens with the
// same grid and scale parameters; the r0^(-5/6) scalar is applied per screen.
// When the FFT grid under-resolves the outer scale (delta_kappa > kappa0,
// i.e. window < L0), the lowest bins are zeroed here and synthesized as finer
// explicit waves instead (see generate_phase_screen).
struct ScreenFilter {
    std::vector<double> values; // n*n, FFT bin order
    bool subdivide_low_bins = false;
};

inline constexpr int kSubdivideRadius = 2; // FFT bins |j| <= 2 get subdivided

inline std::shared_ptr<const ScreenFilter> screen_filter(int n, double dx, double outer_scale,
                                                         double inner_scale) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, double, double>, std::weak_ptr<ScreenFilter>> cache;
    std::lock_guard lock(mu);
    const auto key = std::make_tuple(n, dx, outer_scale, inner_scale);
    if (auto it = cache.find(key); it != cache.end()) {
        if (auto sp = it->second.lock()) return sp;
    }
    auto f = std::make_shared<ScreenFilter>();
    f->values.resize(static_cast<std::size_t>(n) * n);
    const double dk = 2.0 * constants::pi / (n * dx);
    const double kappa0 = 2.0 * constants::pi / outer_scale;
    const double kappa0_2 = kappa0 * kappa0;
    const double inv_km2 =
        inner_scale > 0.0 ? (inner_scale / 5.92) * (inner_scale / 5.92) : 0.0;
    f->subdivide_low_bins = dk > kappa0;
    std::vector<double> k_axis(n);
    std::vector<int> idx(n);
    for (int m = 0; m < n; ++m) {
        const int ms = (m <= n / 2 - 1) ? m : m - n;
        k_axis[m] = dk * ms;
        idx[m] = ms;
    }
    for (int iy = 0; iy < n; ++iy) {
        const double ky2 = k_axis[iy] * k_axis[iy];
        for (int ix = 0; ix < n; ++ix) {
            double v = std::sqrt(vk_shape(k_axis[ix] * k_axis[ix] + ky2, kappa0_2, inv_km2)) * dk;
            if (f->subdivide_low_bins && std::abs(idx[ix]) <= kSubdivideRadius &&
                std::abs(idx[iy]) <= kSubdivideRadius) {
                v = 0.0;
            }
            f->values[static_cast<std::size_t>(iy) * n + ix] = v;
        }
    }
    f->values[0] = 0.0; // piston bin, covered by the subharmonic levels
    cache[key] = f;
    return f;
}

} // namespace detail

// Draws one von Karman phase screen by spectral filtering of unit complex
// Gaussian noise, with low-frequency subharmonic augmentation (three 3x3
// levels by default) to restore the tilt content an FFT grid misses. Pass
// subharmonic_levels = 0 when comparing against the pure-FFT spectral oracle.
inline PhaseScreen generate_phase_screen(double r0, double outer_scale, double inner_scale,
                                         int n, double dx, std::uint64_t seed,
                                         int subharmonic_levels = 3) {
    if (n < 2 || (n & (n - 1)) != 0)
        throw SimulationError("screen grid size must be a power of two >= 2");
    if (!(dx > 0.0)) throw SimulationError("screen pitch must be positive");
    if (!(outer_scale > inner_scale) || !(inner_scale >= 0.0))
        throw SimulationError("need outer scale > inner scale >= 0");
    if (!(r0 > 0.0)) throw SimulationError("r0 must be positive (or infinite for no turbulence)");

    PhaseScreen out;
    out.n = n;
    out.dx = dx;
    out.r0 = r0;
    out.outer_scale = outer_scale;
    out.inner_scale = inner_scale;
    out.seed = seed;
    out.phase.assign(static_cast<std::size_t>(n) * n, 0.0);
    if (std::isinf(r0)) return out; // turbulence-free sentinel

    const double amp = std::sqrt(0.49) * std::pow(r0, -5.0 / 6.0);
    rng::Xoshiro256pp gen(seed);

    // FFT band: c = (g0 + i g1) * sqrt(Phi) * dkappa per bin, screen = Re(IDFT).
    auto filter = detail::screen_filter(n, dx, outer_scale, inner_scale);
    fft::ComplexBuffer spec(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        double g0, g1;
        gen.next_gaussian_pair(g0, g1);
        const double s = amp * filter->values[i];
        spec[i] = std::complex<double>(g0 * s, g1 * s);
    }
    fft::backward_2d(spec.data(), n);
    for (std::size_t i = 0; i < spec.size(); ++i) out.phase[i] = spec[i].real();

    // Explicit low-frequency waves, evaluated as a rank-K update by two real
    // matrix products: (a) when the FFT grid under-resolves the outer scale,
    // the zeroed low bins reappear as 3x3 sub-waves per bin cell; (b) the
    // subharmonic levels cover the central cell with 3x3 grids of ever-finer
    // frequencies. Each wave carries its cell's integrated variance at the
    // spectrum-weighted centroid frequency.
    {
        const double dk = 2.0 * constants::pi / (n * dx);
        const double kappa0 = 2.0 * constants::pi / outer_scale;
        const double kappa0_2 = kappa0 * kappa0;
        const double inv_km2 =
            inner_scale > 0.0 ? (inner_scale / 5.92) * (inner_scale / 5.92) : 0.0;

        struct Wave {
            double kx, ky;
            std::complex<double> c;
        };
        std::vector<Wave> waves;
        if (filter->subdivide_low_bins) {
            constexpr int r = detail::kSubdivideRadius;
            const double dks = dk / 3.0;
            for (int jy = -r; jy <= r; ++jy) {
                for (int jx = -r; jx <= r; ++jx) {
                    if (jx == 0 && jy == 0) continue; // central cell: subharmonics
                    for (int sy = -1; sy <= 1; ++sy) {
                        for (int sx = -1; sx <= 1; ++sx) {
                            double g0, g1;
                            gen.next_gaussian_pair(g0, g1);
                            const auto cell = detail::vk_cell_stat(
                                jx * dk + sx * dks, jy * dk + sy * dks, dks, kappa0_2, inv_km2);
                            const double s = amp * std::sqrt(cell.variance);
                            waves.push_back({cell.kx, cell.ky, {g0 * s, g1 * s}});
                        }
                    }
                }
            }
        }
        for (int level = 1; level <= subharmonic_levels; ++level) {
            const double dkp = dk / std::pow(3.0, level);
            for (int j = -1; j <= 1; ++j) {
                for (int i = -1; i <= 1; ++i) {
                    double g0, g1;
                    gen.next_gaussian_pair(g0, g1);
                    if (i == 0 && j == 0) continue; // covered by the next level
                    const auto cell =
                        detail::vk_cell_stat(i * dkp, j * dkp, dkp, kappa0_2, inv_km2);
                    const double s = amp * std::sqrt(cell.variance);
                    waves.push_back({cell.kx, cell.ky, {g0 * s, g1 * s}});
                }
            }
        }
        const int nw = static_cast<int>(waves.size());
        if (nw > 0) {
            Eigen::MatrixXd ar(n, nw), ai(n, nw), br(n, nw), bi(n, nw);
            for (int w = 0; w < nw; ++w) {
                for (int i = 0; i < n; ++i) {
                    const double x = (i - n / 2) * dx;
                    const std::complex<double> a =
                        waves[w].c * std::complex<double>(std::cos(waves[w].kx * x),
                                                          std::sin(waves[w].kx * x));
                    ar(i, w) = a.real();
                    ai(i, w) = a.imag();
                    br(i, w) = std::cos(waves[w].ky * x);
                    bi(i, w) = std::sin(waves[w].ky * x);
                }
            }
            // phase(iy, ix) += Re(sum_w a_w(ix) * b_w(iy))
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> ph(
                out.phase.data(), n, n);
            ph.noalias() += br * ar.transpose();
            ph.noalias() -= bi * ai.transpose();
        }
    }

    // Remove piston exactly.
    const double mean =
        numerics::pairwise_sum(std::span<const double>(out.phase)) / static_cast<double>(out.phase.size());
    for (auto& v : out.phase) v -= mean;
    return out;
}

// Multiply a field by exp(i * phase). Grids must match.
inline void apply_phase_screen(ComplexField& field, const PhaseScreen& screen) {
    if (screen.n != field.n())
        throw SimulationError("phase screen grid size does not match the field");
    if (std::abs(screen.dx - field.dx()) > 1e-9 * field.dx())
        throw SimulationError("phase screen pitch does not match the field");
    auto s = field.samples();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double ph = screen.phase[i];
        s[i] *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
}

enum class StructureAxis { Both, X, Y };

// Ensemble/spatial average of (phi(x + r) - phi(x))^2 at the requested
// separations, which must be multiples of the grid pitch. No periodic
// wrap-around is used (subharmonic-augmented screens are not periodic).
inline std::vector<double> phase_structure_function(const std::vector<PhaseScreen>& screens,
                                                    const std::vector<double>& separations,
                                                    StructureAxis axis = StructureAxis::Both) {
    if (screens.size() < 2)
        throw SimulationError("structure function needs an ensemble of at least 2 screens");
    const int n = screens.front().n;
    const double dx = screens.front().dx;
    for (const auto& s : screens) {
        if (s.n != n || s.dx != dx)
            throw SimulationError("structure function needs screens on a common grid");
    }

    std::vector<double> out;
    out.reserve(separations.size());
    for (double r : separations) {
        const double m_real = r / dx;
        const int m = static_cast<int>(std::lround(m_real));
        if (std::abs(m_real - m) > 1e-6)
            throw SimulationError("separation is not a multiple of the grid pitch");
        if (m < 0 || m >= n) throw SimulationError("separation beyond the screen grid");
        if (m == 0) {
            out.push_back(0.0);
            continue;
        }
        double acc = 0.0;
        std::uint64_t count = 0;
        for (const auto& s : screens) {
            if (axis == StructureAxis::Both || axis == StructureAxis::X) {
                for (int iy = 0; iy < n; ++iy) {
                    for (int ix = 0; ix + m < n; ++ix) {
                        const double d = s.at(ix + m, iy) - s.at(ix, iy);
                        acc += d * d;
                    }
                }
                count += static_cast<std::uint64_t>(n) * (n - m);
            }
            if (axis == StructureAxis::Both || axis == StructureAxis::Y) {
                for (int iy = 0; iy + m < n; ++iy) {
                    for (int ix = 0; ix < n; ++ix) {
                        const double d = s.at(ix, iy + m) - s.at(ix, iy);
                        acc += d * d;
                    }
                }
                count += static_cast<std::uint64_t>(n) * (n - m);
            }
        }
        out.push_back(acc / static_cast<double>(count));
    }
    return out;
}

} // namespace fsolink
