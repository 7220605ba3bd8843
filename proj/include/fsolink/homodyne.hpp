#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fsolink/errors.hpp"
#include "fsolink/random.hpp"

// Monte Carlo model of the homodyne detector output and the shot-noise
// calibration curve: output variance vs LO level, linearity, and the
// electronic-noise intercept.
//
// Conventions: the vacuum quadrature has unit variance (1 SNU), so the raw
// output HD = 2 sqrt(N_lo) (x_s + x_0) + x_e has Var(HD)/(4 N_lo) =
// V_mod + 1 + V_ele with V_ele expressed in SNU at the operating LO level.
// The raw electronic variance 4 N_lo V_ele is an LO-independent property of
// the electronics and is what stays fixed across a calibration sweep.
namespace fsolink {

struct HomodyneConfig {
    double lo_photons = 5e8;        // N_lo per pulse
    double pulse_width = 30e-9;     // tau, s
    double wavelength = 1550e-9;    // m
    double signal_variance = 0.0;   // V_mod, SNU (0 for calibration)
    double electronic_variance = 0.0; // V_ele, SNU at lo_photons
    std::uint64_t samples = 1000000;  // M
    std::uint64_t seed = 1;

    void validate() const {
        if (!(lo_photons >= 0.0)) throw SimulationError("LO photon number must be non-negative");
        if (!(pulse_width > 0.0)) throw SimulationError("pulse width must be positive");
        if (!(wavelength > 0.0)) throw SimulationError("wavelength must be positive");
        if (!(signal_variance >= 0.0)) throw SimulationError("V_mod must be non-negative");
        if (!(electronic_variance >= 0.0)) throw SimulationError("V_ele must be non-negative");
        if (samples < 2) throw SimulationError("need at least 2 samples");
    }
};

// LO-independent raw electronic variance implied by a config.
inline double raw_electronic_variance(const HomodyneConfig& cfg) {
    return 4.0 * cfg.lo_photons * cfg.electronic_variance;
}

struct HomodyneBatchStats {
    double mean = 0.0;
    double variance = 0.0;            // raw units, unbiased
    double normalized_variance = 0.0; // variance / (4 N_lo); 0 when the LO is off
    std::uint64_t samples = 0;

    // 1-sigma uncertainty of the variance estimate (Gaussian samples).
    double variance_stderr() const {
        return variance * std::sqrt(2.0 / static_cast<double>(samples - 1));
    }
};

namespace detail {
inline HomodyneBatchStats run_homodyne_batch(double lo_photons, double v_mod, double raw_ele,
                                             std::uint64_t samples, std::uint64_t seed) {
    rng::Xoshiro256pp gen(seed);
    const double sig_gain = 2.0 * std::sqrt(lo_photons);
    const double s_mod = std::sqrt(v_mod);
    const double s_ele = std::sqrt(raw_ele);

    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double x0 = gen.next_gaussian();
        const double xs = s_mod != 0.0 ? s_mod * gen.next_gaussian() : 0.0;
        const double xe = s_ele != 0.0 ? s_ele * gen.next_gaussian() : 0.0;
        const double hd = sig_gain * (xs + x0) + xe;
        const double delta = hd - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (hd - mean);
    }
    HomodyneBatchStats st;
    st.mean = mean;
    st.variance = m2 / static_cast<double>(samples - 1);
    st.normalized_variance = lo_photons > 0.0 ? st.variance / (4.0 * lo_photons) : 0.0;
    st.samples = samples;
    return st;
}
} // namespace detail

// One Monte Carlo batch at the configured LO level. Deterministic in the seed.
inline HomodyneBatchStats simulate_homodyne_batch(const HomodyneConfig& cfg) {
    cfg.validate();
    return detail::run_homodyne_batch(cfg.lo_photons, cfg.signal_variance,
                                      raw_electronic_variance(cfg), cfg.samples, cfg.seed);
}

struct ShotNoisePoint {
    double lo_photons = 0.0;
    double raw_variance = 0.0;
    double normalized_variance = 0.0; // raw / (4 N_lo)
    double ele_ratio = 0.0;           // configured V_ele expressed in SNU at this level
};

struct ShotNoiseCurve {
    std::vector<ShotNoisePoint> points;
    double fit_slope = 0.0;       // raw variance per photon; 4 (V_mod + 1) ideally
    double fit_intercept = 0.0;   // raw variance at N_lo = 0; the electronic noise
    double fit_intercept_stderr = 0.0;
    double r_squared = 0.0;
    double lo_off_raw_variance = 0.0;     // measured with the LO off
    double raw_electronic_variance = 0.0; // configured value, for reference
};

// Sweep the LO level without signal modulation, fit raw variance vs N_lo.
// The raw electronic variance implied by cfg_base is held fixed across
// levels; per-level seeds derive from (cfg seed, level index).
inline ShotNoiseCurve shot_noise_calibration_curve(const HomodyneConfig& cfg_base,
                                                   const std::vector<double>& lo_levels) {
    cfg_base.validate();
    if (lo_levels.size() < 3) throw SimulationError("calibration needs at least 3 LO levels");
    for (double v : lo_levels)
        if (!(v > 0.0)) throw SimulationError("calibration LO levels must be positive");
    bool all_equal = true;
    for (double v : lo_levels) all_equal = all_equal && v == lo_levels.front();
    if (all_equal) throw SimulationError("calibration LO levels are degenerate (all equal)");

    const double raw_ele = raw_electronic_variance(cfg_base);
    ShotNoiseCurve curve;
    curve.raw_electronic_variance = raw_ele;
    curve.lo_off_raw_variance =
        detail::run_homodyne_batch(0.0, 0.0, raw_ele, cfg_base.samples,
                                   rng::derive_seed(cfg_base.seed, 0))
            .variance;

    curve.points.reserve(lo_levels.size());
    for (std::size_t j = 0; j < lo_levels.size(); ++j) {
        const auto st = detail::run_homodyne_batch(lo_levels[j], cfg_base.signal_variance,
                                                   raw_ele, cfg_base.samples,
                                                   rng::derive_seed(cfg_base.seed, j + 1));
        ShotNoisePoint p;
        p.lo_photons = lo_levels[j];
        p.raw_variance = st.variance;
        p.normalized_variance = st.normalized_variance;
        p.ele_ratio = raw_ele / (4.0 * lo_levels[j]);
        curve.points.push_back(p);
    }

    // Ordinary least squares y = a + b x with residual-based intercept error.
    const double n = static_cast<double>(curve.points.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& p : curve.points) {
        sx += p.lo_photons;
        sy += p.raw_variance;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : curve.points) {
        const double dx = p.lo_photons - mx;
        const double dy = p.raw_variance - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (const auto& p : curve.points) {
        const double r = p.raw_variance - (intercept + slope * p.lo_photons);
        ss_res += r * r;
    }
    curve.fit_slope = std::max(0.0, slope);
    curve.fit_intercept = std::max(0.0, intercept);
    curve.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    const double dof = n > 2.0 ? n - 2.0 : 1.0;
    curve.fit_intercept_stderr = std::sqrt(ss_res / dof * (1.0 / n + mx * mx / sxx));
    return curve;
}

} // namespace fsolink
