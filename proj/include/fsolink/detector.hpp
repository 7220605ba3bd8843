#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fsolink/constants.hpp"
#include "fsolink/errors.hpp"

// Photodiode equivalent-circuit model: area-dependent bandwidth, saturation
// and dark current, noise-equivalent power, electronic noise variance, and
// design sweeps over the diode diameter. Strictly SI units; the config layer
// owns all unit conversions.
namespace fsolink {

struct PhotodiodeSpec {
    double diameter = 1e-3;              // d, m
    double load_resistance = 50.0;       // R_L, ohm
    double electron_mobility = 1.0;      // mu, m^2/(V s)
    double resistivity = 0.142e-2;       // rho, ohm m
    double built_in_voltage = 0.77;      // V_A, V
    double bias_voltage = 6.0;           // V_bi, V
    double dielectric_constant = 13.9;   // eps (relative)
    double intrinsic_concentration = 6.3e17; // n_i, m^-3
    double acceptor_concentration = 1.2e37;  // N_A, m^-3
    double temperature = 300.0;          // T, K
    double minority_mobility = 250e-4;   // mu_n, m^2/(V s)
    double minority_lifetime = 270e-15;  // tau_n, s
    double base_thickness = 0.55;        // t, m
    double diffusion_length = 14e-9;     // L_n, m
    double quantum_efficiency = 0.95;    // gamma
    // Voltage in the dark-current exponential. Kept as its own knob because
    // conventions differ on whether the built-in potential or the applied
    // bias drives it; defaults to V_A.
    double exponent_voltage = 0.77;      // V

    // The default set above is the shipped reference diode. Several entries
    // (0.55 m base thickness, 14 nm diffusion length, 1.2e37 m^-3 acceptor
    // density) are physically odd but are preserved verbatim from the
    // reference parameter list; see README.

    double area() const { return constants::pi * 0.25 * diameter * diameter; }

    void validate() const {
        auto pos = [](double v, const char* what) {
            if (!(v > 0.0)) throw SimulationError(std::string("photodiode ") + what +
                                                  " must be positive");
        };
        pos(diameter, "diameter");
        pos(load_resistance, "load resistance");
        pos(electron_mobility, "electron mobility");
        pos(resistivity, "resistivity");
        pos(built_in_voltage, "built-in voltage");
        pos(bias_voltage, "bias voltage");
        pos(dielectric_constant, "dielectric constant");
        pos(intrinsic_concentration, "intrinsic concentration");
        pos(acceptor_concentration, "acceptor concentration");
        pos(temperature, "temperature");
        pos(minority_mobility, "minority mobility");
        pos(minority_lifetime, "minority lifetime");
        pos(base_thickness, "base thickness");
        pos(diffusion_length, "diffusion length");
        if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
            throw SimulationError("quantum efficiency must be in (0, 1]");
        if (!(exponent_voltage >= 0.0))
            throw SimulationError("exponent voltage must be non-negative");
    }
};

struct AmplifierSpec {
    double nep = 5e-12;       // W/sqrt(Hz)
    double bandwidth = 10e6;  // Hz

    void validate() const {
        if (!(nep > 0.0)) throw SimulationError("amplifier NEP must be positive");
        if (!(bandwidth > 0.0)) throw SimulationError("amplifier bandwidth must be positive");
    }
};

// Depletion width W = sqrt(2 eps eps0 mu rho (V_A + V_bi)).
inline double depletion_width(const PhotodiodeSpec& pd) {
    return std::sqrt(2.0 * pd.dielectric_constant * constants::vacuum_permittivity *
                     pd.electron_mobility * pd.resistivity *
                     (pd.built_in_voltage + pd.bias_voltage));
}

// Junction capacitance C_j = eps eps0 A / W.
inline double junction_capacitance(const PhotodiodeSpec& pd) {
    return pd.dielectric_constant * constants::vacuum_permittivity * pd.area() /
           depletion_width(pd);
}

// RC bandwidth via the expanded form B = 1/(pi R_L A) sqrt(mu rho (V_A+V_bi) / (2 eps eps0)).
inline double junction_bandwidth(const PhotodiodeSpec& pd) {
    pd.validate();
    return 1.0 / (constants::pi * pd.load_resistance * pd.area()) *
           std::sqrt(pd.electron_mobility * pd.resistivity *
                     (pd.built_in_voltage + pd.bias_voltage) /
                     (2.0 * pd.dielectric_constant * constants::vacuum_permittivity));
}

// Same bandwidth through the capacitance route, B = 1/(2 pi R_L C_j);
// agrees with junction_bandwidth to rounding and serves as the cross-check.
inline double junction_bandwidth_from_rc(const PhotodiodeSpec& pd) {
    pd.validate();
    return 1.0 / (2.0 * constants::pi * pd.load_resistance * junction_capacitance(pd));
}

// Saturation current I_0 = q A n_i^2 / N_A * sqrt(k T mu_n / (q tau_n)) * tanh(t / L_n).
inline double saturation_current(const PhotodiodeSpec& pd) {
    pd.validate();
    const double q = constants::electron_charge;
    return q * pd.area() * pd.intrinsic_concentration * pd.intrinsic_concentration /
           pd.acceptor_concentration *
           std::sqrt(constants::boltzmann * pd.temperature * pd.minority_mobility /
                     (q * pd.minority_lifetime)) *
           std::tanh(pd.base_thickness / pd.diffusion_length);
}

// Dark current I_0 (exp(q V / k T) - 1) with the configurable exponent voltage.
inline double dark_current(const PhotodiodeSpec& pd) {
    const double q = constants::electron_charge;
    return saturation_current(pd) *
           std::expm1(q * pd.exponent_voltage / (constants::boltzmann * pd.temperature));
}

// Diode NEP = I_dark / (gamma sqrt(B)), W/sqrt(Hz).
inline double diode_nep(const PhotodiodeSpec& pd, double bandwidth) {
    if (!(bandwidth > 0.0)) throw SimulationError("bandwidth must be positive");
    return dark_current(pd) / (pd.quantum_efficiency * std::sqrt(bandwidth));
}

// Electronic noise variance in shot-noise units:
// V_ele = NEP^2 B tau / (h nu I_lo), nu = c / lambda.
// nep_total is the combined diode + amplifier NEP (arithmetic sum).
inline double electronic_noise_variance(double nep_total, double bandwidth, double pulse_width,
                                        double lo_power, double wavelength) {
    if (!(nep_total >= 0.0)) throw SimulationError("NEP must be non-negative");
    if (!(bandwidth > 0.0) || !(pulse_width > 0.0) || !(lo_power > 0.0) || !(wavelength > 0.0))
        throw SimulationError("electronic_noise_variance needs positive B, tau, I_lo, lambda");
    const double nu = constants::speed_of_light / wavelength;
    return nep_total * nep_total * bandwidth * pulse_width / (constants::planck * nu * lo_power);
}

// Back-solve the variance relation for the total NEP that produces a target
// V_ele at the given operating point.
inline double nep_for_electronic_variance(double v_ele, double bandwidth, double pulse_width,
                                          double lo_power, double wavelength) {
    if (!(v_ele >= 0.0)) throw SimulationError("target variance must be non-negative");
    const double nu = constants::speed_of_light / wavelength;
    return std::sqrt(v_ele * constants::planck * nu * lo_power / (bandwidth * pulse_width));
}

// LO power from photons per pulse: I_lo = N h nu / tau.
inline double lo_power_from_photons(double photons_per_pulse, double wavelength,
                                    double pulse_width) {
    if (!(pulse_width > 0.0)) throw SimulationError("pulse width must be positive");
    const double nu = constants::speed_of_light / wavelength;
    return photons_per_pulse * constants::planck * nu / pulse_width;
}

struct DetectorSweepRow {
    double diameter = 0.0;   // m
    double bandwidth = 0.0;  // Hz, diode junction bandwidth
    double nep_diode = 0.0;  // W/sqrt(Hz)
    double nep_total = 0.0;  // W/sqrt(Hz), diode + amplifier
    double v_ele = 0.0;      // shot-noise units
    double max_clock = 0.0;  // Hz, min(B_diode, B_amp) / 3
};

// Evaluate the design trade-off across diode diameters. The pulse width
// follows the clocking convention tau = duty / B (duty 0.3: repetition rate
// B/3 with 10% duty-cycle pulses), which makes V_ele independent of B.
inline std::vector<DetectorSweepRow> sweep_detector_designs(
    const PhotodiodeSpec& base, const AmplifierSpec& amp, const std::vector<double>& diameters,
    double lo_power, double wavelength, double duty = 0.3) {
    base.validate();
    amp.validate();
    if (diameters.empty()) throw SimulationError("detector sweep needs at least one diameter");
    if (!std::is_sorted(diameters.begin(), diameters.end()))
        throw SimulationError("detector sweep diameters must be ascending");
    if (!(diameters.front() > 0.0)) throw SimulationError("diameters must be positive");
    if (!(duty > 0.0)) throw SimulationError("duty must be positive");

    std::vector<DetectorSweepRow> rows;
    rows.reserve(diameters.size());
    for (double d : diameters) {
        PhotodiodeSpec pd = base;
        pd.diameter = d;
        DetectorSweepRow row;
        row.diameter = d;
        row.bandwidth = junction_bandwidth(pd);
        row.nep_diode = diode_nep(pd, row.bandwidth);
        row.nep_total = row.nep_diode + amp.nep;
        row.max_clock = std::min(row.bandwidth, amp.bandwidth) / 3.0;
        const double tau = duty / row.bandwidth;
        row.v_ele = electronic_noise_variance(row.nep_total, row.bandwidth, tau, lo_power,
                                              wavelength);
        rows.push_back(row);
    }
    return rows;
}

} // namespace fsolink
