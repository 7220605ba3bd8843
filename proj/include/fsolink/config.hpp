#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "fsolink/detector.hpp"
#include "fsolink/errors.hpp"
#include "fsolink/homodyne.hpp"
#include "fsolink/link_budget.hpp"

// Flat, human-editable configuration with unit-annotated key names. Values
// are stored in the user's units (the key says which); the *_from converters
// below produce the SI structs the core works with, so unit conversions live
// in exactly one place. Every field is optional and defaults to the shipped
// 700 km downlink scenario and reference detector.
namespace fsolink {

struct RunConfig {
    // scenario
    double wavelength_nm = 1550.0;
    double beam_diameter_1e2_cm = 7.1; // 1/e^2 intensity diameter at launch
    double launch_power_w = 1.0;
    double range_km = 700.0;
    double elevation_deg = 90.0;
    std::string turbulence_model = "hufnagel-valley"; // or "none"
    double ground_cn2 = 1e-13; // m^(-2/3)
    double wind_rms_ms = 21.0;
    std::int64_t n_slices = 14;
    double atmosphere_top_km = 30.0;
    double outer_scale_m = 25.0;
    double inner_scale_cm = 1.0;
    std::int64_t subharmonic_levels = 3;
    std::string slicing_mode = "equal-strength"; // or "equal-thickness"
    double rx_aperture_cm = 35.5;
    double focal_length_mm = 1600.0;
    double fiber_mfd_um = 10.0;
    double detector_size_mm = 1.0; // side (square) or diameter (circular)
    std::string detector_shape = "square"; // or "circular"
    std::int64_t n_trials = 200;
    std::uint64_t master_seed = 1;
    std::int64_t grid_n = 4096;
    double grid_dx_mm = 0.0; // 0 selects the automatic window rule
    double launch_window_w0 = 8.0;

    // photodiode (reference values; several are physically odd but are the
    // shipped reference set, see README)
    double pd_diameter_mm = 1.0;
    double pd_load_ohm = 50.0;
    double pd_mobility_cm2_vs = 1e4;
    double pd_resistivity_ohm_cm = 0.142;
    double pd_builtin_v = 0.77;
    double pd_bias_v = 6.0;
    double pd_dielectric = 13.9;
    double pd_intrinsic_cm3 = 6.3e11;
    double pd_acceptor_cm3 = 1.2e31;
    double pd_temperature_k = 300.0;
    double pd_minority_mobility_cm2_vs = 250.0;
    double pd_minority_lifetime_fs = 270.0;
    double pd_base_thickness_cm = 55.0;
    double pd_diffusion_length_nm = 14.0;
    double pd_quantum_efficiency = 0.95;
    double pd_exponent_voltage_v = 0.77;

    // amplifier
    double amp_nep_w_rthz = 5e-12;
    double amp_bandwidth_mhz = 10.0;

    // detector sweep
    double sweep_min_diameter_mm = 0.1;
    double sweep_max_diameter_mm = 3.0;
    std::int64_t sweep_n_points = 30;
    double lo_power_uw = 13.0;
    double duty = 0.3;

    // homodyne
    double lo_photons_per_pulse = 5e8;
    double pulse_width_ns = 30.0;
    double v_mod_snu = 0.0;
    double v_ele_snu = 1e-4;
    std::int64_t homodyne_samples = 1000000;
    std::vector<double> lo_levels_photons = {1e8, 2e8, 3e8, 4e8, 5e8,
                                             6e8, 7e8, 8e8, 9e8, 1e9};

    // phase-screen dump
    std::int64_t screen_n = 1024;
    double screen_dx_cm = 1.0;
    double screen_r0_cm = 0.0; // 0 derives the whole-path r0 from the profile
};

namespace detail_cfg {

inline void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

inline void read_double(const nlohmann::json& j, const char* key, double& out,
                        bool require_positive, bool allow_zero = false) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) fail(key, "expected a number");
    const double v = j[key].get<double>();
    if (require_positive && !(v > 0.0) && !(allow_zero && v == 0.0))
        fail(key, allow_zero ? "must be positive or zero" : "must be positive");
    out = v;
}

inline void read_int(const nlohmann::json& j, const char* key, std::int64_t& out,
                     std::int64_t min_value) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) fail(key, "expected an integer");
    const std::int64_t v = j[key].get<std::int64_t>();
    if (v < min_value) fail(key, "must be >= " + std::to_string(min_value));
    out = v;
}

inline void read_u64(const nlohmann::json& j, const char* key, std::uint64_t& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer())
        fail(key, "expected a non-negative integer");
    if (j[key].is_number_integer() && j[key].get<std::int64_t>() < 0)
        fail(key, "expected a non-negative integer");
    out = j[key].get<std::uint64_t>();
}

inline void read_choice(const nlohmann::json& j, const char* key, std::string& out,
                        const std::vector<std::string>& allowed) {
    if (!j.contains(key)) return;
    if (!j[key].is_string()) fail(key, "expected a string");
    const std::string v = j[key].get<std::string>();
    for (const auto& a : allowed)
        if (v == a) {
            out = v;
            return;
        }
    std::string msg = "must be one of:";
    for (const auto& a : allowed) msg += " '" + a + "'";
    fail(key, msg);
}

inline void read_levels(const nlohmann::json& j, const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) fail(key, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& e : j[key]) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        const double x = e.get<double>();
        if (!(x > 0.0)) fail(key, "levels must be positive");
        v.push_back(x);
    }
    if (v.size() < 3) fail(key, "need at least 3 levels");
    out = std::move(v);
}

} // namespace detail_cfg

inline const std::set<std::string>& known_config_keys() {
    static const std::set<std::string> keys = {
        "wavelength_nm", "beam_diameter_1e2_cm", "launch_power_w", "range_km", "elevation_deg",
        "turbulence_model", "ground_cn2", "wind_rms_ms", "n_slices", "atmosphere_top_km",
        "outer_scale_m", "inner_scale_cm", "subharmonic_levels", "slicing_mode",
        "rx_aperture_cm", "focal_length_mm", "fiber_mfd_um", "detector_size_mm",
        "detector_shape", "n_trials", "master_seed", "grid_n", "grid_dx_mm",
        "launch_window_w0", "pd_diameter_mm", "pd_load_ohm", "pd_mobility_cm2_vs",
        "pd_resistivity_ohm_cm", "pd_builtin_v", "pd_bias_v", "pd_dielectric",
        "pd_intrinsic_cm3", "pd_acceptor_cm3", "pd_temperature_k",
        "pd_minority_mobility_cm2_vs", "pd_minority_lifetime_fs", "pd_base_thickness_cm",
        "pd_diffusion_length_nm", "pd_quantum_efficiency", "pd_exponent_voltage_v",
        "amp_nep_w_rthz", "amp_bandwidth_mhz", "sweep_min_diameter_mm", "sweep_max_diameter_mm",
        "sweep_n_points", "lo_power_uw", "duty", "lo_photons_per_pulse", "pulse_width_ns",
        "v_mod_snu", "v_ele_snu", "homodyne_samples", "lo_levels_photons", "screen_n",
        "screen_dx_cm", "screen_r0_cm"};
    return keys;
}

inline RunConfig parse_run_config(const nlohmann::json& j) {
    using namespace detail_cfg;
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known_config_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    RunConfig c;
    read_double(j, "wavelength_nm", c.wavelength_nm, true);
    read_double(j, "beam_diameter_1e2_cm", c.beam_diameter_1e2_cm, true);
    read_double(j, "launch_power_w", c.launch_power_w, true, true);
    read_double(j, "range_km", c.range_km, true);
    read_double(j, "elevation_deg", c.elevation_deg, true);
    read_choice(j, "turbulence_model", c.turbulence_model, {"hufnagel-valley", "none"});
    read_double(j, "ground_cn2", c.ground_cn2, true, true);
    read_double(j, "wind_rms_ms", c.wind_rms_ms, true, true);
    read_int(j, "n_slices", c.n_slices, 1);
    read_double(j, "atmosphere_top_km", c.atmosphere_top_km, true);
    read_double(j, "outer_scale_m", c.outer_scale_m, true);
    read_double(j, "inner_scale_cm", c.inner_scale_cm, true, true);
    read_int(j, "subharmonic_levels", c.subharmonic_levels, 0);
    read_choice(j, "slicing_mode", c.slicing_mode, {"equal-strength", "equal-thickness"});
    read_double(j, "rx_aperture_cm", c.rx_aperture_cm, true);
    read_double(j, "focal_length_mm", c.focal_length_mm, true);
    read_double(j, "fiber_mfd_um", c.fiber_mfd_um, true);
    read_double(j, "detector_size_mm", c.detector_size_mm, true);
    read_choice(j, "detector_shape", c.detector_shape, {"square", "circular"});
    read_int(j, "n_trials", c.n_trials, 1);
    read_u64(j, "master_seed", c.master_seed);
    read_int(j, "grid_n", c.grid_n, 2);
    read_double(j, "grid_dx_mm", c.grid_dx_mm, true, true);
    read_double(j, "launch_window_w0", c.launch_window_w0, true);

    read_double(j, "pd_diameter_mm", c.pd_diameter_mm, true);
    read_double(j, "pd_load_ohm", c.pd_load_ohm, true);
    read_double(j, "pd_mobility_cm2_vs", c.pd_mobility_cm2_vs, true);
    read_double(j, "pd_resistivity_ohm_cm", c.pd_resistivity_ohm_cm, true);
    read_double(j, "pd_builtin_v", c.pd_builtin_v, true);
    read_double(j, "pd_bias_v", c.pd_bias_v, true);
    read_double(j, "pd_dielectric", c.pd_dielectric, true);
    read_double(j, "pd_intrinsic_cm3", c.pd_intrinsic_cm3, true);
    read_double(j, "pd_acceptor_cm3", c.pd_acceptor_cm3, true);
    read_double(j, "pd_temperature_k", c.pd_temperature_k, true);
    read_double(j, "pd_minority_mobility_cm2_vs", c.pd_minority_mobility_cm2_vs, true);
    read_double(j, "pd_minority_lifetime_fs", c.pd_minority_lifetime_fs, true);
    read_double(j, "pd_base_thickness_cm", c.pd_base_thickness_cm, true);
    read_double(j, "pd_diffusion_length_nm", c.pd_diffusion_length_nm, true);
    read_double(j, "pd_quantum_efficiency", c.pd_quantum_efficiency, true);
    read_double(j, "pd_exponent_voltage_v", c.pd_exponent_voltage_v, true, true);

    read_double(j, "amp_nep_w_rthz", c.amp_nep_w_rthz, true);
    read_double(j, "amp_bandwidth_mhz", c.amp_bandwidth_mhz, true);

    read_double(j, "sweep_min_diameter_mm", c.sweep_min_diameter_mm, true);
    read_double(j, "sweep_max_diameter_mm", c.sweep_max_diameter_mm, true);
    read_int(j, "sweep_n_points", c.sweep_n_points, 1);
    read_double(j, "lo_power_uw", c.lo_power_uw, true);
    read_double(j, "duty", c.duty, true);

    read_double(j, "lo_photons_per_pulse", c.lo_photons_per_pulse, true, true);
    read_double(j, "pulse_width_ns", c.pulse_width_ns, true);
    read_double(j, "v_mod_snu", c.v_mod_snu, true, true);
    read_double(j, "v_ele_snu", c.v_ele_snu, true, true);
    read_int(j, "homodyne_samples", c.homodyne_samples, 2);
    read_levels(j, "lo_levels_photons", c.lo_levels_photons);

    read_int(j, "screen_n", c.screen_n, 2);
    read_double(j, "screen_dx_cm", c.screen_dx_cm, true);
    read_double(j, "screen_r0_cm", c.screen_r0_cm, true, true);

    if (c.sweep_max_diameter_mm < c.sweep_min_diameter_mm)
        detail_cfg::fail("sweep_max_diameter_mm", "must be >= sweep_min_diameter_mm");
    return c;
}

// Missing path loads the shipped defaults.
inline RunConfig load_run_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["wavelength_nm"] = c.wavelength_nm;
    j["beam_diameter_1e2_cm"] = c.beam_diameter_1e2_cm;
    j["launch_power_w"] = c.launch_power_w;
    j["range_km"] = c.range_km;
    j["elevation_deg"] = c.elevation_deg;
    j["turbulence_model"] = c.turbulence_model;
    j["ground_cn2"] = c.ground_cn2;
    j["wind_rms_ms"] = c.wind_rms_ms;
    j["n_slices"] = c.n_slices;
    j["atmosphere_top_km"] = c.atmosphere_top_km;
    j["outer_scale_m"] = c.outer_scale_m;
    j["inner_scale_cm"] = c.inner_scale_cm;
    j["subharmonic_levels"] = c.subharmonic_levels;
    j["slicing_mode"] = c.slicing_mode;
    j["rx_aperture_cm"] = c.rx_aperture_cm;
    j["focal_length_mm"] = c.focal_length_mm;
    j["fiber_mfd_um"] = c.fiber_mfd_um;
    j["detector_size_mm"] = c.detector_size_mm;
    j["detector_shape"] = c.detector_shape;
    j["n_trials"] = c.n_trials;
    j["master_seed"] = c.master_seed;
    j["grid_n"] = c.grid_n;
    j["grid_dx_mm"] = c.grid_dx_mm;
    j["launch_window_w0"] = c.launch_window_w0;
    j["pd_diameter_mm"] = c.pd_diameter_mm;
    j["pd_load_ohm"] = c.pd_load_ohm;
    j["pd_mobility_cm2_vs"] = c.pd_mobility_cm2_vs;
    j["pd_resistivity_ohm_cm"] = c.pd_resistivity_ohm_cm;
    j["pd_builtin_v"] = c.pd_builtin_v;
    j["pd_bias_v"] = c.pd_bias_v;
    j["pd_dielectric"] = c.pd_dielectric;
    j["pd_intrinsic_cm3"] = c.pd_intrinsic_cm3;
    j["pd_acceptor_cm3"] = c.pd_acceptor_cm3;
    j["pd_temperature_k"] = c.pd_temperature_k;
    j["pd_minority_mobility_cm2_vs"] = c.pd_minority_mobility_cm2_vs;
    j["pd_minority_lifetime_fs"] = c.pd_minority_lifetime_fs;
    j["pd_base_thickness_cm"] = c.pd_base_thickness_cm;
    j["pd_diffusion_length_nm"] = c.pd_diffusion_length_nm;
    j["pd_quantum_efficiency"] = c.pd_quantum_efficiency;
    j["pd_exponent_voltage_v"] = c.pd_exponent_voltage_v;
    j["amp_nep_w_rthz"] = c.amp_nep_w_rthz;
    j["amp_bandwidth_mhz"] = c.amp_bandwidth_mhz;
    j["sweep_min_diameter_mm"] = c.sweep_min_diameter_mm;
    j["sweep_max_diameter_mm"] = c.sweep_max_diameter_mm;
    j["sweep_n_points"] = c.sweep_n_points;
    j["lo_power_uw"] = c.lo_power_uw;
    j["duty"] = c.duty;
    j["lo_photons_per_pulse"] = c.lo_photons_per_pulse;
    j["pulse_width_ns"] = c.pulse_width_ns;
    j["v_mod_snu"] = c.v_mod_snu;
    j["v_ele_snu"] = c.v_ele_snu;
    j["homodyne_samples"] = c.homodyne_samples;
    j["lo_levels_photons"] = c.lo_levels_photons;
    j["screen_n"] = c.screen_n;
    j["screen_dx_cm"] = c.screen_dx_cm;
    j["screen_r0_cm"] = c.screen_r0_cm;
    return j;
}

// SI converters.

inline ScenarioConfig scenario_from(const RunConfig& c) {
    ScenarioConfig s;
    s.launch.waist_radius = 0.5 * c.beam_diameter_1e2_cm * 1e-2;
    s.launch.power = c.launch_power_w;
    s.launch.wavelength = c.wavelength_nm * 1e-9;
    s.range = c.range_km * 1e3;
    s.elevation_deg = c.elevation_deg;
    if (c.turbulence_model == "none") {
        s.profile = HVProfile::none();
    } else {
        s.profile = HVProfile{c.ground_cn2, c.wind_rms_ms};
    }
    s.n_slices = static_cast<int>(c.n_slices);
    s.atmosphere_top = c.atmosphere_top_km * 1e3;
    s.outer_scale = c.outer_scale_m;
    s.inner_scale = c.inner_scale_cm * 1e-2;
    s.subharmonic_levels = static_cast<int>(c.subharmonic_levels);
    s.slicing_mode = c.slicing_mode == "equal-thickness" ? SlicingMode::EqualThickness
                                                         : SlicingMode::EqualStrength;
    s.rx.aperture_diameter = c.rx_aperture_cm * 1e-2;
    s.rx.focal_length = c.focal_length_mm * 1e-3;
    s.targets.clear();
    s.targets.push_back(CouplingTarget::fiber(c.fiber_mfd_um * 1e-6));
    if (c.detector_shape == "circular")
        s.targets.push_back(CouplingTarget::circular_detector(c.detector_size_mm * 1e-3));
    else
        s.targets.push_back(CouplingTarget::square_detector(c.detector_size_mm * 1e-3));
    s.n_trials = static_cast<int>(c.n_trials);
    s.master_seed = c.master_seed;
    s.grid_n = static_cast<int>(c.grid_n);
    s.grid_dx = c.grid_dx_mm * 1e-3;
    s.launch_window_factor = c.launch_window_w0;
    return s;
}

inline PhotodiodeSpec photodiode_from(const RunConfig& c) {
    PhotodiodeSpec pd;
    pd.diameter = c.pd_diameter_mm * 1e-3;
    pd.load_resistance = c.pd_load_ohm;
    pd.electron_mobility = c.pd_mobility_cm2_vs * 1e-4;
    pd.resistivity = c.pd_resistivity_ohm_cm * 1e-2;
    pd.built_in_voltage = c.pd_builtin_v;
    pd.bias_voltage = c.pd_bias_v;
    pd.dielectric_constant = c.pd_dielectric;
    pd.intrinsic_concentration = c.pd_intrinsic_cm3 * 1e6;
    pd.acceptor_concentration = c.pd_acceptor_cm3 * 1e6;
    pd.temperature = c.pd_temperature_k;
    pd.minority_mobility = c.pd_minority_mobility_cm2_vs * 1e-4;
    pd.minority_lifetime = c.pd_minority_lifetime_fs * 1e-15;
    pd.base_thickness = c.pd_base_thickness_cm * 1e-2;
    pd.diffusion_length = c.pd_diffusion_length_nm * 1e-9;
    pd.quantum_efficiency = c.pd_quantum_efficiency;
    pd.exponent_voltage = c.pd_exponent_voltage_v;
    return pd;
}

inline AmplifierSpec amplifier_from(const RunConfig& c) {
    return AmplifierSpec{c.amp_nep_w_rthz, c.amp_bandwidth_mhz * 1e6};
}

inline HomodyneConfig homodyne_from(const RunConfig& c) {
    HomodyneConfig h;
    h.lo_photons = c.lo_photons_per_pulse;
    h.pulse_width = c.pulse_width_ns * 1e-9;
    h.wavelength = c.wavelength_nm * 1e-9;
    h.signal_variance = c.v_mod_snu;
    h.electronic_variance = c.v_ele_snu;
    h.samples = static_cast<std::uint64_t>(c.homodyne_samples);
    h.seed = c.master_seed;
    return h;
}

inline std::vector<double> sweep_diameters_from(const RunConfig& c) {
    std::vector<double> d;
    const int n = static_cast<int>(c.sweep_n_points);
    if (n == 1) {
        d.push_back(c.sweep_min_diameter_mm * 1e-3);
        return d;
    }
    for (int i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / (n - 1);
        d.push_back((c.sweep_min_diameter_mm +
                     frac * (c.sweep_max_diameter_mm - c.sweep_min_diameter_mm)) *
                    1e-3);
    }
    return d;
}

// SI record of the photodiode/amplifier conversion, embedded in reports so
// the unit mapping from the config keys is auditable.
inline nlohmann::json photodiode_si_json(const PhotodiodeSpec& pd) {
    nlohmann::json j;
    j["diameter_m"] = pd.diameter;
    j["load_resistance_ohm"] = pd.load_resistance;
    j["electron_mobility_m2_vs"] = pd.electron_mobility;
    j["resistivity_ohm_m"] = pd.resistivity;
    j["built_in_voltage_v"] = pd.built_in_voltage;
    j["bias_voltage_v"] = pd.bias_voltage;
    j["dielectric_constant"] = pd.dielectric_constant;
    j["intrinsic_concentration_m3"] = pd.intrinsic_concentration;
    j["acceptor_concentration_m3"] = pd.acceptor_concentration;
    j["temperature_k"] = pd.temperature;
    j["minority_mobility_m2_vs"] = pd.minority_mobility;
    j["minority_lifetime_s"] = pd.minority_lifetime;
    j["base_thickness_m"] = pd.base_thickness;
    j["diffusion_length_m"] = pd.diffusion_length;
    j["quantum_efficiency"] = pd.quantum_efficiency;
    j["exponent_voltage_v"] = pd.exponent_voltage;
    return j;
}

} // namespace fsolink
