#pragma once

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "fsolink/config.hpp"

// The operations behind the CLI subcommands: load a config, run, write the
// output files. Kept header-side so the test suites drive the exact code the
// tool ships. All file content is byte-deterministic for a given config and
// seed: fixed key order in JSON, fixed %.17g float formatting in CSV, no
// timestamps or environment echoes.
namespace fsolink {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int threads = 1;
};

namespace detail_run {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimulationError("cannot write output file '" + path.string() + "'");
    out << content;
}

inline nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace detail_run

// Diagnostics and the dB decomposition in a form humans read first.
inline std::string link_budget_summary(const ScenarioConfig& cfg, const LinkBudgetReport& rep) {
    using detail_run::fmt;
    std::ostringstream os;
    os << "link budget: " << fmt(cfg.range / 1e3) << " km at " << fmt(cfg.elevation_deg)
       << " deg elevation, " << cfg.n_trials << " trials, seed " << cfg.master_seed << "\n";
    os << "beam 1/e^2 radius at the receiver: " << fmt(rep.beam_radius_ground) << " m\n";
    if (std::isfinite(rep.path_r0))
        os << "path r0: " << fmt(rep.path_r0 * 100.0) << " cm, focal spot scale "
           << fmt(rep.focal_spot_scale * 1e6) << " um\n";
    else
        os << "path r0: infinite (turbulence off)\n";
    os << "diffraction loss: " << fmt(rep.diffraction_loss_db)
       << " dB (aperture fraction " << fmt(rep.baseline_aperture_fraction)
       << ", closed-form " << fmt(rep.closed_form_aperture_fraction) << ")\n";
    for (const auto& t : rep.targets) {
        os << t.target.label() << ": turbulence loss " << fmt(t.turbulence_loss_db) << " dB (+/- "
           << fmt(t.turbulence_loss_db_stderr) << "), total " << fmt(t.total_loss_db)
           << " dB, baseline coupling " << fmt(t.baseline_eta) << "\n";
    }
    return os.str();
}

inline nlohmann::json link_budget_report_json(const RunConfig& rc, const ScenarioGeometry& g,
                                              const LinkBudgetReport& rep) {
    using detail_run::finite_or_null;
    nlohmann::json j;
    j["config"] = to_json(rc);
    j["geometry"] = {
        {"beam_radius_ground_m", rep.beam_radius_ground},
        {"ground_dx_m", g.ground_dx},
        {"ground_window_m", g.ground_window},
        {"launch_dx_m", g.launch_dx},
        {"magnification", g.magnification},
        {"vacuum_leg_m", g.vacuum_leg},
        {"path_r0_m", finite_or_null(g.path_r0)},
        {"focal_spot_scale_m", g.focal_spot_scale},
    };
    nlohmann::json slices = nlohmann::json::array();
    for (const auto& s : g.slicing.slices) {
        slices.push_back({{"altitude_lo_m", s.altitude_lo},
                          {"altitude_hi_m", s.altitude_hi},
                          {"path_thickness_m", s.path_thickness},
                          {"integrated_cn2_m13", s.integrated_cn2},
                          {"r0_m", finite_or_null(s.r0)}});
    }
    j["geometry"]["slices"] = slices;
    j["diffraction"] = {
        {"loss_db", rep.diffraction_loss_db},
        {"aperture_fraction", rep.baseline_aperture_fraction},
        {"closed_form_fraction", rep.closed_form_aperture_fraction},
    };
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : rep.targets) {
        targets.push_back({{"label", t.target.label()},
                           {"baseline_eta", t.baseline_eta},
                           {"mean_eta", t.mean_eta},
                           {"mean_eta_stderr", t.mean_eta_stderr},
                           {"turbulence_loss_db", t.turbulence_loss_db},
                           {"turbulence_loss_db_stderr", t.turbulence_loss_db_stderr},
                           {"mean_of_db_loss", t.mean_of_db_loss},
                           {"total_loss_db", t.total_loss_db}});
    }
    j["targets"] = targets;
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& tr : rep.trials) {
        nlohmann::json t = {{"trial", tr.trial},
                            {"seed", tr.seed},
                            {"aperture_fraction", tr.aperture_fraction}};
        t["eta"] = tr.eta;
        trials.push_back(t);
    }
    j["trials"] = trials;
    j["photodiode_si"] = photodiode_si_json(photodiode_from(rc));
    j["amplifier_si"] = {{"nep_w_rthz", rc.amp_nep_w_rthz},
                         {"bandwidth_hz", rc.amp_bandwidth_mhz * 1e6}};
    return j;
}

inline std::string trials_csv(const ScenarioConfig& cfg, const LinkBudgetReport& rep) {
    using detail_run::fmt;
    std::ostringstream os;
    os << "trial,seed,aperture_fraction";
    for (const auto& t : cfg.targets) os << ",eta_" << t.label();
    for (const auto& t : cfg.targets) os << ",loss_db_" << t.label();
    os << "\n";
    for (const auto& tr : rep.trials) {
        os << tr.trial << "," << tr.seed << "," << fmt(tr.aperture_fraction);
        for (double e : tr.eta) os << "," << fmt(e);
        for (std::size_t k = 0; k < tr.eta.size(); ++k) {
            const double base = rep.targets[k].baseline_eta;
            os << "," << fmt(-10.0 * std::log10(tr.eta[k] / base) + 0.0);
        }
        os << "\n";
    }
    return os.str();
}

inline void run_link_budget(const std::string& config_path, const std::string& out_dir,
                            const CliOverrides& ov) {
    RunConfig rc = load_run_config(config_path);
    if (ov.seed) rc.master_seed = *ov.seed;
    if (ov.trials) rc.n_trials = *ov.trials;
    ScenarioConfig cfg = scenario_from(rc);
    try {
        cfg.validate();
    } catch (const SimulationError& e) {
        throw ConfigError(e.what());
    }

    const ScenarioGeometry g = prepare_scenario(cfg);
    const LinkBudgetReport rep = monte_carlo_link_budget(cfg, ov.threads);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    detail_run::write_file(dir / "report.json",
                           link_budget_report_json(rc, g, rep).dump(2) + "\n");
    detail_run::write_file(dir / "trials.csv", trials_csv(cfg, rep));
    detail_run::write_file(dir / "summary.txt", link_budget_summary(cfg, rep));
}

inline void run_detector_sweep(const std::string& config_path, const std::string& out_dir,
                               const CliOverrides& ov) {
    (void)ov;
    const RunConfig rc = load_run_config(config_path);
    const PhotodiodeSpec pd = photodiode_from(rc);
    const AmplifierSpec amp = amplifier_from(rc);
    const auto rows = sweep_detector_designs(pd, amp, sweep_diameters_from(rc),
                                             rc.lo_power_uw * 1e-6, rc.wavelength_nm * 1e-9,
                                             rc.duty);

    using detail_run::fmt;
    std::ostringstream os;
    os << "diameter_mm,bandwidth_hz,nep_diode_w_rthz,nep_total_w_rthz,v_ele_snu,max_clock_hz\n";
    for (const auto& r : rows) {
        os << fmt(r.diameter * 1e3) << "," << fmt(r.bandwidth) << "," << fmt(r.nep_diode) << ","
           << fmt(r.nep_total) << "," << fmt(r.v_ele) << "," << fmt(r.max_clock) << "\n";
    }
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    detail_run::write_file(dir / "sweep.csv", os.str());

    nlohmann::json meta;
    meta["config"] = to_json(rc);
    meta["photodiode_si"] = photodiode_si_json(pd);
    meta["amplifier_si"] = {{"nep_w_rthz", amp.nep}, {"bandwidth_hz", amp.bandwidth}};
    meta["lo_power_w"] = rc.lo_power_uw * 1e-6;
    detail_run::write_file(dir / "sweep_params.json", meta.dump(2) + "\n");
}

inline void run_phase_screen(const std::string& config_path, const std::string& out_dir,
                             const CliOverrides& ov) {
    RunConfig rc = load_run_config(config_path);
    if (ov.seed) rc.master_seed = *ov.seed;

    double r0 = rc.screen_r0_cm * 1e-2;
    if (r0 == 0.0) {
        const ScenarioConfig cfg = scenario_from(rc);
        r0 = fried_parameter(cfg.profile, cfg.launch.wavelength, cfg.elevation_deg,
                             cfg.atmosphere_top);
    }
    const PhaseScreen screen = generate_phase_screen(
        r0, rc.outer_scale_m, rc.inner_scale_cm * 1e-2, static_cast<int>(rc.screen_n),
        rc.screen_dx_cm * 1e-2, rc.master_seed, static_cast<int>(rc.subharmonic_levels));

    using detail_run::fmt;
    std::ostringstream os;
    for (int iy = 0; iy < screen.n; ++iy) {
        for (int ix = 0; ix < screen.n; ++ix) {
            if (ix) os << ",";
            os << fmt(screen.at(ix, iy));
        }
        os << "\n";
    }
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    detail_run::write_file(dir / "screen.csv", os.str());

    nlohmann::json meta;
    meta["n"] = screen.n;
    meta["dx_m"] = screen.dx;
    meta["r0_m"] = detail_run::finite_or_null(screen.r0);
    meta["outer_scale_m"] = screen.outer_scale;
    meta["inner_scale_m"] = screen.inner_scale;
    meta["seed"] = screen.seed;
    meta["subharmonic_levels"] = rc.subharmonic_levels;
    detail_run::write_file(dir / "screen_meta.json", meta.dump(2) + "\n");
}

inline void run_shot_noise(const std::string& config_path, const std::string& out_dir,
                           const CliOverrides& ov) {
    RunConfig rc = load_run_config(config_path);
    if (ov.seed) rc.master_seed = *ov.seed;
    HomodyneConfig h = homodyne_from(rc);
    try {
        h.validate();
    } catch (const SimulationError& e) {
        throw ConfigError(e.what());
    }
    const ShotNoiseCurve curve = shot_noise_calibration_curve(h, rc.lo_levels_photons);

    using detail_run::fmt;
    std::ostringstream os;
    os << "lo_photons,raw_variance,normalized_variance,ele_ratio\n";
    for (const auto& p : curve.points) {
        os << fmt(p.lo_photons) << "," << fmt(p.raw_variance) << ","
           << fmt(p.normalized_variance) << "," << fmt(p.ele_ratio) << "\n";
    }
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    detail_run::write_file(dir / "shot_noise.csv", os.str());

    nlohmann::json meta;
    meta["config"] = to_json(rc);
    meta["fit_slope"] = curve.fit_slope;
    meta["fit_intercept"] = curve.fit_intercept;
    meta["fit_intercept_stderr"] = curve.fit_intercept_stderr;
    meta["r_squared"] = curve.r_squared;
    meta["lo_off_raw_variance"] = curve.lo_off_raw_variance;
    meta["raw_electronic_variance"] = curve.raw_electronic_variance;
    detail_run::write_file(dir / "shot_noise_fit.json", meta.dump(2) + "\n");
}

} // namespace fsolink
