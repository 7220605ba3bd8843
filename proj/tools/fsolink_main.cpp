// fsolink command-line tool: free-space coherent-link simulations with
// deterministic, file-based outputs.
//
// Exit codes: 0 success, 2 configuration error, 3 simulation error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "fsolink/runner.hpp"

namespace {

int resolve_threads(int flag_value, bool flag_given) {
    int t = flag_value;
    if (!flag_given) {
        if (const char* env = std::getenv("FSOLINK_THREADS")) {
            try {
                t = std::stoi(env);
            } catch (...) {
                t = 0;
            }
        }
    }
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, t);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"free-space coherent-link simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int trials = 0;
    int threads = 0;
    bool threads_given = false;

    auto add_common = [&](CLI::App* sub, bool with_trials, bool with_threads) {
        sub->add_option("--config", config_path, "JSON config file (defaults when omitted)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the master seed")
            ->each([&](const std::string&) { seed_given = true; });
        if (with_trials)
            sub->add_option("--trials", trials, "override the trial count")
                ->check(CLI::PositiveNumber);
        if (with_threads)
            sub->add_option("--threads", threads, "worker threads (0 = auto)")
                ->each([&](const std::string&) { threads_given = true; });
    };

    CLI::App* lb = app.add_subcommand("link-budget", "Monte Carlo downlink loss decomposition");
    add_common(lb, true, true);
    CLI::App* sweep = app.add_subcommand("sweep-detector", "photodiode design sweep over diameter");
    add_common(sweep, false, false);
    CLI::App* screen = app.add_subcommand("phase-screen", "dump one phase screen as CSV");
    add_common(screen, false, false);
    CLI::App* shot = app.add_subcommand("shot-noise", "homodyne shot-noise calibration curve");
    add_common(shot, false, false);

    CLI11_PARSE(app, argc, argv);

    fsolink::CliOverrides ov;
    if (seed_given) ov.seed = seed;
    if (trials > 0) ov.trials = trials;
    ov.threads = resolve_threads(threads, threads_given);

    try {
        if (app.got_subcommand(lb)) {
            fsolink::run_link_budget(config_path, out_dir, ov);
            std::ifstream summary(std::filesystem::path(out_dir) / "summary.txt");
            std::cout << summary.rdbuf();
        } else if (app.got_subcommand(sweep)) {
            fsolink::run_detector_sweep(config_path, out_dir, ov);
        } else if (app.got_subcommand(screen)) {
            fsolink::run_phase_screen(config_path, out_dir, ov);
        } else if (app.got_subcommand(shot)) {
            fsolink::run_shot_noise(config_path, out_dir, ov);
        }
    } catch (const fsolink::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fsolink::SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
