// beamsim: run experiment configs and bundled presets, plot summaries.
//
//   beamsim run --config <file|preset> [--out DIR] [--seed N] [--trials N] [--budget N]
//   beamsim plot --summary a.csv b.csv ... --out fig.svg
//   beamsim presets
//
// Exit codes: 0 ok, 2 configuration error, 1 anything else.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "beamsim/config.hpp"
#include "beamsim/harness.hpp"
#include "beamsim/oracle.hpp"
#include "beamsim/receiver_math.hpp"

#ifndef BEAMSIM_PRESET_DIR
#define BEAMSIM_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace beamsim;

namespace {

fs::path resolve_config(const std::string& arg) {
    if (fs::exists(arg)) {
        return arg;
    }
    const fs::path preset = fs::path(BEAMSIM_PRESET_DIR) / (arg + ".json");
    if (fs::exists(preset)) {
        return preset;
    }
    throw ConfigError("", "no config file or bundled preset named '" + arg + "'");
}

std::vector<fs::path> list_presets() {
    std::vector<fs::path> out;
    if (!fs::is_directory(BEAMSIM_PRESET_DIR)) {
        return out;
    }
    for (const auto& e : fs::directory_iterator(BEAMSIM_PRESET_DIR)) {
        if (e.path().extension() == ".json") {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct RunArgs {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<std::int64_t> budget;
    unsigned threads = 0;
};

int cmd_run(const RunArgs& args) {
    ConfigFile file = load_config(resolve_config(args.config));
    for (ExperimentConfig& c : file.series) {
        if (args.out) c.output_dir = *args.out;
        if (args.seed) c.master_seed = *args.seed;
        if (args.trials) c.n_trials = *args.trials;
        if (args.budget) c.slot_budget = *args.budget;
        c.validate();
    }

    RunOptions options;
    options.threads = args.threads;
    std::vector<Summary> plotted;
    std::map<std::string, bool> overlaid;  // churn: one rss_max curve per scenario
    for (const ExperimentConfig& c : file.series) {
        const ExperimentResult r = run_experiment(c, options);
        const SummaryRow& last = r.summary.rows.back();
        std::cout << c.series_name << ": " << r.summary.metric << " at slot " << last.slot << " = "
                  << format_double(last.mean) << " (std " << format_double(last.std) << ", "
                  << c.n_trials << " trials) -> " << (fs::path(c.output_dir) / c.series_name).string()
                  << "\n";
        plotted.push_back(r.summary);
        if (r.rss_max_summary) {
            const std::string key = to_json(c)["scenario"].dump();
            if (!overlaid[key]) {
                overlaid[key] = true;
                plotted.push_back(*r.rss_max_summary);
            }
        }
    }

    if (!file.preset.empty()) {
        const fs::path svg = fs::path(file.series.front().output_dir) / (file.preset + ".svg");
        PlotSpec spec;
        spec.title = file.preset;
        emit_plot(plotted, spec, svg);
        std::cout << "plot -> " << svg.string() << "\n";
    }
    return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out,
             const std::string& title) {
    std::vector<Summary> summaries;
    for (const std::string& p : inputs) {
        summaries.push_back(read_summary_csv(p));
    }
    PlotSpec spec;
    spec.title = title;
    emit_plot(summaries, spec, out);
    std::cout << "plot -> " << out << "\n";
    return 0;
}

int cmd_presets() {
    for (const fs::path& p : list_presets()) {
        std::string description;
        try {
            description = load_config(p).description;
        } catch (const ConfigError& e) {
            description = std::string("(invalid: ") + e.what() + ")";
        }
        std::cout << p.stem().string() << "\t" << description << "\n";
    }
    return 0;
}

// Debugging aid: closed-form and brute-force answers for one measurement triple.
int cmd_oracle_solve(double m1, double m2, double m3, double tx_power) {
    const ThreeSolve closed = solve_three(m1, m2, m3, tx_power);
    const oracle::BruteSolve brute = oracle::brute_force_solve(m1, m2, m3, tx_power);
    std::cout << "closed: beta=" << format_double(closed.beta) << " t=" << format_double(closed.t_mag)
              << " r=" << format_double(closed.r_mag) << (closed.degenerate ? " (degenerate)" : "")
              << "\n";
    std::cout << "brute:  beta=" << format_double(brute.beta) << " t=" << format_double(brute.t_mag)
              << " r=" << format_double(brute.r_mag) << " residual=" << format_double(brute.residual)
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed transmit beamforming simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "Run a config file or bundled preset");
    run->add_option("--config", run_args.config, "Config path or preset name")->required();
    run->add_option("--out", run_args.out, "Output directory (overrides config)");
    run->add_option("--seed", run_args.seed, "Master seed (overrides config)");
    run->add_option("--trials", run_args.trials, "Trial count (overrides config)");
    run->add_option("--budget", run_args.budget, "Slot budget (overrides config)");
    run->add_option("--threads", run_args.threads, "Worker threads, 0 = all cores");

    std::vector<std::string> summaries;
    std::string plot_out;
    std::string plot_title;
    CLI::App* plot = app.add_subcommand("plot", "Plot summary CSVs into one SVG");
    plot->add_option("--summary", summaries, "Summary CSV files")->required();
    plot->add_option("--out", plot_out, "Output SVG path")->required();
    plot->add_option("--title", plot_title, "Chart title");

    CLI::App* presets = app.add_subcommand("presets", "List bundled presets");

    double m1 = 0.0, m2 = 0.0, m3 = 0.0, power = 1.0;
    CLI::App* oracle_cmd = app.add_subcommand("oracle")->group("");
    oracle_cmd->require_subcommand(1);
    CLI::App* solve = oracle_cmd->add_subcommand("solve", "Solve one measurement triple");
    solve->add_option("--m1", m1)->required();
    solve->add_option("--m2", m2)->required();
    solve->add_option("--m3", m3)->required();
    solve->add_option("--power", power);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(run_args);
        if (*plot) return cmd_plot(summaries, plot_out, plot_title);
        if (*presets) return cmd_presets();
        if (*solve) return cmd_oracle_solve(m1, m2, m3, power);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
