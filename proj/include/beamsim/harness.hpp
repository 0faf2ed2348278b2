#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "beamsim/beamformer.hpp"
#include "beamsim/config.hpp"

namespace beamsim {

struct TraceRecord {
    int trial = 0;
    std::int64_t slot = 0;
    double rss = 0.0;  // noiseless RSS of the committed phases after the slot
    double rss_max = 0.0;
    double ratio = 0.0;  // 0 when the network is empty
    int n_active = 0;
    std::string stage;
};

/// Everything visible at the end of one slot, for tests and diagnostics.
struct SlotView {
    std::int64_t slot;
    const ChannelState& channel;
    const PhaseVector& transmitted;
    const Measurement& measurement;
    const StepOutput& output;
    const Beamformer& beamformer;
    const std::vector<TopologyEvent>& events;  // membership changes before this slot
};

using SlotObserver = std::function<void(const SlotView&)>;

/// One seeded trial. Per slot: churn, phase drift, transmit, measure, step,
/// record. Slots are numbered 1..slot_budget.
std::vector<TraceRecord> run_trial(const ExperimentConfig& config, int trial_index,
                                   const SlotObserver& observer = {});

struct SummaryRow {
    std::int64_t slot = 0;
    double mean = 0.0;
    double std = 0.0;
};

struct Summary {
    std::string series_name;
    std::string metric;  // "ratio", "rss" or "rss_max"
    std::vector<SummaryRow> rows;
};

/// Per-slot mean and sample standard deviation of `value` across trials.
Summary summarize(const std::vector<std::vector<TraceRecord>>& trials, const std::string& metric,
                  const std::string& series_name);

/// Plotted metric: raw RSS under churn, ratio otherwise.
std::string primary_metric(const ExperimentConfig& config);

struct ExperimentResult {
    std::vector<std::vector<TraceRecord>> trials;  // ordered by trial index
    Summary summary;
    std::optional<Summary> rss_max_summary;  // churn only
};

struct RunOptions {
    unsigned threads = 0;      // 0 = hardware concurrency
    bool write_files = true;   // traces, summaries and the resolved config
    bool write_traces = true;
};

/// Runs all trials (in parallel, results ordered by index) and writes
/// <output_dir>/<series_name>/{config.json,trace.csv,summary.csv}.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<std::vector<TraceRecord>>& trials);
void write_summary_csv(const std::filesystem::path& path, const Summary& summary);
Summary read_summary_csv(const std::filesystem::path& path);

struct PlotSpec {
    std::string title;
    std::string y_label;          // defaults from the summaries' metric
    std::optional<double> y_max;  // ratio plots default to 1.05
};

/// SVG line chart of the summaries' mean columns plus `<out>.csv` with the
/// plotted points. All summaries must share the slot axis.
void emit_plot(const std::vector<Summary>& summaries, const PlotSpec& spec,
               const std::filesystem::path& out_svg);

}  // namespace beamsim
