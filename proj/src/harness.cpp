#include "beamsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "beamsim/seeding.hpp"

namespace beamsim {

namespace fs = std::filesystem;

std::vector<TraceRecord> run_trial(const ExperimentConfig& config, int trial_index,
                                   const SlotObserver& observer) {
    const ScenarioSpec& scenario = config.scenario;
    const std::uint64_t seed = trial_seed(config.master_seed, static_cast<std::uint64_t>(trial_index));
    Rng channel_rng(stream_seed(seed, Stream::channel));
    Rng phase_rng(stream_seed(seed, Stream::initial_phases));
    Rng noise_rng(stream_seed(seed, Stream::noise));

    ChannelState channel = sample_channel(scenario, channel_rng);
    PhaseVector initial;
    initial.psi.reserve(channel.size());
    for (std::size_t i = 0; i < channel.size(); ++i) {
        initial.psi.push_back(uniform_phase(phase_rng));
    }
    auto beamformer = make_beamformer(config.algorithm, channel, initial,
                                      stream_seed(seed, Stream::transmitters));

    const double noise = scenario.noise_power();
    const bool churn = scenario.kind == ScenarioKind::churn;
    const bool drifting = scenario.kind == ScenarioKind::time_varying && scenario.sigma_xi > 0.0;

    std::vector<TraceRecord> records;
    records.reserve(static_cast<std::size_t>(config.slot_budget));
    std::vector<TopologyEvent> events;
    for (std::int64_t slot = 1; slot <= config.slot_budget; ++slot) {
        events.clear();
        if (churn) {
            ChurnResult changed =
                apply_churn(std::move(channel), beamformer->committed(), scenario, channel_rng, slot);
            channel = std::move(changed.channel);
            if (!changed.events.empty()) {
                events = std::move(changed.events);
                beamformer->on_topology(events, channel.node_ids, changed.phases);
            }
        }
        if (drifting) {
            channel = evolve_phases(std::move(channel), scenario.sigma_xi, channel_rng);
        }

        const PhaseVector sent = beamformer->request();
        const Measurement m{noise > 0.0 ? evaluate_rss_noisy(channel, sent, noise, noise_rng)
                                        : evaluate_rss(channel, sent),
                            slot};
        const StepOutput out = beamformer->step(m);

        TraceRecord rec;
        rec.trial = trial_index;
        rec.slot = slot;
        rec.rss = evaluate_rss(channel, beamformer->committed());
        rec.rss_max = rss_max(channel);
        rec.ratio = rec.rss_max > 0.0 ? gain_ratio(rec.rss, channel).value : 0.0;
        rec.n_active = static_cast<int>(channel.size());
        rec.stage = std::string(out.stage);
        if (observer) {
            observer(SlotView{slot, channel, sent, m, out, *beamformer, events});
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string primary_metric(const ExperimentConfig& config) {
    return config.scenario.kind == ScenarioKind::churn ? "rss" : "ratio";
}

Summary summarize(const std::vector<std::vector<TraceRecord>>& trials, const std::string& metric,
                  const std::string& series_name) {
    double TraceRecord::*field = nullptr;
    if (metric == "ratio") {
        field = &TraceRecord::ratio;
    } else if (metric == "rss") {
        field = &TraceRecord::rss;
    } else if (metric == "rss_max") {
        field = &TraceRecord::rss_max;
    } else {
        throw ContractViolation("unknown summary metric " + metric);
    }
    Summary s{series_name, metric, {}};
    if (trials.empty()) {
        return s;
    }
    const std::size_t n_slots = trials.front().size();
    for (const auto& t : trials) {
        if (t.size() != n_slots) {
            throw ContractViolation("summarize: trials have different lengths");
        }
    }
    const double n = static_cast<double>(trials.size());
    s.rows.reserve(n_slots);
    for (std::size_t k = 0; k < n_slots; ++k) {
        double sum = 0.0;
        for (const auto& t : trials) {
            sum += t[k].*field;
        }
        const double mean = sum / n;
        double sq = 0.0;
        for (const auto& t : trials) {
            const double d = t[k].*field - mean;
            sq += d * d;
        }
        const double sd = trials.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
        s.rows.push_back({trials.front()[k].slot, mean, sd});
    }
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const fs::path dir = fs::path(config.output_dir) / config.series_name;
    if (options.write_files) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) {
            throw std::runtime_error("cannot create output directory " + dir.string());
        }
        std::ofstream probe(dir / "config.json");
        if (!probe) {
            throw std::runtime_error("output directory is not writable: " + dir.string());
        }
        probe << to_json(config).dump(2) << '\n';
    }

    ExperimentResult result;
    result.trials.resize(static_cast<std::size_t>(config.n_trials));
    unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::clamp(threads, 1u, static_cast<unsigned>(config.n_trials));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < config.n_trials; i = next++) {
            try {
                result.trials[static_cast<std::size_t>(i)] = run_trial(config, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    result.summary = summarize(result.trials, primary_metric(config), config.series_name);
    if (config.scenario.kind == ScenarioKind::churn) {
        result.rss_max_summary = summarize(result.trials, "rss_max", config.series_name + "_rss_max");
    }
    if (options.write_files) {
        if (options.write_traces) {
            write_trace_csv(dir / "trace.csv", result.trials);
        }
        write_summary_csv(dir / "summary.csv", result.summary);
        if (result.rss_max_summary) {
            write_summary_csv(dir / "summary_rss_max.csv", *result.rss_max_summary);
        }
    }
    return result;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

template <class T>
T parse_number(const std::string& s, const fs::path& path) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("bad number '" + s + "' in " + path.string());
    }
    return v;
}

}  // namespace

void write_trace_csv(const fs::path& path, const std::vector<std::vector<TraceRecord>>& trials) {
    std::string out = "trial,slot,rss,rss_max,ratio,n_active,stage\n";
    for (const auto& trial : trials) {
        for (const TraceRecord& r : trial) {
            out += std::to_string(r.trial);
            out += ',';
            out += std::to_string(r.slot);
            out += ',';
            out += format_double(r.rss);
            out += ',';
            out += format_double(r.rss_max);
            out += ',';
            out += format_double(r.ratio);
            out += ',';
            out += std::to_string(r.n_active);
            out += ',';
            out += r.stage;
            out += '\n';
        }
    }
    write_file(path, out);
}

void write_summary_csv(const fs::path& path, const Summary& summary) {
    std::string out = "slot," + summary.metric + "_mean," + summary.metric + "_std,series_name\n";
    for (const SummaryRow& row : summary.rows) {
        out += std::to_string(row.slot);
        out += ',';
        out += format_double(row.mean);
        out += ',';
        out += format_double(row.std);
        out += ',';
        out += summary.series_name;
        out += '\n';
    }
    write_file(path, out);
}

Summary read_summary_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty summary file " + path.string());
    }
    const auto header = split(line, ',');
    if (header.size() != 4 || header[0] != "slot" || header[3] != "series_name" ||
        !header[1].ends_with("_mean")) {
        throw std::runtime_error("not a summary CSV: " + path.string());
    }
    Summary s;
    s.metric = header[1].substr(0, header[1].size() - 5);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 4) {
            throw std::runtime_error("malformed row in " + path.string());
        }
        s.rows.push_back({parse_number<std::int64_t>(cells[0], path),
                          parse_number<double>(cells[1], path),
                          parse_number<double>(cells[2], path)});
        s.series_name = cells[3];
    }
    return s;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace

void emit_plot(const std::vector<Summary>& summaries, const PlotSpec& spec,
               const fs::path& out_svg) {
    if (summaries.empty()) {
        throw std::runtime_error("emit_plot: no summaries");
    }
    const std::vector<SummaryRow>& axis = summaries.front().rows;
    for (const Summary& s : summaries) {
        if (s.rows.empty()) {
            throw std::runtime_error("emit_plot: summary '" + s.series_name + "' is empty");
        }
        if (s.rows.size() != axis.size()) {
            throw std::runtime_error("emit_plot: summaries have different slot axes");
        }
        for (std::size_t k = 0; k < axis.size(); ++k) {
            if (s.rows[k].slot != axis[k].slot) {
                throw std::runtime_error("emit_plot: summaries have different slot axes");
            }
        }
    }

    const bool ratio = std::all_of(summaries.begin(), summaries.end(),
                                   [](const Summary& s) { return s.metric == "ratio"; });
    double y_max = 1.05;
    if (spec.y_max) {
        y_max = *spec.y_max;
    } else if (!ratio) {
        double peak = 0.0;
        for (const Summary& s : summaries) {
            for (const SummaryRow& r : s.rows) {
                peak = std::max(peak, r.mean);
            }
        }
        y_max = peak > 0.0 ? 1.05 * peak : 1.0;
    }
    const double x_max = static_cast<double>(std::max<std::int64_t>(axis.back().slot, 1));
    const std::string y_label =
        !spec.y_label.empty() ? spec.y_label : (ratio ? "beamforming gain ratio" : "RSS");

    constexpr double width = 820, height = 520;
    constexpr double left = 70, right = 200, top = 40, bottom = 60;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto px = [&](double x) { return left + plot_w * x / x_max; };
    auto py = [&](double y) { return top + plot_h * (1.0 - std::clamp(y / y_max, 0.0, 1.0)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"22\" text-anchor=\"middle\" "
            << "font-size=\"15\">" << escape_xml(spec.title) << "</text>\n";
    }
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
        << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_max * i / 5.0;
        const double yv = y_max * i / 5.0;
        svg << "<line x1=\"" << px(xv) << "\" y1=\"" << top + plot_h << "\" x2=\"" << px(xv)
            << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px(xv) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << fixed(xv, 0) << "</text>\n";
        svg << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left
            << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\">" << fixed(yv, 2) << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
        << "\" text-anchor=\"middle\">slot</text>\n";
    svg << "<text transform=\"translate(18," << top + plot_h / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";

    std::string points_csv = "series_name,slot,mean\n";
    for (std::size_t s = 0; s < summaries.size(); ++s) {
        const char* colour = kPalette[s % std::size(kPalette)];
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (const SummaryRow& r : summaries[s].rows) {
            svg << fixed(px(static_cast<double>(r.slot)), 2) << ',' << fixed(py(r.mean), 2) << ' ';
            points_csv += summaries[s].series_name + "," + std::to_string(r.slot) + "," +
                          format_double(r.mean) + "\n";
        }
        svg << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(s);
        svg << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\""
            << left + plot_w + 36 << "\" y2=\"" << ly << "\" stroke=\"" << colour
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << left + plot_w + 42 << "\" y=\"" << ly + 4 << "\">"
            << escape_xml(summaries[s].series_name) << "</text>\n";
    }
    svg << "</svg>\n";

    fs::path csv_path = out_svg;
    csv_path.replace_extension(".csv");
    write_file(out_svg, svg.str());
    write_file(csv_path, points_csv);
}

}  // namespace beamsim
