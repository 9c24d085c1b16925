#include "sciu/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <future>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "sciu/errors.hpp"

namespace sciu {

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::baseline: return "baseline";
        case Mode::cgp_only: return "cgp_only";
        case Mode::fgc_only: return "fgc_only";
        case Mode::sciu: return "sciu";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view text) {
    if (text == "baseline") return Mode::baseline;
    if (text == "cgp" || text == "cgp_only") return Mode::cgp_only;
    if (text == "fgc" || text == "fgc_only") return Mode::fgc_only;
    if (text == "sciu") return Mode::sciu;
    return std::nullopt;
}

void PipelineConfig::validate() const {
    train.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must be in (0, 1)");
    if (histogram_bins < 1) throw ConfigError("histogram_bins must be positive");
}

namespace {

// Fixed per-stage streams: the final stage of every mode starts from the same
// initialisation for a given seed.
constexpr std::uint64_t kStreamCgp = 1;
constexpr std::uint64_t kStreamFgc = 2;
constexpr std::uint64_t kStreamFinal = 3;

WeightSummary summarize_weights(const std::vector<double>& weights, std::size_t bins) {
    WeightSummary s;
    s.count = weights.size();
    s.histogram.assign(bins, 0);
    if (weights.empty()) return s;
    double sum = 0.0;
    for (const double w : weights) {
        sum += w;
        auto bin = static_cast<std::size_t>(w * static_cast<double>(bins));
        s.histogram[std::min(bin, bins - 1)] += 1;
    }
    s.mean = sum / static_cast<double>(weights.size());
    return s;
}

bool has_oracle_flags(const Dataset& d) {
    return std::all_of(d.samples().begin(), d.samples().end(),
                       [](const Sample& s) { return s.oracle_for_evaluation().quality_flag.has_value(); });
}

bool has_oracle_labels(const Dataset& d) {
    return std::all_of(d.samples().begin(), d.samples().end(),
                       [](const Sample& s) { return s.oracle_for_evaluation().true_label.has_value(); });
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, const Dataset& data, Mode mode,
                       std::string dataset_label, const PipelineObserver* observer) {
    config.validate();
    if (data.empty()) throw DegenerateRunError("dataset is empty");

    auto [train, test] = stratified_split(data, config.train_fraction, config.train.seed);

    RunReport report;
    report.config = config;
    report.mode = mode;
    report.dataset = std::move(dataset_label);
    report.train_size = train.size();
    report.test_size = test.size();

    auto stage_observer = [observer](const std::string& name) -> StageObserver {
        if (!observer || !observer->on_epoch) return {};
        return [observer, name](std::size_t epoch, const Dataset& working, const std::set<SampleId>& pruned) {
            observer->on_epoch(name, epoch, working, pruned);
        };
    };
    auto announce = [observer](const std::string& name, const Dataset& input) {
        if (observer && observer->on_stage_input) observer->on_stage_input(name, input);
    };

    Dataset current = train;
    std::optional<SciuModel> carried;

    if (mode == Mode::cgp_only || mode == Mode::sciu) {
        announce("cgp", current);
        auto cgp = train_stage(current, config.train, Stage::cgp, &test, kStreamCgp, stage_observer("cgp"));
        report.stages["cgp"] = cgp.epochs;
        report.pruning_log = cgp.pruning_log;
        report.pruned_total = cgp.pruned_ids.size();

        std::vector<double> kept, pruned;
        for (const auto& [id, w] : cgp.last_weight) {
            (cgp.pruned_ids.contains(id) ? pruned : kept).push_back(w);
        }
        report.kept_weights = summarize_weights(kept, config.histogram_bins);
        report.pruned_weights = summarize_weights(pruned, config.histogram_bins);
        if (has_oracle_flags(train)) report.pruning_quality = pruning_quality(cgp.pruned_ids, train);

        current = std::move(cgp.output);
        carried = std::move(cgp.model);
    }

    if (mode == Mode::fgc_only || mode == Mode::sciu) {
        report.fgc_input_size = current.size();
        announce("fgc", current);
        auto fgc = train_stage(current, config.train, Stage::fgc, &test, kStreamFgc, stage_observer("fgc"));
        report.stages["fgc"] = fgc.epochs;
        report.correction_log = fgc.correction_log;
        report.corrected_total = fgc.correction_log.size();
        if (has_oracle_labels(train)) {
            report.correction_quality = correction_quality(fgc.correction_log, train);
        }
        current = std::move(fgc.output);
        carried = std::move(fgc.model);
    }

    report.final_train_size = current.size();
    announce("final", current);
    const SciuModel* start = (!config.retrain_final && carried) ? &*carried : nullptr;
    auto final_stage =
        train_stage(current, config.train, Stage::plain, &test, kStreamFinal, stage_observer("final"), start);
    report.stages["final"] = final_stage.epochs;

    const auto ev = evaluate(final_stage.model, test);
    report.final_confusion = ev.confusion;
    report.final_test_war = ev.war;
    report.final_test_uar = ev.uar.value;
    report.uar_excluded_classes = ev.uar.excluded_classes;
    return report;
}

RunReport run_pipeline(const PipelineConfig& config, const std::filesystem::path& dataset_path, Mode mode) {
    const Dataset data = load_dataset(dataset_path);
    return run_pipeline(config, data, mode, dataset_path.string());
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string opt_real(const std::optional<double>& v) { return v ? format_short(*v) : ""; }

}  // namespace

std::string epochs_csv(const RunReport& report) {
    std::string out =
        "stage,epoch,mean_loss,train_war,train_uar,test_war,test_uar,active,cumulative_pruned,cumulative_corrected\n";
    for (const char* stage : {"cgp", "fgc", "final"}) {
        const auto it = report.stages.find(stage);
        if (it == report.stages.end()) continue;
        for (const auto& r : it->second) {
            out += std::string(stage) + ',' + std::to_string(r.epoch) + ',' + format_short(r.mean_loss) + ',' +
                   format_short(r.train_war) + ',' + format_short(r.train_uar) + ',' + opt_real(r.test_war) + ',' +
                   opt_real(r.test_uar) + ',' + std::to_string(r.active_sample_count) + ',' +
                   std::to_string(r.cumulative_pruned) + ',' + std::to_string(r.cumulative_corrected) + '\n';
        }
    }
    return out;
}

void write_run_outputs(const RunReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "config.snapshot", serialize_snapshot(report.config, report.mode, report.dataset));
    write_file(out_dir / "report.struct", serialize_report(report));
    write_file(out_dir / "epochs.csv", epochs_csv(report));
    write_file(out_dir / "confusion.csv", report.final_confusion.to_csv());
}

// ---- sweeps ----

std::string_view to_string(SweepParam p) {
    switch (p) {
        case SweepParam::lambda: return "lambda";
        case SweepParam::tau: return "tau";
        case SweepParam::window_t: return "window_t";
    }
    return "?";
}

std::optional<SweepParam> parse_sweep_param(std::string_view text) {
    if (text == "lambda") return SweepParam::lambda;
    if (text == "tau") return SweepParam::tau;
    if (text == "window" || text == "window_t") return SweepParam::window_t;
    return std::nullopt;
}

double median(std::vector<double> values) {
    if (values.empty()) throw EvaluationError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SweepTable sweep(const PipelineConfig& base, const Dataset& data, Mode mode, SweepParam param,
                 const std::vector<double>& values, const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (seeds.empty()) throw ConfigError("sweep needs at least one seed");

    SweepTable table;
    table.param = param;
    for (const double v : values) {
        SweepRow row;
        row.value = v;
        for (const auto s : seeds) row.cells.push_back({s, std::nullopt, std::nullopt, {}});
        table.rows.push_back(std::move(row));
    }

    auto run_cell = [&](SweepRow& row, SweepCell& cell) {
        PipelineConfig cfg = base;
        cfg.train.seed = cell.seed;
        switch (param) {
            case SweepParam::lambda: cfg.train.lambda = row.value; break;
            case SweepParam::tau: cfg.train.tau = row.value; break;
            case SweepParam::window_t:
                if (!(row.value >= 1.0) || row.value != static_cast<double>(static_cast<std::size_t>(row.value))) {
                    cell.error = "window_t must be a positive integer";
                    return;
                }
                cfg.train.window_t = static_cast<std::size_t>(row.value);
                break;
        }
        try {
            const auto report = run_pipeline(cfg, data, mode);
            cell.war = report.final_test_war;
            cell.uar = report.final_test_uar;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    };

    std::vector<std::pair<SweepRow*, SweepCell*>> work;
    for (auto& row : table.rows) {
        for (auto& cell : row.cells) work.emplace_back(&row, &cell);
    }
    jobs = std::max<std::size_t>(1, std::min(jobs, work.size()));
    if (jobs == 1) {
        for (auto& [row, cell] : work) run_cell(*row, *cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < work.size(); k = next++) run_cell(*work[k].first, *work[k].second);
            });
        }
        for (auto& t : pool) t.join();
    }

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        auto& row = table.rows[r];
        std::vector<double> wars, uars;
        for (const auto& c : row.cells) {
            if (c.war) wars.push_back(*c.war);
            if (c.uar) uars.push_back(*c.uar);
        }
        if (!wars.empty()) row.median_war = median(wars);
        if (!uars.empty()) row.median_uar = median(uars);
        if (row.median_war && (!table.best_row || *row.median_war > *table.rows[*table.best_row].median_war)) {
            table.best_row = r;
        }
    }
    return table;
}

std::string SweepTable::to_csv() const {
    std::string out = std::string(to_string(param)) + ",median_war,median_uar,ok_runs,failed_runs,best";
    const std::size_t n_seeds = rows.empty() ? 0 : rows.front().cells.size();
    for (std::size_t k = 0; k < n_seeds; ++k) {
        const auto seed = std::to_string(rows.front().cells[k].seed);
        out += ",war_seed" + seed + ",uar_seed" + seed;
    }
    out += '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const auto ok = std::count_if(row.cells.begin(), row.cells.end(), [](const auto& c) { return c.war.has_value(); });
        out += format_short(row.value) + ',' + opt_real(row.median_war) + ',' + opt_real(row.median_uar) + ',' +
               std::to_string(ok) + ',' + std::to_string(row.cells.size() - ok) + ',' +
               (best_row == r ? "1" : "0");
        for (const auto& c : row.cells) {
            out += ',' + (c.war ? format_short(*c.war) : std::string("FAILED")) + ',' +
                   (c.uar ? format_short(*c.uar) : std::string("FAILED"));
        }
        out += '\n';
    }
    return out;
}

// ---- report rendering ----

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string opt_fixed(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

}  // namespace

std::map<std::string, std::string> render_report(const RunReport& report) {
    std::map<std::string, std::string> files;
    files["epochs.csv"] = epochs_csv(report);
    files["confusion.csv"] = report.final_confusion.to_csv();

    const bool cgp = report.mode == Mode::cgp_only || report.mode == Mode::sciu;
    const bool fgc = report.mode == Mode::fgc_only || report.mode == Mode::sciu;

    if (cgp && report.kept_weights && report.pruned_weights) {
        const auto& kept = report.kept_weights->histogram;
        const auto& pruned = report.pruned_weights->histogram;
        const std::size_t bins = kept.size();
        std::string csv = "bin_low,bin_high,kept,pruned\n";
        for (std::size_t b = 0; b < bins; ++b) {
            csv += format_short(static_cast<double>(b) / bins) + ',' + format_short(static_cast<double>(b + 1) / bins) +
                   ',' + std::to_string(kept[b]) + ',' + std::to_string(pruned[b]) + '\n';
        }
        files["weight_histogram.csv"] = csv;
    }

    std::ostringstream s;
    s << "mode: " << to_string(report.mode) << "\n";
    s << "dataset: " << report.dataset << " (train " << report.train_size << ", test " << report.test_size
      << ")\n\n";
    s << "CGP  FGC  WAR     UAR     Pruned  Corrected\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-4s %-4s %-7s %-7s %-7zu %zu\n", cgp ? "yes" : "no", fgc ? "yes" : "no",
                  fixed(report.final_test_war).c_str(), fixed(report.final_test_uar).c_str(), report.pruned_total,
                  report.corrected_total);
    s << line;
    if (!report.uar_excluded_classes.empty()) {
        s << "\nUAR excludes classes with no test samples:";
        for (const auto c : report.uar_excluded_classes) s << ' ' << c;
        s << '\n';
    }
    if (cgp && report.kept_weights && report.pruned_weights) {
        s << "\nlearned weights: kept n=" << report.kept_weights->count
          << " mean=" << opt_fixed(report.kept_weights->mean) << ", pruned n=" << report.pruned_weights->count
          << " mean=" << opt_fixed(report.pruned_weights->mean) << '\n';
    }
    if (report.pruning_quality) {
        s << "pruning vs oracle: precision=" << opt_fixed(report.pruning_quality->precision)
          << " recall=" << opt_fixed(report.pruning_quality->recall) << '\n';
    }
    if (report.correction_quality) {
        s << "corrections vs oracle: accuracy=" << opt_fixed(report.correction_quality->correction_accuracy)
          << " harmful=" << opt_fixed(report.correction_quality->harmful_rate) << '\n';
    }
    files["summary.txt"] = s.str();
    return files;
}

}  // namespace sciu
