#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sciu/cgp.hpp"
#include "sciu/dataset.hpp"
#include "sciu/metrics.hpp"
#include "sciu/trainer.hpp"

namespace sciu {

// baseline: plain training on D1
// cgp_only: CGP stage, then final training on D3
// fgc_only: FGC stage on D1, then final training on D4
// sciu:     CGP stage, FGC stage on D3, final training on D4
enum class Mode { baseline, cgp_only, fgc_only, sciu };

std::string_view to_string(Mode mode);
/// Accepts "baseline", "cgp", "cgp_only", "fgc", "fgc_only", "sciu".
std::optional<Mode> parse_mode(std::string_view text);

struct PipelineConfig {
    TrainConfig train;
    double train_fraction = 0.8;
    bool retrain_final = true;  // false: the final stage starts from the last stage's model
    std::size_t histogram_bins = 20;

    void validate() const;
    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

struct WeightSummary {
    std::size_t count = 0;
    std::optional<double> mean;
    std::vector<std::size_t> histogram;  // equal-width bins over [0, 1]
};

struct RunReport {
    PipelineConfig config;
    Mode mode = Mode::baseline;
    std::string dataset;  // as given on the command line

    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t fgc_input_size = 0;  // |D3| in sciu, |D1| in fgc_only, else 0
    std::size_t final_train_size = 0;

    std::map<std::string, std::vector<EpochRecord>> stages;  // "cgp", "fgc", "final"
    std::vector<PruneEvent> pruning_log;
    std::vector<CorrectionEvent> correction_log;

    ConfusionMatrix final_confusion;
    double final_test_war = 0.0;
    double final_test_uar = 0.0;
    std::vector<ClassIndex> uar_excluded_classes;

    std::optional<PruningQuality> pruning_quality;      // cgp modes with oracle flags
    std::optional<CorrectionQuality> correction_quality;  // fgc modes with oracle labels

    std::size_t pruned_total = 0;
    std::size_t corrected_total = 0;

    std::optional<WeightSummary> kept_weights;  // cgp modes only
    std::optional<WeightSummary> pruned_weights;
};

// Hooks for tests; each receives the stage name.
struct PipelineObserver {
    std::function<void(const std::string& stage, std::size_t epoch, const Dataset& working,
                       const std::set<SampleId>& pruned)>
        on_epoch;
    // Dataset each stage is about to train on.
    std::function<void(const std::string& stage, const Dataset& input)> on_stage_input;
};

/// Splits `data`, runs the stages for `mode`, and evaluates on the held-out part.
/// Throws DegenerateRunError("all samples pruned: lower lambda") on an empty D3.
RunReport run_pipeline(const PipelineConfig& config, const Dataset& data, Mode mode,
                       std::string dataset_label = {}, const PipelineObserver* observer = nullptr);

RunReport run_pipeline(const PipelineConfig& config, const std::filesystem::path& dataset_path, Mode mode);

// Output directory: config.snapshot, report.struct, epochs.csv, confusion.csv.
void write_run_outputs(const RunReport& report, const std::filesystem::path& out_dir);

// JSON text, keys sorted, doubles round-trip exact. Byte-stable for equal reports.
std::string serialize_report(const RunReport& report);
RunReport parse_report(std::string_view text);
RunReport load_report(const std::filesystem::path& path);

// Config snapshot: dataset path, mode and every PipelineConfig field.
std::string serialize_snapshot(const PipelineConfig& config, Mode mode, const std::string& dataset);
struct Snapshot {
    PipelineConfig config;
    Mode mode = Mode::sciu;
    std::string dataset;
};
Snapshot parse_snapshot(std::string_view text);

std::string epochs_csv(const RunReport& report);

// ---- sweeps ----

enum class SweepParam { lambda, tau, window_t };
std::string_view to_string(SweepParam p);
/// Accepts "lambda", "tau", "window", "window_t".
std::optional<SweepParam> parse_sweep_param(std::string_view text);

struct SweepCell {
    std::uint64_t seed = 0;
    std::optional<double> war;  // nullopt on failure
    std::optional<double> uar;
    std::string error;
};

struct SweepRow {
    double value = 0.0;
    std::vector<SweepCell> cells;
    std::optional<double> median_war;  // over successful seeds
    std::optional<double> median_uar;
};

struct SweepTable {
    SweepParam param = SweepParam::lambda;
    std::vector<SweepRow> rows;
    std::optional<std::size_t> best_row;  // argmax of median WAR; first on ties

    std::string to_csv() const;
};

/// One run_pipeline per (value, seed). Failed runs are recorded, not thrown.
/// Requires at least one value. `jobs` > 1 runs independent cells concurrently.
SweepTable sweep(const PipelineConfig& base, const Dataset& data, Mode mode, SweepParam param,
                 const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
                 std::size_t jobs = 1);

double median(std::vector<double> values);

// ---- report rendering ----

/// Files written by render_report, keyed by file name.
std::map<std::string, std::string> render_report(const RunReport& report);

}  // namespace sciu
