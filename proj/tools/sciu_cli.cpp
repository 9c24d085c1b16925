// sciu: generate synthetic data, run SCIU pipelines and ablations, sweep
// thresholds, and render run reports.
//
// Exit codes: 0 ok, 1 other failure (I/O, parse), 2 usage, 3 degenerate run, 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sciu/errors.hpp"
#include "sciu/pipeline.hpp"
#include "sciu/synth.hpp"

namespace fs = std::filesystem;
using namespace sciu;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitNumeric = 4;

void add_train_flags(CLI::App& cmd, PipelineConfig& cfg, std::string& score_source, std::string& prob_source) {
    auto& t = cfg.train;
    cmd.add_option("--lr,--learning-rate", t.learning_rate, "SGD learning rate")->capture_default_str();
    cmd.add_option("--momentum", t.momentum, "SGD momentum")->capture_default_str();
    cmd.add_option("--batch-size", t.batch_size)->capture_default_str();
    cmd.add_option("--epochs", t.epochs, "epochs per stage")->capture_default_str();
    cmd.add_option("--warmup", t.warmup_epochs, "epochs before any pruning/correction decision")->capture_default_str();
    cmd.add_option("--window", t.window_t, "history window t")->capture_default_str();
    cmd.add_option("--lambda", t.lambda, "pruning threshold")->capture_default_str();
    cmd.add_option("--tau", t.tau, "correction threshold")->capture_default_str();
    cmd.add_option("--seed", t.seed)->capture_default_str();
    cmd.add_option("--embed-dim", t.embed_dim)->capture_default_str();
    cmd.add_option("--hidden-dim", t.hidden_dim, "weight-branch width")->capture_default_str();
    cmd.add_option("--score-source", score_source, "annotated_class | max_class")->capture_default_str();
    cmd.add_option("--prob-source", prob_source, "weighted | unweighted")->capture_default_str();
    cmd.add_option("--train-fraction", cfg.train_fraction)->capture_default_str();
    cmd.add_flag("!--reuse-stage-model", cfg.retrain_final,
                 "start final training from the last stage's model instead of a fresh one");
    cmd.add_option("--histogram-bins", cfg.histogram_bins)->capture_default_str();
    cmd.add_option("--checkpoint-every", t.checkpoint_every, "write a checkpoint every N epochs (0 = never)")
        ->capture_default_str();
}

void apply_sources(PipelineConfig& cfg, const std::string& score_source, const std::string& prob_source) {
    const auto ss = parse_score_source(score_source);
    if (!ss) throw CLI::ValidationError("--score-source", "unknown value '" + score_source + "'");
    const auto ps = parse_prob_source(prob_source);
    if (!ps) throw CLI::ValidationError("--prob-source", "unknown value '" + prob_source + "'");
    cfg.train.score_source = *ss;
    cfg.train.prob_source = *ps;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--values", "not a number: '" + item + "'");
        }
    }
    return values;
}

// Field name at the head of a SynthConfig error -> the flag that sets it.
std::string synth_flag(const std::string& message) {
    static const std::pair<const char*, const char*> flags[] = {
        {"n_classes", "--classes"},
        {"dim", "--dim"},
        {"per_class", "--per-class"},
        {"low_quality_rate", "--low-quality-rate"},
        {"mislabel_rate", "--mislabel-rate"},
        {"neutral_bias_fraction", "--neutral-bias"},
        {"intensity_low", "--intensity-low"},
        {"intensity_high", "--intensity-high"},
        {"cluster_spread", "--spread"},
    };
    const std::string field = message.substr(0, message.find(':'));
    for (const auto& [name, flag] : flags) {
        if (field == name) return flag;
    }
    return "generate";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SCIU data purification: coarse-grained pruning and fine-grained correction"};
    app.require_subcommand(1);

    // generate
    SynthConfig synth;
    fs::path gen_out;
    auto* gen = app.add_subcommand("generate", "write a synthetic dataset with injected noise");
    gen->add_option("--out,-o", gen_out, "output dataset file")->required();
    gen->add_option("--classes", synth.n_classes)->capture_default_str();
    gen->add_option("--dim", synth.dim)->capture_default_str();
    gen->add_option("--per-class", synth.per_class)->capture_default_str();
    gen->add_option("--low-quality-rate", synth.low_quality_rate)->capture_default_str();
    gen->add_option("--mislabel-rate", synth.mislabel_rate)->capture_default_str();
    gen->add_option("--neutral-bias", synth.neutral_bias_fraction, "fraction of mislabels sent to class 0")
        ->capture_default_str();
    gen->add_option("--intensity-low", synth.intensity_low)->capture_default_str();
    gen->add_option("--intensity-high", synth.intensity_high)->capture_default_str();
    gen->add_option("--spread", synth.cluster_spread, "per-coordinate noise sd of clean samples")
        ->capture_default_str();
    gen->add_option("--seed", synth.seed)->capture_default_str();

    // run
    PipelineConfig run_cfg;
    std::string run_mode = "sciu";
    std::string run_data;
    fs::path run_out = "run";
    fs::path run_config;
    std::string run_score(to_string(run_cfg.train.score_source)), run_prob(to_string(run_cfg.train.prob_source));
    auto* run = app.add_subcommand("run", "train one pipeline and write its report");
    run->add_option("--data,-d", run_data, "dataset file");
    run->add_option("--mode,-m", run_mode, "baseline | cgp | fgc | sciu")->capture_default_str();
    run->add_option("--out,-o", run_out, "output directory")->capture_default_str();
    run->add_option("--config", run_config, "reproduce a run from its config.snapshot (other flags ignored)");
    add_train_flags(*run, run_cfg, run_score, run_prob);

    // sweep
    PipelineConfig sweep_cfg;
    std::string sweep_param, sweep_values, sweep_data, sweep_mode = "sciu";
    std::size_t sweep_seeds = 5;
    std::size_t sweep_jobs = std::max(1u, std::thread::hardware_concurrency());
    fs::path sweep_out = "sweep.csv";
    std::string sweep_score(to_string(sweep_cfg.train.score_source)), sweep_prob(to_string(sweep_cfg.train.prob_source));
    auto* sw = app.add_subcommand("sweep", "run a pipeline per hyperparameter value over a seed set");
    sw->add_option("--data,-d", sweep_data, "dataset file")->required();
    sw->add_option("--param", sweep_param, "lambda | tau | window")->required();
    sw->add_option("--values", sweep_values, "comma-separated values")->required();
    sw->add_option("--mode,-m", sweep_mode)->capture_default_str();
    sw->add_option("--seeds", sweep_seeds, "number of seeds, starting at --seed")->capture_default_str();
    sw->add_option("--jobs,-j", sweep_jobs, "concurrent runs")->capture_default_str();
    sw->add_option("--out,-o", sweep_out, "CSV output")->capture_default_str();
    add_train_flags(*sw, sweep_cfg, sweep_score, sweep_prob);

    // report
    fs::path report_path, report_out;
    auto* rep = app.add_subcommand("report", "summarize a report and emit plot CSVs");
    rep->add_option("report", report_path, "report.struct file or run directory")->required();
    rep->add_option("--out,-o", report_out, "directory for CSVs (default: next to the report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen) {
            try {
                synth.validate();
            } catch (const ConfigError& e) {
                throw CLI::ValidationError(synth_flag(e.what()), e.what());
            }
            const Dataset data = generate(synth);
            save_dataset(data, gen_out);
            const auto s = summarize(data);
            std::printf("wrote %s\n", gen_out.string().c_str());
            std::printf("samples: %zu\nclean: %zu\nlow_quality: %zu\nmislabeled: %zu (to class 0: %zu)\n", s.total,
                        s.clean, s.low_quality, s.mislabeled, s.neutral_flips);
        } else if (*run) {
            Mode mode{};
            std::string data_path = run_data;
            if (!run_config.empty()) {
                std::ifstream in(run_config, std::ios::binary);
                if (!in) throw IoError("cannot open " + run_config.string());
                std::ostringstream buf;
                buf << in.rdbuf();
                const auto snap = parse_snapshot(buf.str());
                run_cfg = snap.config;
                mode = snap.mode;
                if (data_path.empty()) data_path = snap.dataset;
            } else {
                apply_sources(run_cfg, run_score, run_prob);
                const auto m = parse_mode(run_mode);
                if (!m) throw CLI::ValidationError("--mode", "unknown mode '" + run_mode + "'");
                mode = *m;
            }
            if (data_path.empty()) throw CLI::ValidationError("--data", "a dataset is required");
            if (run_cfg.train.checkpoint_every > 0) run_cfg.train.checkpoint_dir = run_out / "checkpoints";
            run_cfg.validate();

            const Dataset data = load_dataset(data_path);
            const auto report = run_pipeline(run_cfg, data, mode, data_path);
            write_run_outputs(report, run_out);
            std::printf("%s", render_report(report).at("summary.txt").c_str());
            std::printf("\nreport: %s\n", (run_out / "report.struct").string().c_str());
        } else if (*sw) {
            apply_sources(sweep_cfg, sweep_score, sweep_prob);
            const auto param = parse_sweep_param(sweep_param);
            if (!param) throw CLI::ValidationError("--param", "unknown parameter '" + sweep_param + "'");
            const auto mode = parse_mode(sweep_mode);
            if (!mode) throw CLI::ValidationError("--mode", "unknown mode '" + sweep_mode + "'");
            const auto values = parse_values(sweep_values);
            if (sweep_seeds < 1) throw CLI::ValidationError("--seeds", "need at least one seed");
            std::vector<std::uint64_t> seeds;
            for (std::size_t k = 0; k < sweep_seeds; ++k) seeds.push_back(sweep_cfg.train.seed + k);

            const Dataset data = load_dataset(sweep_data);
            const auto table = sweep(sweep_cfg, data, *mode, *param, values, seeds, sweep_jobs);
            const std::string csv = table.to_csv();
            write_text(sweep_out, csv);
            std::printf("%s", csv.c_str());
            if (table.best_row) {
                std::printf("best %s: %s\n", std::string(to_string(*param)).c_str(),
                            format_short(table.rows[*table.best_row].value).c_str());
            }
        } else if (*rep) {
            fs::path path = report_path;
            if (fs::is_directory(path)) path /= "report.struct";
            const auto report = load_report(path);
            const fs::path out_dir = report_out.empty() ? path.parent_path() : report_out;
            if (!out_dir.empty()) fs::create_directories(out_dir);
            for (const auto& [name, content] : render_report(report)) {
                const fs::path target = out_dir / name;
                if (fs::exists(target) && fs::equivalent(target, path)) continue;
                write_text(target, content);
            }
            std::printf("%s", render_report(report).at("summary.txt").c_str());
        }
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const DegenerateRunError& e) {
        std::fprintf(stderr, "degenerate run: %s\n", e.what());
        return kExitDegenerate;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return 0;
}
