// JSON encoding of run reports and config snapshots.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sciu/errors.hpp"
#include "sciu/pipeline.hpp"

namespace sciu {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> get_opt(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

json train_to_json(const TrainConfig& c) {
    return {
        {"learning_rate", c.learning_rate},
        {"momentum", c.momentum},
        {"batch_size", c.batch_size},
        {"epochs", c.epochs},
        {"warmup_epochs", c.warmup_epochs},
        {"window_t", c.window_t},
        {"lambda", c.lambda},
        {"tau", c.tau},
        {"seed", c.seed},
        {"score_source", std::string(to_string(c.score_source))},
        {"prob_source", std::string(to_string(c.prob_source))},
        {"embed_dim", c.embed_dim},
        {"hidden_dim", c.hidden_dim},
        {"checkpoint_every", c.checkpoint_every},
        {"checkpoint_dir", c.checkpoint_dir.generic_string()},
    };
}

TrainConfig train_from_json(const json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.warmup_epochs = j.at("warmup_epochs").get<std::size_t>();
    c.window_t = j.at("window_t").get<std::size_t>();
    c.lambda = j.at("lambda").get<double>();
    c.tau = j.at("tau").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto ss = parse_score_source(j.at("score_source").get<std::string>());
    const auto ps = parse_prob_source(j.at("prob_source").get<std::string>());
    if (!ss || !ps) throw ParseError("unknown score_source or prob_source");
    c.score_source = *ss;
    c.prob_source = *ps;
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.checkpoint_every = j.value("checkpoint_every", std::size_t{0});
    c.checkpoint_dir = j.value("checkpoint_dir", std::string{});
    return c;
}

json pipeline_to_json(const PipelineConfig& c) {
    return {
        {"train", train_to_json(c.train)},
        {"train_fraction", c.train_fraction},
        {"retrain_final", c.retrain_final},
        {"histogram_bins", c.histogram_bins},
    };
}

PipelineConfig pipeline_from_json(const json& j) {
    PipelineConfig c;
    c.train = train_from_json(j.at("train"));
    c.train_fraction = j.at("train_fraction").get<double>();
    c.retrain_final = j.at("retrain_final").get<bool>();
    c.histogram_bins = j.at("histogram_bins").get<std::size_t>();
    return c;
}

json epoch_to_json(const EpochRecord& r) {
    return {
        {"epoch", r.epoch},
        {"mean_loss", r.mean_loss},
        {"train_war", r.train_war},
        {"train_uar", r.train_uar},
        {"test_war", opt(r.test_war)},
        {"test_uar", opt(r.test_uar)},
        {"active_sample_count", r.active_sample_count},
        {"cumulative_pruned", r.cumulative_pruned},
        {"cumulative_corrected", r.cumulative_corrected},
    };
}

EpochRecord epoch_from_json(const json& j) {
    EpochRecord r;
    r.epoch = j.at("epoch").get<std::size_t>();
    r.mean_loss = j.at("mean_loss").get<double>();
    r.train_war = j.at("train_war").get<double>();
    r.train_uar = j.at("train_uar").get<double>();
    r.test_war = get_opt(j, "test_war");
    r.test_uar = get_opt(j, "test_uar");
    r.active_sample_count = j.at("active_sample_count").get<std::size_t>();
    r.cumulative_pruned = j.at("cumulative_pruned").get<std::size_t>();
    r.cumulative_corrected = j.at("cumulative_corrected").get<std::size_t>();
    return r;
}

json weights_to_json(const std::optional<WeightSummary>& w) {
    if (!w) return nullptr;
    return {{"count", w->count}, {"mean", opt(w->mean)}, {"histogram", w->histogram}};
}

std::optional<WeightSummary> weights_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    WeightSummary w;
    w.count = j.at("count").get<std::size_t>();
    w.mean = get_opt(j, "mean");
    w.histogram = j.at("histogram").get<std::vector<std::size_t>>();
    return w;
}

}  // namespace

std::string serialize_snapshot(const PipelineConfig& config, Mode mode, const std::string& dataset) {
    json j = pipeline_to_json(config);
    j["mode"] = std::string(to_string(mode));
    j["dataset"] = dataset;
    j["format"] = "sciu-config";
    return j.dump(2) + "\n";
}

Snapshot parse_snapshot(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "sciu-config") throw ParseError("not a sciu config snapshot");
        Snapshot s;
        s.config = pipeline_from_json(j);
        const auto mode = parse_mode(j.at("mode").get<std::string>());
        if (!mode) throw ParseError("unknown mode in snapshot");
        s.mode = *mode;
        s.dataset = j.at("dataset").get<std::string>();
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("config snapshot: ") + e.what());
    }
}

std::string serialize_report(const RunReport& r) {
    json j;
    j["format"] = "sciu-report";
    j["version"] = 1;
    j["config"] = pipeline_to_json(r.config);
    j["mode"] = std::string(to_string(r.mode));
    j["dataset"] = r.dataset;
    j["sizes"] = {{"train", r.train_size},
                  {"test", r.test_size},
                  {"fgc_input", r.fgc_input_size},
                  {"final_train", r.final_train_size}};

    json stages = json::object();
    for (const auto& [name, records] : r.stages) {
        json arr = json::array();
        for (const auto& rec : records) arr.push_back(epoch_to_json(rec));
        stages[name] = arr;
    }
    j["stages"] = stages;

    json plog = json::array();
    for (const auto& e : r.pruning_log) {
        plog.push_back({{"epoch", e.epoch}, {"sample_id", e.sample_id}, {"score_mean", e.score_mean}, {"lambda", e.lambda}});
    }
    j["pruning_log"] = plog;

    json clog = json::array();
    for (const auto& e : r.correction_log) {
        clog.push_back({{"epoch", e.epoch}, {"sample_id", e.sample_id}, {"old_label", e.old_label}, {"new_label", e.new_label}});
    }
    j["correction_log"] = clog;

    j["final_test"] = {{"war", r.final_test_war},
                       {"uar", r.final_test_uar},
                       {"uar_excluded_classes", r.uar_excluded_classes},
                       {"confusion", r.final_confusion.counts()}};

    j["pruning_quality"] = r.pruning_quality
                               ? json{{"precision", opt(r.pruning_quality->precision)},
                                      {"recall", opt(r.pruning_quality->recall)}}
                               : json(nullptr);
    j["correction_quality"] = r.correction_quality
                                  ? json{{"correction_accuracy", opt(r.correction_quality->correction_accuracy)},
                                         {"harmful_rate", opt(r.correction_quality->harmful_rate)}}
                                  : json(nullptr);
    j["totals"] = {{"pruned", r.pruned_total}, {"corrected", r.corrected_total}};
    j["weights"] = {{"kept", weights_to_json(r.kept_weights)}, {"pruned", weights_to_json(r.pruned_weights)}};
    return j.dump(2) + "\n";
}

RunReport parse_report(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "sciu-report") throw ParseError("not a sciu report");
        RunReport r;
        r.config = pipeline_from_json(j.at("config"));
        const auto mode = parse_mode(j.at("mode").get<std::string>());
        if (!mode) throw ParseError("unknown mode in report");
        r.mode = *mode;
        r.dataset = j.at("dataset").get<std::string>();
        const auto& sizes = j.at("sizes");
        r.train_size = sizes.at("train").get<std::size_t>();
        r.test_size = sizes.at("test").get<std::size_t>();
        r.fgc_input_size = sizes.at("fgc_input").get<std::size_t>();
        r.final_train_size = sizes.at("final_train").get<std::size_t>();

        for (const auto& [name, arr] : j.at("stages").items()) {
            auto& records = r.stages[name];
            for (const auto& rec : arr) records.push_back(epoch_from_json(rec));
        }
        for (const auto& e : j.at("pruning_log")) {
            r.pruning_log.push_back({e.at("epoch").get<std::size_t>(), e.at("sample_id").get<SampleId>(),
                                     e.at("score_mean").get<double>(), e.at("lambda").get<double>()});
        }
        for (const auto& e : j.at("correction_log")) {
            r.correction_log.push_back({e.at("sample_id").get<SampleId>(), e.at("old_label").get<ClassIndex>(),
                                        e.at("new_label").get<ClassIndex>(), e.at("epoch").get<std::size_t>()});
        }
        const auto& ft = j.at("final_test");
        r.final_test_war = ft.at("war").get<double>();
        r.final_test_uar = ft.at("uar").get<double>();
        r.uar_excluded_classes = ft.at("uar_excluded_classes").get<std::vector<ClassIndex>>();
        auto counts = ft.at("confusion").get<std::vector<std::vector<std::size_t>>>();
        const std::size_t k = counts.size();
        r.final_confusion = ConfusionMatrix(k, std::move(counts));

        if (const auto& pq = j.at("pruning_quality"); !pq.is_null()) {
            r.pruning_quality = PruningQuality{get_opt(pq, "precision"), get_opt(pq, "recall")};
        }
        if (const auto& cq = j.at("correction_quality"); !cq.is_null()) {
            r.correction_quality = CorrectionQuality{get_opt(cq, "correction_accuracy"), get_opt(cq, "harmful_rate")};
        }
        r.pruned_total = j.at("totals").at("pruned").get<std::size_t>();
        r.corrected_total = j.at("totals").at("corrected").get<std::size_t>();
        r.kept_weights = weights_from_json(j.at("weights").at("kept"));
        r.pruned_weights = weights_from_json(j.at("weights").at("pruned"));

        if (r.pruned_total != r.pruning_log.size() || r.corrected_total != r.correction_log.size()) {
            throw ParseError("report totals disagree with log lengths");
        }
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

RunReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open report " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_report(buf.str());
}

}  // namespace sciu
