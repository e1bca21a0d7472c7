#include "tep/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tep/ensemble.hpp"
#include "tep/errors.hpp"
#include "tep/fusion.hpp"
#include "tep/miner.hpp"

namespace tep {

namespace {

using nlohmann::json;

const std::vector<double> kStatThresholds = {0.5, 0.8};

std::vector<int> all_modes() {
    std::vector<int> modes(kModeCount);
    std::iota(modes.begin(), modes.end(), 0);
    return modes;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw MissingDataError("cannot open " + path.string() + " for writing");
    out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingDataError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

LabeledFrame filter_normal_rows(const LabeledFrame& frame) {
    LabeledFrame out;
    out.features = frame.features;
    out.sample_period_minutes = frame.sample_period_minutes;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (frame.labels[r] != 0) continue;
        const auto row = frame.row(r);
        out.values.insert(out.values.end(), row.begin(), row.end());
        out.labels.push_back(0);
    }
    return out;
}

LabeledFrame strided_subsample(const LabeledFrame& frame, double fraction) {
    if (fraction >= 1.0) return frame;
    const auto stride = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(1.0 / fraction)));
    LabeledFrame out;
    out.features = frame.features;
    out.sample_period_minutes = frame.sample_period_minutes;
    for (std::size_t r = 0; r < frame.rows(); r += stride) {
        const auto row = frame.row(r);
        out.values.insert(out.values.end(), row.begin(), row.end());
        out.labels.push_back(frame.labels[r]);
    }
    return out;
}

// Lazily resolved inputs: prefer what this run already produced, then
// artifacts on disk, then the raw data directory.
struct PipelineState {
    explicit PipelineState(const PipelineConfig& config) : cfg(config) {}

    const PipelineConfig& cfg;
    std::unique_ptr<Corpus> raw;
    std::unique_ptr<Corpus> expanded;
    std::unique_ptr<LabeledFrame> mining_train;
    std::unique_ptr<RuleSet> rules;
    json summary = json::object();

    bool expansion_enabled() const { return !cfg.lags.empty(); }

    const Corpus& raw_corpus() {
        if (raw) return *raw;
        const auto train_path = cfg.out_dir / "train.csv";
        const auto test_path = cfg.out_dir / "test.csv";
        raw = std::make_unique<Corpus>();
        if (std::filesystem::exists(train_path) && std::filesystem::exists(test_path)) {
            raw->train = read_frame_csv(train_path);
            raw->test = read_frame_csv(test_path);
        } else {
            *raw = assemble_corpus(cfg.data_dir, cfg.effective_faults(), false);
        }
        return *raw;
    }

    const Corpus& expanded_corpus() {
        if (!expansion_enabled()) return raw_corpus();
        if (expanded) return *expanded;
        const auto train_path = cfg.out_dir / "train_expanded.csv";
        const auto test_path = cfg.out_dir / "test_expanded.csv";
        expanded = std::make_unique<Corpus>();
        if (std::filesystem::exists(train_path) && std::filesystem::exists(test_path)) {
            expanded->train = read_frame_csv(train_path);
            expanded->test = read_frame_csv(test_path);
        } else {
            // Expansion happens per file inside assemble_corpus; expanding a
            // concatenated frame would difference across file boundaries.
            *expanded = assemble_corpus(cfg.data_dir, cfg.effective_faults(), true, cfg.lags);
        }
        return *expanded;
    }

    const LabeledFrame& mining_frame() {
        if (!mining_train)
            mining_train = std::make_unique<LabeledFrame>(
                strided_subsample(expanded_corpus().train, cfg.train_subsample));
        return *mining_train;
    }

    const RuleSet& ruleset() {
        if (rules) return *rules;
        const auto path = cfg.out_dir / "rules.json";
        if (!std::filesystem::exists(path))
            throw MissingDataError("no mined rules in memory and no " + path.string() +
                                   "; run the mine stage first");
        rules = std::make_unique<RuleSet>(rules_from_json(read_text_file(path)));
        return *rules;
    }
};

void run_ingest(PipelineState& state) {
    const PipelineConfig& cfg = state.cfg;
    state.raw = std::make_unique<Corpus>(
        assemble_corpus(cfg.data_dir, cfg.effective_faults(), false));
    write_frame_csv(state.raw->train, cfg.out_dir / "train.csv");
    write_frame_csv(state.raw->test, cfg.out_dir / "test.csv");
    json section;
    section["train_rows"] = state.raw->train.rows();
    section["test_rows"] = state.raw->test.rows();
    section["features"] = state.raw->train.cols();
    if (state.expansion_enabled()) {
        state.expanded = std::make_unique<Corpus>(
            assemble_corpus(cfg.data_dir, cfg.effective_faults(), true, cfg.lags));
        write_frame_csv(state.expanded->train, cfg.out_dir / "train_expanded.csv");
        write_frame_csv(state.expanded->test, cfg.out_dir / "test_expanded.csv");
        section["expanded_features"] = state.expanded->train.cols();
        section["expanded_train_rows"] = state.expanded->train.rows();
        section["expanded_test_rows"] = state.expanded->test.rows();
    }
    state.summary["ingest"] = std::move(section);
}

void run_compress(PipelineState& state) {
    const PipelineConfig& cfg = state.cfg;
    const Corpus& corpus = state.raw_corpus();
    const LabeledFrame normal = filter_normal_rows(corpus.train);
    if (normal.rows() == 0)
        throw InvalidArgumentError("no normal-operation rows available to fit margins");
    BaselineModel baseline = fit_baseline(normal, cfg.margin_coverage);
    for (const auto& [variable, bounds] : cfg.margin_overrides)
        set_margin(baseline, variable, bounds.first, bounds.second);

    std::vector<EventStream> streams;
    streams.reserve(corpus.test.cols());
    std::size_t transmitted = 0;
    for (std::size_t c = 0; c < corpus.test.cols(); ++c) {
        const std::vector<double> column = corpus.test.column(c);
        streams.push_back(compress_series(column, baseline, c));
        transmitted += streams.back().events.size();
    }

    {
        std::ofstream out(cfg.out_dir / "events.csv");
        write_events_csv(streams, out);
    }
    {
        std::ofstream out(cfg.out_dir / "compression.csv");
        write_compression_csv(streams, out);
    }

    double min_rate = 1.0, max_rate = 0.0, sum_rate = 0.0;
    for (const EventStream& s : streams) {
        const double rate = compression_rate(s);
        min_rate = std::min(min_rate, rate);
        max_rate = std::max(max_rate, rate);
        sum_rate += rate;
    }
    const std::size_t total = corpus.test.rows() * corpus.test.cols();
    json section;
    section["variables"] = streams.size();
    section["samples_per_variable"] = corpus.test.rows();
    section["transmitted"] = transmitted;
    section["overall_rate"] = total ? 1.0 - static_cast<double>(transmitted) / total : 0.0;
    section["mean_rate"] = streams.empty() ? 0.0 : sum_rate / static_cast<double>(streams.size());
    section["min_rate"] = min_rate;
    section["max_rate"] = max_rate;
    section["margin_coverage"] = cfg.margin_coverage;
    state.summary["compression"] = std::move(section);
}

void run_fuse(PipelineState& state) {
    const PipelineConfig& cfg = state.cfg;
    const Corpus& corpus = state.raw_corpus();
    const DependencyMatrix matrix = dependency_matrix(corpus.test, cfg.mi_bins, cfg.workers);
    const std::vector<ThresholdStat> stats = dependency_stats(matrix, kStatThresholds);

    {
        std::ofstream out(cfg.out_dir / "mi_matrix.csv");
        write_matrix_csv(matrix, out);
    }
    {
        std::ofstream out(cfg.out_dir / "mi_stats.csv");
        write_stats_csv(stats, out);
    }

    json section;
    section["bins"] = matrix.bins;
    section["samples"] = matrix.samples;
    json jstats = json::array();
    for (const ThresholdStat& s : stats)
        jstats.push_back(
            {{"threshold", s.threshold}, {"count", s.count}, {"fraction", s.fraction}});
    section["stats"] = std::move(jstats);
    state.summary["fusion"] = std::move(section);
}

void run_mine(PipelineState& state) {
    const PipelineConfig& cfg = state.cfg;
    const LabeledFrame& train = state.mining_frame();
    const QuantGrid grid = build_grid(train, cfg.miner.cuts_per_feature);
    MiningParams params = cfg.miner;
    params.workers = cfg.workers;
    state.rules = std::make_unique<RuleSet>(mine_rules(train, grid, params));

    write_text_file(cfg.out_dir / "rules.json", rules_to_json(*state.rules));
    {
        std::ofstream out(cfg.out_dir / "rules.txt");
        write_rules_text(*state.rules, out);
    }

    std::vector<std::size_t> per_class(kModeCount, 0);
    for (const QuantRule& r : state.rules->rules)
        per_class[static_cast<std::size_t>(r.consequent)]++;
    json section;
    section["rules"] = state.rules->rules.size();
    section["rules_per_class"] = per_class;
    section["train_rows"] = train.rows();
    section["cuts_per_feature"] = params.cuts_per_feature;
    section["max_antecedents"] = params.max_antecedents;
    section["min_support"] = params.min_support;
    section["min_confidence"] = params.min_confidence;
    state.summary["mining"] = std::move(section);
}

void run_classify(PipelineState& state) {
    const PipelineConfig& cfg = state.cfg;
    const RuleSet& rules = state.ruleset();
    const Corpus& corpus = state.expanded_corpus();
    const ClassificationReport report = evaluate_ruleset(
        rules, corpus.test, cfg.fire_threshold, &state.mining_frame(), cfg.workers);

    write_text_file(cfg.out_dir / "metrics.json", report_to_json(report));
    {
        std::ofstream out(cfg.out_dir / "confusion.csv");
        write_confusion_csv(report, out);
    }
    state.summary["classification"] = json::parse(report_to_json(report));
}

void run_cover(PipelineState& state) {
    const PipelineConfig& cfg = state.cfg;
    const RuleSet& rules = state.ruleset();
    const LabeledFrame& frame =
        cfg.cover_on_test ? state.expanded_corpus().test : state.mining_frame();
    const CoverageUniverse universe = build_universe(rules, frame, cfg.workers);
    const CoverResult result = min_variable_cover(universe, cfg.cover_target, cfg.cover_mode);

    write_text_file(cfg.out_dir / "cover.json", cover_to_json(result));
    json section = json::parse(cover_to_json(result));
    section["universe_size"] = universe.universe_size;
    section["target"] = cfg.cover_target;
    section["frame"] = cfg.cover_on_test ? "test" : "train";
    state.summary["cover"] = std::move(section);
}

std::string render_report(const json& doc, const std::string& format) {
    if (format == "json") return doc.dump(2) + "\n";

    std::ostringstream out;
    out << "=== run report ===\n";
    if (doc.contains("ingest")) {
        const auto& s = doc["ingest"];
        out << "[ingest] train rows " << s.value("train_rows", 0) << ", test rows "
            << s.value("test_rows", 0) << ", features " << s.value("features", 0) << "\n";
    }
    if (doc.contains("compression")) {
        const auto& s = doc["compression"];
        out << "[compression] variables " << s.value("variables", 0) << ", transmitted "
            << s.value("transmitted", 0) << ", overall rate "
            << format_double(s.value("overall_rate", 0.0)) << "\n";
    }
    if (doc.contains("fusion") && doc["fusion"].contains("stats")) {
        out << "[fusion]";
        for (const auto& st : doc["fusion"]["stats"])
            out << "  >" << format_double(st.value("threshold", 0.0)) << ": "
                << st.value("count", 0) << " vars";
        out << "\n";
    }
    if (doc.contains("mining")) {
        const auto& s = doc["mining"];
        out << "[mining] " << s.value("rules", 0) << " non-dominated rules\n";
        if (s.contains("rules_per_class")) {
            out << "  mode : rules\n";
            const auto& counts = s["rules_per_class"];
            for (std::size_t c = 0; c < counts.size(); ++c)
                out << "  " << c << " : " << counts[c].get<std::size_t>() << "\n";
        }
    }
    if (doc.contains("classification")) {
        const auto& s = doc["classification"];
        out << "[classification] accuracy " << format_double(s.value("accuracy", 0.0))
            << ", decided accuracy "
            << format_double(s.value("accuracy_excluding_abstentions", 0.0))
            << ", false alarms " << format_double(s.value("false_alarm_rate", 0.0))
            << ", abstain " << format_double(s.value("abstain_rate", 0.0)) << "\n";
    }
    if (doc.contains("cover")) {
        const auto& s = doc["cover"];
        out << "[cover] " << s.value("cardinality", 0) << " variables reach coverage "
            << format_double(s.value("coverage", 0.0)) << " (" << s.value("mode", "")
            << ")\n";
        if (s.contains("variables")) {
            out << "  ";
            bool first = true;
            for (const auto& v : s["variables"]) {
                if (!first) out << ' ';
                out << v.get<std::string>();
                first = false;
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace

std::vector<int> PipelineConfig::effective_faults() const {
    return faults.empty() ? all_modes() : faults;
}

void PipelineConfig::validate() const {
    if (!(margin_coverage > 0.0) || margin_coverage > 1.0)
        throw InvalidArgumentError("margin_coverage must be in (0, 1]");
    if (mi_bins < 2) throw InvalidArgumentError("mi_bins must be at least 2");
    if (fire_threshold < 0) throw InvalidArgumentError("fire_threshold must be >= 0");
    if (!(cover_target > 0.0) || cover_target > 1.0)
        throw InvalidArgumentError("cover_target must be in (0, 1]");
    if (!(train_subsample > 0.0) || train_subsample > 1.0)
        throw InvalidArgumentError("train_subsample must be in (0, 1]");
    for (int lag : lags)
        if (lag <= 0) throw InvalidArgumentError("lags must be positive");
    for (int fault : faults)
        if (fault < 0 || fault >= kModeCount)
            throw InvalidArgumentError("fault ids must be in 0..21");
    for (const auto& [variable, bounds] : margin_overrides)
        if (bounds.first > bounds.second)
            throw InvalidArgumentError("margin override for " + variable +
                                       " has lower > upper");
    if (miner.cuts_per_feature < 2)
        throw InvalidArgumentError("cuts_per_feature must be at least 2");
    if (miner.max_antecedents < 1)
        throw InvalidArgumentError("max_antecedents must be at least 1");
    if (!(miner.min_support > 0.0) || miner.min_support > 1.0)
        throw InvalidArgumentError("min_support must be in (0, 1]");
    if (!(miner.min_confidence > 0.0) || miner.min_confidence > 1.0)
        throw InvalidArgumentError("min_confidence must be in (0, 1]");
}

std::string config_to_json(const PipelineConfig& config) {
    json doc;
    doc["data_dir"] = config.data_dir.string();
    doc["out_dir"] = config.out_dir.string();
    doc["faults"] = config.faults;
    doc["lags"] = config.lags;
    doc["margin_coverage"] = config.margin_coverage;
    doc["mi_bins"] = config.mi_bins;
    doc["miner"] = {{"cuts_per_feature", config.miner.cuts_per_feature},
                    {"max_antecedents", config.miner.max_antecedents},
                    {"min_support", config.miner.min_support},
                    {"min_confidence", config.miner.min_confidence}};
    if (!config.margin_overrides.empty()) {
        json overrides = json::object();
        for (const auto& [variable, bounds] : config.margin_overrides)
            overrides[variable] = {bounds.first, bounds.second};
        doc["margin_overrides"] = std::move(overrides);
    }
    doc["fire_threshold"] = config.fire_threshold;
    doc["cover_target"] = config.cover_target;
    doc["cover_mode"] = config.cover_mode == CoverMode::kExact ? "exact" : "greedy";
    doc["cover_on_test"] = config.cover_on_test;
    doc["workers"] = config.workers;
    doc["train_subsample"] = config.train_subsample;
    return doc.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& text) {
    const json doc = json::parse(text);
    PipelineConfig config;
    if (doc.contains("data_dir")) config.data_dir = doc.at("data_dir").get<std::string>();
    if (doc.contains("out_dir")) config.out_dir = doc.at("out_dir").get<std::string>();
    if (doc.contains("faults")) config.faults = doc.at("faults").get<std::vector<int>>();
    if (doc.contains("lags")) config.lags = doc.at("lags").get<std::vector<int>>();
    config.margin_coverage = doc.value("margin_coverage", config.margin_coverage);
    config.mi_bins = doc.value("mi_bins", config.mi_bins);
    if (doc.contains("miner")) {
        const auto& m = doc.at("miner");
        config.miner.cuts_per_feature = m.value("cuts_per_feature", config.miner.cuts_per_feature);
        config.miner.max_antecedents = m.value("max_antecedents", config.miner.max_antecedents);
        config.miner.min_support = m.value("min_support", config.miner.min_support);
        config.miner.min_confidence = m.value("min_confidence", config.miner.min_confidence);
    }
    config.fire_threshold = doc.value("fire_threshold", config.fire_threshold);
    config.cover_target = doc.value("cover_target", config.cover_target);
    if (doc.contains("cover_mode")) {
        const std::string mode = doc.at("cover_mode").get<std::string>();
        if (mode == "exact") config.cover_mode = CoverMode::kExact;
        else if (mode == "greedy") config.cover_mode = CoverMode::kGreedy;
        else throw InvalidArgumentError("unknown cover_mode '" + mode + "'");
    }
    config.cover_on_test = doc.value("cover_on_test", config.cover_on_test);
    config.workers = doc.value("workers", config.workers);
    config.train_subsample = doc.value("train_subsample", config.train_subsample);
    if (doc.contains("margin_overrides")) {
        for (const auto& [variable, bounds] : doc.at("margin_overrides").items()) {
            if (!bounds.is_array() || bounds.size() != 2)
                throw InvalidArgumentError("margin_overrides entries must be [lower, upper]");
            config.margin_overrides[variable] = {bounds[0].get<double>(),
                                                 bounds[1].get<double>()};
        }
    }
    return config;
}

std::string run_pipeline(const PipelineConfig& config, const std::vector<std::string>& stages) {
    config.validate();
    for (const std::string& s : stages) {
        if (std::find(kPipelineStages.begin(), kPipelineStages.end(), s) == kPipelineStages.end())
            throw InvalidArgumentError("unknown stage '" + s + "'");
    }
    std::filesystem::create_directories(config.out_dir);

    PipelineState state(config);
    using StageFn = void (*)(PipelineState&);
    const std::pair<const char*, StageFn> plan[] = {
        {"ingest", run_ingest},   {"compress", run_compress}, {"fuse", run_fuse},
        {"mine", run_mine},       {"classify", run_classify}, {"cover", run_cover},
    };
    for (const auto& [name, fn] : plan) {
        if (std::find(stages.begin(), stages.end(), name) == stages.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        std::cerr << "[tepminer] stage " << name << "...\n";
        try {
            fn(state);
        } catch (const std::exception& e) {
            throw Error(std::string("stage ") + name + ": " + e.what());
        }
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        std::cerr << "[tepminer] stage " << name << " done in " << elapsed.count() << " ms\n";
    }

    std::string summary = state.summary.dump(2) + "\n";
    if (stages.size() == kPipelineStages.size()) {
        bool all = true;
        for (const std::string& s : kPipelineStages)
            all = all && std::find(stages.begin(), stages.end(), s) != stages.end();
        if (all) write_text_file(config.out_dir / "summary.json", summary);
    }
    return summary;
}

std::string emit_report(const std::filesystem::path& out_dir, const std::string& format) {
    if (format != "json" && format != "text")
        throw InvalidArgumentError("unknown report format '" + format + "'");
    if (std::filesystem::exists(out_dir / "summary.json")) {
        const json doc = json::parse(read_text_file(out_dir / "summary.json"));
        return render_report(doc, format);
    }

    // Reassemble what the present artifacts allow.
    json doc = json::object();
    if (std::filesystem::exists(out_dir / "compression.csv")) {
        std::ifstream in(out_dir / "compression.csv");
        std::string line;
        std::getline(in, line);  // header
        std::size_t variables = 0, transmitted = 0, samples = 0;
        double min_rate = 1.0, max_rate = 0.0, sum_rate = 0.0;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string var, tx, total, rate;
            std::getline(ss, var, ',');
            std::getline(ss, tx, ',');
            std::getline(ss, total, ',');
            std::getline(ss, rate, ',');
            ++variables;
            transmitted += std::stoull(tx);
            samples = std::stoull(total);
            const double r = std::stod(rate);
            min_rate = std::min(min_rate, r);
            max_rate = std::max(max_rate, r);
            sum_rate += r;
        }
        json section;
        section["variables"] = variables;
        section["samples_per_variable"] = samples;
        section["transmitted"] = transmitted;
        const std::size_t total = variables * samples;
        section["overall_rate"] = total ? 1.0 - static_cast<double>(transmitted) / total : 0.0;
        section["mean_rate"] = variables ? sum_rate / static_cast<double>(variables) : 0.0;
        section["min_rate"] = min_rate;
        section["max_rate"] = max_rate;
        doc["compression"] = std::move(section);
    }
    if (std::filesystem::exists(out_dir / "mi_stats.csv")) {
        std::ifstream in(out_dir / "mi_stats.csv");
        std::string line;
        std::getline(in, line);
        json jstats = json::array();
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string t, c, f;
            std::getline(ss, t, ',');
            std::getline(ss, c, ',');
            std::getline(ss, f, ',');
            jstats.push_back({{"threshold", std::stod(t)},
                              {"count", std::stoull(c)},
                              {"fraction", std::stod(f)}});
        }
        doc["fusion"] = {{"stats", std::move(jstats)}};
    }
    if (std::filesystem::exists(out_dir / "rules.json")) {
        const RuleSet rules = rules_from_json(read_text_file(out_dir / "rules.json"));
        std::vector<std::size_t> per_class(kModeCount, 0);
        for (const QuantRule& r : rules.rules)
            per_class[static_cast<std::size_t>(r.consequent)]++;
        doc["mining"] = {{"rules", rules.rules.size()}, {"rules_per_class", per_class}};
    }
    if (std::filesystem::exists(out_dir / "metrics.json"))
        doc["classification"] = json::parse(read_text_file(out_dir / "metrics.json"));
    if (std::filesystem::exists(out_dir / "cover.json"))
        doc["cover"] = json::parse(read_text_file(out_dir / "cover.json"));
    return render_report(doc, format);
}

}  // namespace tep
