#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tep/errors.hpp"
#include "tep/fixture.hpp"
#include "tep/pipeline.hpp"

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw tep::MissingDataError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The config file (if any) provides the defaults; command-line flags
// override individual fields.
tep::PipelineConfig load_base_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config")
            return tep::config_from_json(read_file(argv[i + 1]));
    }
    return tep::PipelineConfig{};
}

void add_common_options(CLI::App* cmd, tep::PipelineConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file with pipeline settings");
    cmd->add_option("--data-dir", cfg.data_dir, "directory with dXX.dat / dXX_te.dat files");
    cmd->add_option("--out", cfg.out_dir, "artifact output directory");
    cmd->add_option("--faults", cfg.faults, "mode ids to load (default: all 0..21)")
        ->delimiter(',');
    cmd->add_option("--lags", cfg.lags, "lag offsets for difference features")->delimiter(',');
    cmd->add_option("--coverage", cfg.margin_coverage, "margin quantile coverage");
    cmd->add_option("--bins", cfg.mi_bins, "bins for the dependency estimator");
    cmd->add_option("--cuts", cfg.miner.cuts_per_feature, "quantile cuts per feature");
    cmd->add_option("--max-antecedents", cfg.miner.max_antecedents,
                    "largest antecedent feature-set size");
    cmd->add_option("--min-support", cfg.miner.min_support, "minimum rule support");
    cmd->add_option("--min-confidence", cfg.miner.min_confidence, "minimum rule confidence");
    cmd->add_option("--fire-threshold", cfg.fire_threshold,
                    "rules that must fire before the ensemble decides");
    cmd->add_option("--cover-target", cfg.cover_target, "coverage fraction for the variable cover");
    cmd->add_option("--cover-mode", [&cfg](const CLI::results_t& res) {
        if (res[0] == "exact") cfg.cover_mode = tep::CoverMode::kExact;
        else if (res[0] == "greedy") cfg.cover_mode = tep::CoverMode::kGreedy;
        else return false;
        return true;
    }, "cover search mode: greedy|exact");
    cmd->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
    cmd->add_option("--train-subsample", cfg.train_subsample,
                    "strided fraction of training rows used for mining");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-driven acquisition, dependency fusion and quantitative "
                 "rule mining for the Tennessee Eastman benchmark"};
    app.require_subcommand(1);

    tep::PipelineConfig cfg;
    try {
        cfg = load_base_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::string config_path;
    std::vector<std::string> stages = tep::kPipelineStages;
    std::string report_format = "text";

    CLI::App* pipeline = app.add_subcommand("pipeline", "run all stages and write summary.json");
    add_common_options(pipeline, cfg, config_path);
    pipeline->add_option("--stages", stages, "subset of stages to run")->delimiter(',');

    for (const std::string& stage : tep::kPipelineStages) {
        CLI::App* cmd = app.add_subcommand(stage, "run only the " + stage + " stage");
        add_common_options(cmd, cfg, config_path);
    }

    CLI::App* report = app.add_subcommand("report", "render a report from existing artifacts");
    report->add_option("--out", cfg.out_dir, "artifact directory to summarize");
    report->add_option("--format", report_format, "json|text");

    tep::FixtureSpec fixture_spec;
    std::string fixture_dir = "fixture";
    CLI::App* fixture = app.add_subcommand("fixture", "write a synthetic toy corpus");
    fixture->add_option("--out", fixture_dir, "target directory");
    fixture->add_option("--modes", fixture_spec.modes, "mode ids to generate")->delimiter(',');
    fixture->add_option("--train-rows", fixture_spec.train_rows, "rows per training file");
    fixture->add_option("--test-rows", fixture_spec.test_rows, "rows per test file");
    fixture->add_option("--seed", fixture_spec.seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fixture->parsed()) {
            tep::write_fixture_corpus(fixture_dir, fixture_spec);
            std::cerr << "[tepminer] fixture corpus written to " << fixture_dir << "\n";
            return 0;
        }
        if (report->parsed()) {
            std::cout << tep::emit_report(cfg.out_dir, report_format);
            return 0;
        }
        if (pipeline->parsed()) {
            tep::run_pipeline(cfg, stages);
            return 0;
        }
        for (const std::string& stage : tep::kPipelineStages) {
            if (app.get_subcommand(stage)->parsed()) {
                tep::run_pipeline(cfg, {stage});
                return 0;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "no subcommand selected\n";
    return 1;
}
