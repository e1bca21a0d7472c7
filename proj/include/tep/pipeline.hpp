#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tep/acquisition.hpp"
#include "tep/cover.hpp"
#include "tep/rules.hpp"

namespace tep {

// Machine-readable knobs for the whole workflow; JSON round-trippable.
struct PipelineConfig {
    std::filesystem::path data_dir;
    std::filesystem::path out_dir = "out";
    std::vector<int> faults;      // empty = all modes 0..21
    std::vector<int> lags = {1, 2};
    double margin_coverage = 0.9;
    // Absolute [lower, upper] margins per variable, replacing the fitted
    // quantile interval for that variable.
    std::map<std::string, std::pair<double, double>> margin_overrides;
    int mi_bins = 16;
    MiningParams miner;
    int fire_threshold = 10;
    double cover_target = 0.85;
    CoverMode cover_mode = CoverMode::kGreedy;
    bool cover_on_test = false;    // coverage universe frame: train (default) or test
    unsigned workers = 0;          // 0 = hardware concurrency, applied to every stage
    double train_subsample = 1.0;  // strided row fraction used for mining

    std::vector<int> effective_faults() const;
    void validate() const;
};

std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const std::string& text);

inline const std::vector<std::string> kPipelineStages = {"ingest",  "compress", "fuse",
                                                         "mine",    "classify", "cover"};

// Runs the requested stages in canonical order, writing each stage's
// artifacts into config.out_dir. Later stages reload earlier artifacts
// when those stages are not part of this run. Returns the summary of the
// executed stages; summary.json is written only for a full run.
std::string run_pipeline(const PipelineConfig& config,
                         const std::vector<std::string>& stages = kPipelineStages);

// Renders a summary from the artifacts already present in out_dir.
// format is "json" or "text".
std::string emit_report(const std::filesystem::path& out_dir, const std::string& format);

}  // namespace tep
