#pragma once

#include "riskgraph/labels.hpp"
#include "riskgraph/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace riskgraph::pipeline {

/// Every stage parameter of a full run, flat-keyed so the JSON and TOML
/// renderings line up one to one. The canonical JSON form is the identity
/// that gets digested into every artifact the run writes.
struct PipelineConfig {
    std::string driver = "demo"; ///< identifier stamped into scene refs

    // input: a recorded CSV log, or a scenario to synthesize one from
    std::string input_csv;        ///< path; empty means synthesize
    std::string schema;           ///< column-name schema JSON path, empty = defaults
    std::string scenario;         ///< scenario JSON path, required when input_csv is empty
    std::uint64_t synth_seed = 1;

    std::string out_dir = "out";

    // ingest
    int smooth_span = 25;
    std::string smooth_channels = "all"; ///< "ax" | "all"

    // scene extraction
    int window = 50;
    double straight_tol = 0.02;

    // graph construction
    GridSpec grid;

    // kernels
    bool spgk_normalize = true;
    int nhgk_h = 3;
    int nhgk_bits = 16;
    std::uint64_t nhgk_seed = 7;

    // risk labeling
    std::string feature = "one"; ///< clustering feature set: "one" | "two"
    int k = 0;                   ///< fixed cluster count; 0 = silhouette argmax
    int k_min = 2;
    int k_max = 10;
    int kpca_components = 2; ///< projection width for feature "two"
    std::uint64_t label_seed = 0;

    // classification
    double C = 1.0;
    int folds = 5;
    std::uint64_t fold_seed = 0;

    /// ParameterError on out-of-range values or a missing input source.
    void check() const;

    /// Canonical rendering (sorted keys, 2-space indent) — the digest input.
    std::string to_json() const;
    std::string digest() const;

    static PipelineConfig from_json(const std::string& text);
    /// Flat `key = value` TOML subset: strings, integers, floats, booleans,
    /// comments. Tables/arrays are rejected.
    static PipelineConfig from_toml(const std::string& text);
    /// Dispatch on extension (.json/.toml), sniffing the first character
    /// for extensionless files.
    static PipelineConfig load(const std::filesystem::path& path);
};

/// Clustering stage shared by the `label` subcommand and the full run:
/// negative-response scenes are clustered on the chosen feature set
/// (feature "two" goes through normalize + kernel-PCA first), levels are
/// assigned, and the per-k diagnostics table is returned alongside.
struct LabelStageResult {
    labels::LabelsFile file;
    std::vector<labels::KTableRow> table;
};
LabelStageResult label_stage(const std::vector<Scene>& scenes, const std::string& feature,
                             int k, int k_min, int k_max, int kpca_components,
                             std::uint64_t seed, const std::string& digest);

/// The side-by-side outcome of one full run.
struct RunReport {
    std::string digest;
    std::string driver;
    int scenes = 0;
    int k = 0;
    int level_count = 0;
    double accuracy_spgk = 0.0;
    double accuracy_nhgk = 0.0;
    double accuracy_vrm = 0.0;
};

std::string write_run_report_json(const RunReport& r);
RunReport read_run_report_json(const std::string& text);

/// Execute synth/ingest -> extract -> label -> graphs -> gram -> train ->
/// report in order, persisting every intermediate under cfg.out_dir. An
/// existing intermediate whose embedded digest matches the current config
/// is reused; a mismatching digest aborts the run unless `force`. Any
/// stage failure rethrows with the stage name prefixed.
RunReport run_pipeline(const PipelineConfig& cfg, bool force = false);

/// Write the plot-feed CSVs from a completed run's artifacts: k-selection
/// curve, per-level response-ax values, per-model confusion cells, and the
/// model accuracy bars. Missing artifacts raise IoError.
void emit_figure_data(const PipelineConfig& cfg);

} // namespace riskgraph::pipeline
