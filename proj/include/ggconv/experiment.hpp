#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ggconv/bho.hpp"
#include "ggconv/ingest.hpp"
#include "ggconv/nn.hpp"

namespace ggconv {

/// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

enum class ExperimentMode { Standard, GeometricRef, GeometricBho };

std::string_view to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(std::string_view name);

/// Everything a run needs, assembled from defaults, an optional JSON config
/// file, and command-line overrides (in that precedence order).
struct ExperimentConfig {
    std::string dataset;          // file path or "synthetic:<count>:<seed>"
    std::string format = "auto";  // jsonl | sdf | auto (by extension)
    std::string target_field;     // SDF data field carrying the target
    SplitSpec split{std::array<double, 3>{0.8, 0.1, 0.1}, std::nullopt, 0};
    ModelConfig model;
    ExperimentMode mode = ExperimentMode::Standard;
    PowerLawParams params;         // used by geometric-ref
    HyperparamSpace space;         // used by geometric-bho
    int trials = 20;
    std::vector<uint64_t> seeds = {0};
    std::string out_dir = "run";
};

/// Parses the JSON config document into cfg (missing keys keep their
/// current values). Throws ParseError on malformed content.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);

/// Loads a dataset per cfg (synthetic spec, JSONL, or SDF).
std::vector<Graph3D> load_dataset(const ExperimentConfig& cfg,
                                  std::vector<std::string>* warnings = nullptr);

/// Writes representation statistics (per-graph edge counts by kind and
/// distance histograms) to <out_dir>/stats.json.
int cmd_featurize(const ExperimentConfig& cfg);

/// Trains per mode across cfg.seeds and writes metrics.json plus one
/// checkpoint per seed to cfg.out_dir.
int cmd_train(const ExperimentConfig& cfg);

/// Runs the Bayesian optimization loop; appends one JSON line per trial to
/// <out_dir>/trials.jsonl (resuming after the highest recorded index when
/// the file already exists) and writes metrics.json with the best
/// configuration.
int cmd_bho(const ExperimentConfig& cfg);

/// Collects metrics.json from the run directories into a comparison table
/// (report.txt and report.csv in out_dir). When both standard and
/// geometric runs are present the report adds a directional comparison;
/// when the split sizes match a published benchmark layout it prints the
/// reference numbers alongside for context.
int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir);

}  // namespace ggconv
