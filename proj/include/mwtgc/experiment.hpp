#pragma once

#include "mwtgc/data.hpp"
#include "mwtgc/metrics.hpp"
#include "mwtgc/model.hpp"
#include "mwtgc/training.hpp"
#include "mwtgc/weights.hpp"

#include <map>
#include <string>
#include <vector>

namespace mwtgc {

/// Everything one run needs; defaults mirror the reference experimental setup
/// (h = 12, t_p = 12, k = 3, c_out = 4, h_size = 2N, batch 50, lr 1e-3 with
/// stepped decay).
struct ExperimentConfig {
    std::string topology_dir;
    std::string speeds_csv;
    std::string output_dir = "out";
    SplitSpec split;

    std::vector<WeightKind> kinds = {WeightKind::Plain, WeightKind::SpeedLimitRatio};
    int max_rank = 3;
    int history_steps = 12;
    int horizon_steps = 12;
    int c_out = 4;
    int h_size_multiplier = 2; // h_size = multiplier * N unless overridden
    int h_size_override = 0;
    bool use_graph_conv = true;
    double wgc_init_noise = 0.05;

    WeightConfig weights;
    TrainConfig train;
    std::vector<int> horizons = {6, 9, 12};
    int trials = 3;
    int workers = 1;

    int resolved_h_size(int n_segments) const {
        return h_size_override > 0 ? h_size_override : h_size_multiplier * n_segments;
    }
    void validate() const;
};

/// Reads a JSON config file over the defaults. Unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::string& path);
void merge_config_json(ExperimentConfig& config, const std::string& path);

/// Resolved settings as JSON text (stable key order). When a network is given,
/// h_size and the category norm are resolved against it.
std::string dump_config_json(const ExperimentConfig& config, const RoadNetwork* network);

struct TrainRunResult {
    Checkpoint checkpoint;
    TrainState state;
};

/// Builds the weight set (when the graph convolution is enabled), initializes
/// a model from `seed`, and trains it on the series.
TrainRunResult run_training(const ExperimentConfig& config, const RoadNetwork& network,
                            const SpeedSeries& series, const std::vector<WeightKind>& kinds,
                            bool use_graph_conv, std::uint64_t seed,
                            const std::string& log_path = {});

/// Test-split evaluation: one report per requested horizon, plus the per-window
/// MSE series at the longest horizon (Diebold-Mariano input).
struct EvaluationResult {
    std::string model_name;
    std::vector<HorizonReport> horizons;
    std::vector<double> window_mse; // km/h^2, per test window at max horizon
};

EvaluationResult evaluate_on_test(const std::string& model_name, const Checkpoint& checkpoint,
                                  const SpeedSeries& series, const WindowDataset& windows,
                                  const std::vector<int>& horizons, int batch_size);

EvaluationResult evaluate_ha_on_test(const SpeedSeries& series, const WindowDataset& windows,
                                     const std::vector<int>& horizons);

void write_report_csv(const std::string& path, const std::vector<EvaluationResult>& results);
void write_segment_rmse_csv(const std::string& path, const EvaluationResult& result,
                            const std::vector<std::string>& segment_names, int horizon_steps);
void write_window_losses_csv(const std::string& path, const EvaluationResult& result);

/// window_losses CSV back in: {model name, series}.
std::pair<std::string, std::vector<double>> read_window_losses_csv(const std::string& path);

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0; // sample std; 0 when trials < 2
};

struct AblationRow {
    std::vector<WeightKind> combination;
    int trials = 0;
    bool failed = false;
    std::string failure_reason;
    bool best = false;
    // metric name -> per-horizon stats, horizons ascending
    std::map<std::string, std::vector<MetricStats>> stats;
    // per trial & horizon raw metric values, for the per-trial report
    struct TrialRecord {
        std::uint64_t seed = 0;
        std::vector<HorizonReport> horizons;
    };
    std::vector<TrialRecord> trial_records;
};

struct AblationTable {
    std::vector<int> horizons;
    std::vector<AblationRow> rows;
};

/// `trials` independent seeded runs per combination (seed, seed+1, ... or the
/// same seed everywhere when identical_seeds is set), evaluated on the test
/// split. The row with the lowest mean RMSE at the longest horizon is flagged
/// best. Trials run on up to config.workers threads.
AblationTable run_ablation(const ExperimentConfig& config, const RoadNetwork& network,
                           const SpeedSeries& series,
                           const std::vector<std::vector<WeightKind>>& combinations,
                           bool identical_seeds);

void write_ablation_csv(const std::string& path, const AblationTable& table);
void write_ablation_trials_csv(const std::string& path, const AblationTable& table);

std::string combination_label(const std::vector<WeightKind>& kinds);

} // namespace mwtgc
