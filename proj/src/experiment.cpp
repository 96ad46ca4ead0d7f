#include "mwtgc/experiment.hpp"

#include "mwtgc/csv.hpp"
#include "mwtgc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace mwtgc {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (kinds.empty()) {
        throw std::invalid_argument("config: weight kinds must not be empty");
    }
    if (max_rank < 1 || history_steps < 1 || horizon_steps < 1 || c_out < 1) {
        throw std::invalid_argument("config: max_rank, history, horizon, c_out must be >= 1");
    }
    if (h_size_multiplier < 1 && h_size_override < 1) {
        throw std::invalid_argument("config: h_size multiplier or override must be >= 1");
    }
    if (trials < 1 || workers < 1) {
        throw std::invalid_argument("config: trials and workers must be >= 1");
    }
    for (const int h : horizons) {
        if (h < 1 || h > horizon_steps) {
            throw std::invalid_argument("config: reported horizons must lie in [1, t_p]");
        }
    }
    train.validate();
}

namespace {

std::vector<WeightKind> kinds_from_json(const json& arr) {
    std::vector<WeightKind> kinds;
    for (const auto& item : arr) {
        kinds.push_back(weight_kind_from_string(item.get<std::string>()));
    }
    return kinds;
}

} // namespace

void merge_config_json(ExperimentConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("config parse error in " + path + ": " + e.what());
    }
    static const std::set<std::string> known = {
        "topology_dir", "speeds_csv", "output_dir", "split", "kinds", "max_rank",
        "history_steps", "horizon_steps", "c_out", "h_size_multiplier", "h_size_override",
        "use_graph_conv", "wgc_init_noise", "weights", "train", "horizons", "trials", "workers"};
    for (const auto& [key, value] : j.items()) {
        if (known.count(key) == 0) {
            throw InputError(path + ": unknown config key '" + key + "'");
        }
    }
    if (j.contains("topology_dir")) config.topology_dir = j["topology_dir"].get<std::string>();
    if (j.contains("speeds_csv")) config.speeds_csv = j["speeds_csv"].get<std::string>();
    if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("split")) {
        const json& s = j["split"];
        if (s.contains("train_days")) config.split.train_days = s["train_days"].get<int>();
        if (s.contains("val_days")) config.split.val_days = s["val_days"].get<int>();
        if (s.contains("test_days")) config.split.test_days = s["test_days"].get<int>();
    }
    if (j.contains("kinds")) config.kinds = kinds_from_json(j["kinds"]);
    if (j.contains("max_rank")) config.max_rank = j["max_rank"].get<int>();
    if (j.contains("history_steps")) config.history_steps = j["history_steps"].get<int>();
    if (j.contains("horizon_steps")) config.horizon_steps = j["horizon_steps"].get<int>();
    if (j.contains("c_out")) config.c_out = j["c_out"].get<int>();
    if (j.contains("h_size_multiplier")) config.h_size_multiplier = j["h_size_multiplier"].get<int>();
    if (j.contains("h_size_override")) config.h_size_override = j["h_size_override"].get<int>();
    if (j.contains("use_graph_conv")) config.use_graph_conv = j["use_graph_conv"].get<bool>();
    if (j.contains("wgc_init_noise")) config.wgc_init_noise = j["wgc_init_noise"].get<double>();
    if (j.contains("weights")) {
        const json& w = j["weights"];
        if (w.contains("sigma_m")) config.weights.sigma_m = w["sigma_m"].get<double>();
        if (w.contains("angle_floor_rad"))
            config.weights.angle_floor_rad = w["angle_floor_rad"].get<double>();
        if (w.contains("category_norm_kmh"))
            config.weights.category_norm_kmh = w["category_norm_kmh"].get<double>();
        if (w.contains("angle_theta_is_delta"))
            config.weights.angle_theta_is_delta = w["angle_theta_is_delta"].get<bool>();
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        if (t.contains("learning_rate")) config.train.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("decay_factor")) config.train.decay_factor = t["decay_factor"].get<double>();
        if (t.contains("decay_every")) config.train.decay_every = t["decay_every"].get<int>();
        if (t.contains("batch_size")) config.train.batch_size = t["batch_size"].get<int>();
        if (t.contains("max_epochs")) config.train.max_epochs = t["max_epochs"].get<int>();
        if (t.contains("early_stop_patience"))
            config.train.early_stop_patience = t["early_stop_patience"].get<int>();
        if (t.contains("early_stop_min_delta"))
            config.train.early_stop_min_delta = t["early_stop_min_delta"].get<double>();
        if (t.contains("rmsprop_smoothing"))
            config.train.rmsprop_smoothing = t["rmsprop_smoothing"].get<double>();
        if (t.contains("rmsprop_epsilon"))
            config.train.rmsprop_epsilon = t["rmsprop_epsilon"].get<double>();
        if (t.contains("seed")) config.train.seed = t["seed"].get<std::uint64_t>();
    }
    if (j.contains("horizons")) config.horizons = j["horizons"].get<std::vector<int>>();
    if (j.contains("trials")) config.trials = j["trials"].get<int>();
    if (j.contains("workers")) config.workers = j["workers"].get<int>();
}

ExperimentConfig load_experiment_config(const std::string& path) {
    ExperimentConfig config;
    merge_config_json(config, path);
    return config;
}

std::string dump_config_json(const ExperimentConfig& config, const RoadNetwork* network) {
    json j;
    j["topology_dir"] = config.topology_dir;
    j["speeds_csv"] = config.speeds_csv;
    j["output_dir"] = config.output_dir;
    j["split"] = {{"train_days", config.split.train_days},
                  {"val_days", config.split.val_days},
                  {"test_days", config.split.test_days}};
    json kinds = json::array();
    for (const WeightKind k : config.kinds) {
        kinds.push_back(to_string(k));
    }
    j["kinds"] = std::move(kinds);
    j["max_rank"] = config.max_rank;
    j["history_steps"] = config.history_steps;
    j["horizon_steps"] = config.horizon_steps;
    j["c_out"] = config.c_out;
    j["h_size_multiplier"] = config.h_size_multiplier;
    j["h_size_override"] = config.h_size_override;
    j["use_graph_conv"] = config.use_graph_conv;
    j["wgc_init_noise"] = config.wgc_init_noise;
    j["weights"] = {{"sigma_m", config.weights.sigma_m},
                    {"angle_floor_rad", config.weights.angle_floor_rad},
                    {"category_norm_kmh", config.weights.category_norm_kmh},
                    {"angle_theta_is_delta", config.weights.angle_theta_is_delta}};
    j["train"] = {{"learning_rate", config.train.learning_rate},
                  {"decay_factor", config.train.decay_factor},
                  {"decay_every", config.train.decay_every},
                  {"batch_size", config.train.batch_size},
                  {"max_epochs", config.train.max_epochs},
                  {"early_stop_patience", config.train.early_stop_patience},
                  {"early_stop_min_delta", config.train.early_stop_min_delta},
                  {"rmsprop_smoothing", config.train.rmsprop_smoothing},
                  {"rmsprop_epsilon", config.train.rmsprop_epsilon},
                  {"seed", config.train.seed}};
    j["horizons"] = config.horizons;
    j["trials"] = config.trials;
    j["workers"] = config.workers;
    if (network != nullptr) {
        j["resolved"] = {{"n_segments", network->size()},
                         {"h_size", config.resolved_h_size(network->size())},
                         {"category_norm_kmh", config.weights.resolved_category_norm(*network)}};
    }
    return j.dump(1);
}

TrainRunResult run_training(const ExperimentConfig& config, const RoadNetwork& network,
                            const SpeedSeries& series, const std::vector<WeightKind>& kinds,
                            bool use_graph_conv, std::uint64_t seed, const std::string& log_path) {
    config.validate();
    const int n = network.size();
    ModelHyper hyper;
    hyper.history_steps = config.history_steps;
    hyper.horizon_steps = config.horizon_steps;
    hyper.max_rank = config.max_rank;
    hyper.c_out = config.c_out;
    hyper.h_size = config.resolved_h_size(n);
    hyper.use_graph_conv = use_graph_conv;

    SeededRng rng(seed);
    ModelParameters model;
    if (use_graph_conv) {
        const WeightedAdjacencySet wset = build_weight_set(network, config.max_rank, kinds,
                                                           config.weights);
        InitOptions init;
        init.wgc_noise = config.wgc_init_noise;
        model = init_model(wset, n, hyper, rng, init);
    } else {
        model = init_model_without_graph_conv(n, hyper, rng);
    }

    const WindowDataset windows =
        window_dataset(series, config.history_steps, config.horizon_steps, config.split);
    const Matrix train_block = series.values_kmh.leftCols(windows.train_end);
    const Normalizer normalizer = fit_normalizer(train_block);

    TrainConfig train_config = config.train;
    train_config.seed = seed;
    train_config.log_path = log_path;
    TrainState state = train(model, series, windows, normalizer, train_config);

    TrainRunResult result;
    result.checkpoint.model = std::move(model);
    result.checkpoint.kinds = kinds;
    result.checkpoint.weight_config = config.weights;
    result.checkpoint.weight_config.category_norm_kmh =
        config.weights.resolved_category_norm(network);
    result.checkpoint.normalizer = normalizer;
    result.checkpoint.seed = seed;
    for (const RoadSegment& s : network.segments) {
        result.checkpoint.segment_names.push_back(s.name);
    }
    result.state = std::move(state);
    return result;
}

namespace {

struct HorizonCollector {
    std::vector<int> horizons;
    // per horizon: N x (num windows) predictions and actuals in km/h
    std::vector<Matrix> pred;
    std::vector<Matrix> actual;
    std::vector<double> window_mse;

    HorizonCollector(const std::vector<int>& hs, Index n, std::size_t window_count)
        : horizons(hs) {
        for (std::size_t i = 0; i < horizons.size(); ++i) {
            pred.push_back(Matrix(n, static_cast<Index>(window_count)));
            actual.push_back(Matrix(n, static_cast<Index>(window_count)));
        }
        window_mse.resize(window_count, 0.0);
    }
};

std::vector<HorizonReport> reports_from_collector(const HorizonCollector& c) {
    std::vector<HorizonReport> reports;
    for (std::size_t i = 0; i < c.horizons.size(); ++i) {
        HorizonReport r;
        r.horizon_steps = c.horizons[i];
        r.rmse_kmh = rmse(c.pred[i], c.actual[i]);
        const MapeResult mp = mape(c.pred[i], c.actual[i]);
        r.mape_percent = mp.percent;
        r.mape_excluded = mp.excluded;
        r.mad_kmh = mad(c.pred[i], c.actual[i]);
        const MaseResult ms = mase(c.pred[i], c.actual[i]);
        r.mase = ms.value;
        r.mase_excluded_segments = ms.excluded_segments;
        r.segment_rmse = per_segment_rmse(c.pred[i], c.actual[i]);
        reports.push_back(std::move(r));
    }
    return reports;
}

} // namespace

EvaluationResult evaluate_on_test(const std::string& model_name, const Checkpoint& checkpoint,
                                  const SpeedSeries& series, const WindowDataset& windows,
                                  const std::vector<int>& horizons, int batch_size) {
    const ModelParameters& model = checkpoint.model;
    if (series.segment_count() != model.n_segments) {
        throw InputError("evaluate: series has " + std::to_string(series.segment_count()) +
                         " segments, checkpoint expects " + std::to_string(model.n_segments));
    }
    for (Index i = 0; i < series.segment_count(); ++i) {
        if (series.segment_names[static_cast<std::size_t>(i)] !=
            checkpoint.segment_names[static_cast<std::size_t>(i)]) {
            throw InputError("evaluate: segment order mismatch at index " + std::to_string(i) +
                             " ('" + series.segment_names[static_cast<std::size_t>(i)] +
                             "' vs checkpoint '" +
                             checkpoint.segment_names[static_cast<std::size_t>(i)] + "')");
        }
    }
    const int h = model.hyper.history_steps;
    const int max_h = *std::max_element(horizons.begin(), horizons.end());
    const Matrix normalized = checkpoint.normalizer.normalize(series.values_kmh);
    const auto& starts = windows.test.starts;
    HorizonCollector collector(horizons, series.segment_count(), starts.size());

    std::vector<Matrix> inputs;
    for (std::size_t begin = 0; begin < starts.size(); begin += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(starts.size(), begin + static_cast<std::size_t>(batch_size));
        const Index batch = static_cast<Index>(end - begin);
        inputs.assign(static_cast<std::size_t>(h), Matrix(batch, series.segment_count()));
        for (std::size_t b = begin; b < end; ++b) {
            for (int t = 0; t < h; ++t) {
                inputs[static_cast<std::size_t>(t)].row(static_cast<Index>(b - begin)) =
                    normalized.col(starts[b] + t).transpose();
            }
        }
        ad::Tape tape;
        const TapedModel staged = stage_parameters(tape, model);
        const std::vector<ad::Var> preds = forward_batch(tape, model, staged, inputs);
        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            const int step = horizons[hi];
            const Matrix pred_kmh =
                checkpoint.normalizer.denormalize(tape.value(preds[static_cast<std::size_t>(step - 1)]));
            for (std::size_t b = begin; b < end; ++b) {
                const Index col = static_cast<Index>(b);
                collector.pred[hi].col(col) = pred_kmh.row(static_cast<Index>(b - begin)).transpose();
                collector.actual[hi].col(col) =
                    series.values_kmh.col(starts[b] + h + step - 1);
            }
        }
        const Matrix max_pred =
            checkpoint.normalizer.denormalize(tape.value(preds[static_cast<std::size_t>(max_h - 1)]));
        for (std::size_t b = begin; b < end; ++b) {
            const Vector err = max_pred.row(static_cast<Index>(b - begin)).transpose() -
                               series.values_kmh.col(starts[b] + h + max_h - 1);
            collector.window_mse[b] = err.squaredNorm() / static_cast<double>(err.size());
        }
    }

    EvaluationResult result;
    result.model_name = model_name;
    result.horizons = reports_from_collector(collector);
    result.window_mse = std::move(collector.window_mse);
    return result;
}

EvaluationResult evaluate_ha_on_test(const SpeedSeries& series, const WindowDataset& windows,
                                     const std::vector<int>& horizons) {
    const int h = windows.history_steps;
    const int max_h = *std::max_element(horizons.begin(), horizons.end());
    const auto& starts = windows.test.starts;
    HorizonCollector collector(horizons, series.segment_count(), starts.size());
    for (std::size_t b = 0; b < starts.size(); ++b) {
        const Vector last = series.values_kmh.col(starts[b] + h - 1);
        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            const int step = horizons[hi];
            collector.pred[hi].col(static_cast<Index>(b)) = last;
            collector.actual[hi].col(static_cast<Index>(b)) =
                series.values_kmh.col(starts[b] + h + step - 1);
        }
        const Vector err = last - series.values_kmh.col(starts[b] + h + max_h - 1);
        collector.window_mse[b] = err.squaredNorm() / static_cast<double>(err.size());
    }
    EvaluationResult result;
    result.model_name = "ha";
    result.horizons = reports_from_collector(collector);
    result.window_mse = std::move(collector.window_mse);
    return result;
}

void write_report_csv(const std::string& path, const std::vector<EvaluationResult>& results) {
    csv::Table table;
    table.header = {"model", "horizon_min", "rmse", "mape", "mad", "mase"};
    for (const EvaluationResult& r : results) {
        for (const HorizonReport& h : r.horizons) {
            table.rows.push_back({r.model_name, std::to_string(h.horizon_steps * 5),
                                  csv::format_double(h.rmse_kmh),
                                  csv::format_double(h.mape_percent),
                                  csv::format_double(h.mad_kmh), csv::format_double(h.mase)});
        }
    }
    csv::write_file(path, table);
}

void write_segment_rmse_csv(const std::string& path, const EvaluationResult& result,
                            const std::vector<std::string>& segment_names, int horizon_steps) {
    const HorizonReport* report = nullptr;
    for (const HorizonReport& h : result.horizons) {
        if (h.horizon_steps == horizon_steps) {
            report = &h;
        }
    }
    if (report == nullptr) {
        throw std::invalid_argument("write_segment_rmse_csv: horizon not evaluated");
    }
    csv::Table table;
    table.header = {"segment_id", "rmse"};
    for (Index i = 0; i < report->segment_rmse.size(); ++i) {
        table.rows.push_back({segment_names[static_cast<std::size_t>(i)],
                              csv::format_double(report->segment_rmse[i])});
    }
    csv::write_file(path, table);
}

void write_window_losses_csv(const std::string& path, const EvaluationResult& result) {
    csv::Table table;
    table.header = {"model", "window", "mse"};
    for (std::size_t w = 0; w < result.window_mse.size(); ++w) {
        table.rows.push_back({result.model_name, std::to_string(w),
                              csv::format_double(result.window_mse[w])});
    }
    csv::write_file(path, table);
}

std::pair<std::string, std::vector<double>> read_window_losses_csv(const std::string& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header != std::vector<std::string>{"model", "window", "mse"}) {
        throw InputError(path + ": expected header model,window,mse");
    }
    if (table.rows.empty()) {
        throw InputError(path + ": no loss rows");
    }
    std::string name = table.rows.front()[0];
    std::vector<double> losses;
    for (const auto& row : table.rows) {
        if (row[0] != name) {
            throw InputError(path + ": mixed model names in one loss file");
        }
        losses.push_back(csv::parse_double(row[2], path));
    }
    return {std::move(name), std::move(losses)};
}

std::string combination_label(const std::vector<WeightKind>& kinds) {
    std::string label;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (i > 0) {
            label += '+';
        }
        label += to_string(kinds[i]);
    }
    return label;
}

namespace {

MetricStats stats_over(const std::vector<double>& values) {
    MetricStats s;
    if (values.empty()) {
        return s;
    }
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double sq = 0.0;
        for (const double v : values) {
            sq += (v - s.mean) * (v - s.mean);
        }
        s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return s;
}

} // namespace

AblationTable run_ablation(const ExperimentConfig& config, const RoadNetwork& network,
                           const SpeedSeries& series,
                           const std::vector<std::vector<WeightKind>>& combinations,
                           bool identical_seeds) {
    if (combinations.empty()) {
        throw std::invalid_argument("run_ablation: need at least one combination");
    }
    config.validate();
    const WindowDataset windows =
        window_dataset(series, config.history_steps, config.horizon_steps, config.split);

    AblationTable table;
    table.horizons = config.horizons;
    table.rows.resize(combinations.size());
    for (std::size_t c = 0; c < combinations.size(); ++c) {
        table.rows[c].combination = combinations[c];
        table.rows[c].trials = config.trials;
        table.rows[c].trial_records.resize(static_cast<std::size_t>(config.trials));
    }

    struct Job {
        std::size_t combo;
        int trial;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < combinations.size(); ++c) {
        for (int t = 0; t < config.trials; ++t) {
            jobs.push_back({c, t});
        }
    }

    std::mutex mutex;
    std::size_t next_job = 0;
    auto worker = [&]() {
        while (true) {
            std::size_t job_index;
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (next_job >= jobs.size()) {
                    return;
                }
                job_index = next_job++;
            }
            const Job job = jobs[job_index];
            const std::uint64_t seed = identical_seeds
                                           ? config.train.seed
                                           : config.train.seed + static_cast<std::uint64_t>(job.trial);
            try {
                const TrainRunResult run = run_training(config, network, series,
                                                        combinations[job.combo], true, seed);
                EvaluationResult eval =
                    evaluate_on_test(combination_label(combinations[job.combo]), run.checkpoint,
                                     series, windows, config.horizons, config.train.batch_size);
                std::lock_guard<std::mutex> lock(mutex);
                auto& record =
                    table.rows[job.combo].trial_records[static_cast<std::size_t>(job.trial)];
                record.seed = seed;
                record.horizons = std::move(eval.horizons);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mutex);
                table.rows[job.combo].failed = true;
                table.rows[job.combo].failure_reason = e.what();
            }
        }
    };
    const int thread_count = std::min<int>(config.workers, static_cast<int>(jobs.size()));
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < thread_count; ++i) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) {
            t.join();
        }
    }

    static const char* metric_names[4] = {"rmse", "mape", "mad", "mase"};
    for (AblationRow& row : table.rows) {
        if (row.failed) {
            continue;
        }
        for (std::size_t hi = 0; hi < table.horizons.size(); ++hi) {
            std::vector<double> values[4];
            for (const auto& record : row.trial_records) {
                const HorizonReport& report = record.horizons[hi];
                values[0].push_back(report.rmse_kmh);
                values[1].push_back(report.mape_percent);
                values[2].push_back(report.mad_kmh);
                values[3].push_back(report.mase);
            }
            for (int m = 0; m < 4; ++m) {
                row.stats[metric_names[m]].push_back(stats_over(values[m]));
            }
        }
    }

    // best = lowest mean RMSE at the longest horizon
    double best_rmse = std::numeric_limits<double>::infinity();
    std::size_t best_index = table.rows.size();
    for (std::size_t c = 0; c < table.rows.size(); ++c) {
        const AblationRow& row = table.rows[c];
        if (row.failed) {
            continue;
        }
        const double r = row.stats.at("rmse").back().mean;
        if (r < best_rmse) {
            best_rmse = r;
            best_index = c;
        }
    }
    if (best_index < table.rows.size()) {
        table.rows[best_index].best = true;
    }
    return table;
}

void write_ablation_csv(const std::string& path, const AblationTable& table) {
    csv::Table out;
    out.header = {"combination", "horizon_min", "trials", "rmse_mean", "rmse_std",
                  "mape_mean",   "mape_std",    "mad_mean", "mad_std",  "mase_mean",
                  "mase_std",    "best",        "status"};
    for (const AblationRow& row : table.rows) {
        const std::string label = combination_label(row.combination);
        if (row.failed) {
            out.rows.push_back({label, "", std::to_string(row.trials), "", "", "", "", "", "",
                                "", "", "0", "failed: " + row.failure_reason});
            continue;
        }
        for (std::size_t hi = 0; hi < table.horizons.size(); ++hi) {
            auto stat = [&row, hi](const char* name) {
                return row.stats.at(name)[hi];
            };
            auto std_field = [&row](const MetricStats& s) {
                return row.trials >= 2 ? csv::format_double(s.stddev) : std::string();
            };
            out.rows.push_back({label, std::to_string(table.horizons[hi] * 5),
                                std::to_string(row.trials),
                                csv::format_double(stat("rmse").mean), std_field(stat("rmse")),
                                csv::format_double(stat("mape").mean), std_field(stat("mape")),
                                csv::format_double(stat("mad").mean), std_field(stat("mad")),
                                csv::format_double(stat("mase").mean), std_field(stat("mase")),
                                row.best ? "1" : "0", "ok"});
        }
    }
    csv::write_file(path, out);
}

void write_ablation_trials_csv(const std::string& path, const AblationTable& table) {
    csv::Table out;
    out.header = {"combination", "trial", "seed", "horizon_min", "rmse", "mape", "mad", "mase"};
    for (const AblationRow& row : table.rows) {
        if (row.failed) {
            continue;
        }
        const std::string label = combination_label(row.combination);
        for (std::size_t t = 0; t < row.trial_records.size(); ++t) {
            const auto& record = row.trial_records[t];
            for (const HorizonReport& report : record.horizons) {
                out.rows.push_back({label, std::to_string(t), std::to_string(record.seed),
                                    std::to_string(report.horizon_steps * 5),
                                    csv::format_double(report.rmse_kmh),
                                    csv::format_double(report.mape_percent),
                                    csv::format_double(report.mad_kmh),
                                    csv::format_double(report.mase)});
            }
        }
    }
    csv::write_file(path, out);
}

} // namespace mwtgc
