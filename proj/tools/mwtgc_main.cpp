// Command-line entry point: graph construction, weight generation, synthetic
// data, training, evaluation, significance testing, ablation, and weight
// inspection. Every command writes its artifacts under --output (resolved
// against $MWTGC_OUTPUT_ROOT when relative) and is deterministic for a fixed
// seed.

#include "mwtgc/csv.hpp"
#include "mwtgc/data.hpp"
#include "mwtgc/error.hpp"
#include "mwtgc/experiment.hpp"
#include "mwtgc/graph.hpp"
#include "mwtgc/metrics.hpp"
#include "mwtgc/model.hpp"
#include "mwtgc/svg.hpp"
#include "mwtgc/training.hpp"
#include "mwtgc/weights.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace mwtgc;

namespace {

std::string resolve_output_dir(const std::string& dir) {
    fs::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("MWTGC_OUTPUT_ROOT")) {
            p = fs::path(root) / p;
        }
    }
    fs::create_directories(p);
    return p.string();
}

std::vector<WeightKind> parse_kinds(const std::string& text) {
    std::vector<WeightKind> kinds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            kinds.push_back(weight_kind_from_string(item));
        }
    }
    return kinds;
}

std::vector<std::vector<WeightKind>> parse_combinations(const std::string& text) {
    std::vector<std::vector<WeightKind>> combos;
    std::stringstream ss(text);
    std::string group;
    while (std::getline(ss, group, ';')) {
        if (!group.empty()) {
            combos.push_back(parse_kinds(group));
        }
    }
    return combos;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out << text;
    if (text.empty() || text.back() != '\n') {
        out << '\n';
    }
}

void write_adjacency_triplets(const std::string& path, const AdjacencyMatrix& m) {
    csv::Table table;
    table.header = {"row", "col", "value"};
    for (int row = 0; row < m.outerSize(); ++row) {
        for (AdjacencyMatrix::InnerIterator it(m, row); it; ++it) {
            table.rows.push_back({std::to_string(it.row()), std::to_string(it.col()),
                                  std::to_string(it.value())});
        }
    }
    csv::write_file(path, table);
}

void write_pattern_triplets(const std::string& path, const SparsePatternMatrix& m) {
    csv::Table table;
    table.header = {"row", "col", "value"};
    for (Index k = 0; k < m.nnz(); ++k) {
        table.rows.push_back({std::to_string(m.row_indices()[static_cast<std::size_t>(k)]),
                              std::to_string(m.col_indices()[static_cast<std::size_t>(k)]),
                              csv::format_double(m.values()[k])});
    }
    csv::write_file(path, table);
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::string output_dir;
};

ExperimentConfig make_config(const CommonFlags& flags) {
    ExperimentConfig config;
    if (!flags.config_path.empty()) {
        merge_config_json(config, flags.config_path);
    }
    if (flags.seed) {
        config.train.seed = *flags.seed;
    }
    if (flags.workers) {
        config.workers = *flags.workers;
    }
    if (!flags.output_dir.empty()) {
        config.output_dir = flags.output_dir;
    }
    config.output_dir = resolve_output_dir(config.output_dir);
    return config;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--seed", flags.seed, "Seed override");
    cmd->add_option("--workers", flags.workers, "Worker thread count");
    cmd->add_option("--output", flags.output_dir, "Output directory");
}

int cmd_build_graph(const std::string& topology_dir, const ExperimentConfig& config) {
    const RoadNetwork network = load_network(topology_dir);
    const AdjacencyPair rank1 = build_adjacency(network);
    save_network(network, config.output_dir + "/topology");
    long long edges = rank1.outflow.nonZeros();
    for (int k = 1; k <= config.max_rank; ++k) {
        const AdjacencyPair at_k = rank_k_adjacency(rank1, k);
        write_adjacency_triplets(config.output_dir + "/adjacency_outflow_k" + std::to_string(k) +
                                     ".csv",
                                 at_k.outflow);
        write_adjacency_triplets(config.output_dir + "/adjacency_inflow_k" + std::to_string(k) +
                                     ".csv",
                                 at_k.inflow);
    }
    nlohmann::json summary;
    summary["segments"] = network.size();
    summary["edges"] = edges;
    summary["max_rank"] = config.max_rank;
    write_text(config.output_dir + "/graph_summary.json", summary.dump(1));
    std::cout << "graph: " << network.size() << " segments, " << edges << " edges, ranks 1.."
              << config.max_rank << " written to " << config.output_dir << "\n";
    return 0;
}

int cmd_gen_weights(const std::string& topology_dir, const ExperimentConfig& config) {
    const RoadNetwork network = load_network(topology_dir);
    const WeightedAdjacencySet wset =
        build_weight_set(network, config.max_rank, config.kinds, config.weights);
    for (std::size_t i = 0; i < wset.count(); ++i) {
        const WeightKey& key = wset.keys()[i];
        write_pattern_triplets(config.output_dir + "/weight_" + to_string(key) + ".csv",
                               wset.matrix(i));
    }
    nlohmann::json manifest;
    manifest["c"] = static_cast<int>(wset.count()) / wset.max_rank();
    manifest["k"] = wset.max_rank();
    manifest["matrix_count"] = wset.count();
    nlohmann::json kinds = nlohmann::json::array();
    for (const WeightKind kind : config.kinds) {
        kinds.push_back(to_string(kind));
    }
    manifest["kinds"] = std::move(kinds);
    manifest["sigma_m"] = config.weights.sigma_m;
    manifest["angle_floor_rad"] = config.weights.angle_floor_rad;
    manifest["category_norm_kmh"] = config.weights.resolved_category_norm(network);
    manifest["angle_theta_is_delta"] = config.weights.angle_theta_is_delta;
    write_text(config.output_dir + "/weights_manifest.json", manifest.dump(1));
    std::cout << "weights: " << wset.count() << " matrices written to " << config.output_dir
              << "\n";
    return 0;
}

int cmd_synth_data(const SynthSpec& spec, const ExperimentConfig& config) {
    const SyntheticResult result = generate_synthetic(spec);
    save_network(result.network, config.output_dir);
    save_speeds(result.speeds, config.output_dir + "/speeds.csv");
    std::cout << "synthetic: " << result.network.size() << " segments, "
              << result.speeds.step_count() << " steps written to " << config.output_dir << "\n";
    return 0;
}

int cmd_train(const std::string& topology_dir, const std::string& speeds_csv,
              ExperimentConfig config, bool no_graph_conv, bool dump_config_only, bool plots) {
    if (!topology_dir.empty()) {
        config.topology_dir = topology_dir;
    }
    if (!speeds_csv.empty()) {
        config.speeds_csv = speeds_csv;
    }
    if (config.topology_dir.empty() || config.speeds_csv.empty()) {
        throw InputError("train: --topology and --speeds (or config entries) are required");
    }
    if (no_graph_conv) {
        config.use_graph_conv = false;
    }
    const RoadNetwork network = load_network(config.topology_dir);
    const SpeedSeries series = load_speeds(config.speeds_csv, network);
    if (series.imputed_count > 0) {
        std::cerr << "note: imputed " << series.imputed_count << " missing speed cells\n";
    }
    if (dump_config_only) {
        std::cout << dump_config_json(config, &network) << "\n";
        return 0;
    }
    const std::string log_path = config.output_dir + "/training_log.csv";
    const TrainRunResult run = run_training(config, network, series, config.kinds,
                                            config.use_graph_conv, config.train.seed, log_path);
    const std::string checkpoint_path = config.output_dir + "/checkpoint.json";
    save_checkpoint(run.checkpoint, checkpoint_path);
    write_text(config.output_dir + "/resolved_config.json", dump_config_json(config, &network));

    nlohmann::json summary;
    summary["epochs_run"] = run.state.epochs_run;
    summary["best_epoch"] = run.state.best_epoch;
    summary["best_val_rmse"] = run.state.best_val_rmse;
    summary["early_stopped"] = run.state.early_stopped;
    summary["diverged"] = run.state.diverged;
    summary["seconds"] = run.state.seconds_elapsed;
    write_text(config.output_dir + "/train_summary.json", summary.dump(1));

    if (plots) {
        svg::write_line_chart(config.output_dir + "/loss_curve.svg", "training loss",
                              run.state.train_loss_history);
        svg::write_line_chart(config.output_dir + "/val_rmse.svg", "validation RMSE (km/h)",
                              run.state.val_rmse_history);
    }
    std::cout << "trained " << run.state.epochs_run << " epochs (best " << run.state.best_epoch
              << ", val RMSE " << run.state.best_val_rmse << " km/h), checkpoint at "
              << checkpoint_path << "\n";
    if (run.state.diverged) {
        std::cerr << "warning: training diverged; checkpoint holds the best finite state\n";
        return 2;
    }
    return 0;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& topology_dir,
                 const std::string& speeds_csv, const std::string& model_name,
                 ExperimentConfig config, bool plots) {
    const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    const RoadNetwork network = load_network(topology_dir);
    const SpeedSeries series = load_speeds(speeds_csv, network);
    const WindowDataset windows =
        window_dataset(series, checkpoint.model.hyper.history_steps,
                       checkpoint.model.hyper.horizon_steps, config.split);
    const std::string name = model_name.empty() ? "mwtgc" : model_name;
    const EvaluationResult model_eval = evaluate_on_test(name, checkpoint, series, windows,
                                                         config.horizons, config.train.batch_size);
    const EvaluationResult ha_eval = evaluate_ha_on_test(series, windows, config.horizons);
    write_report_csv(config.output_dir + "/report.csv", {model_eval, ha_eval});
    for (const int h : config.horizons) {
        write_segment_rmse_csv(config.output_dir + "/segment_rmse_" + name + "_h" +
                                   std::to_string(h * 5) + ".csv",
                               model_eval, series.segment_names, h);
    }
    write_window_losses_csv(config.output_dir + "/window_losses_" + name + ".csv", model_eval);
    write_window_losses_csv(config.output_dir + "/window_losses_ha.csv", ha_eval);
    if (plots) {
        std::vector<std::string> labels;
        std::vector<double> values;
        for (const HorizonReport& r : model_eval.horizons) {
            labels.push_back(std::to_string(r.horizon_steps * 5) + "min");
            values.push_back(r.rmse_kmh);
        }
        svg::write_bar_chart(config.output_dir + "/rmse_bars.svg", name + " RMSE (km/h)", labels,
                             values);
    }
    for (const HorizonReport& r : model_eval.horizons) {
        std::cout << name << " @" << r.horizon_steps * 5 << "min: RMSE " << r.rmse_kmh
                  << " MAPE " << r.mape_percent << "% MAD " << r.mad_kmh << " MASE " << r.mase
                  << "\n";
    }
    return 0;
}

int cmd_dm_test(const std::string& losses_a, const std::string& losses_b, int lag,
                const ExperimentConfig& config) {
    const auto [name_a, series_a] = read_window_losses_csv(losses_a);
    const auto [name_b, series_b] = read_window_losses_csv(losses_b);
    const int effective_lag = lag >= 0 ? lag : std::max(0, config.horizon_steps - 1);
    const DmResult result = dm_test(series_a, series_b, effective_lag);
    csv::Table table;
    table.header = {"model_a", "model_b", "statistic", "p_value"};
    table.rows.push_back({name_a, name_b, csv::format_double(result.statistic),
                          csv::format_double(result.p_value)});
    csv::write_file(config.output_dir + "/dm_test.csv", table);
    std::cout << "DM " << name_a << " vs " << name_b << ": statistic " << result.statistic
              << ", p " << result.p_value << " (lag " << result.lag << ")\n";
    return 0;
}

int cmd_ablate(const std::string& topology_dir, const std::string& speeds_csv,
               const std::string& combinations_text, ExperimentConfig config,
               bool identical_seeds) {
    if (!topology_dir.empty()) {
        config.topology_dir = topology_dir;
    }
    if (!speeds_csv.empty()) {
        config.speeds_csv = speeds_csv;
    }
    const RoadNetwork network = load_network(config.topology_dir);
    const SpeedSeries series = load_speeds(config.speeds_csv, network);
    std::vector<std::vector<WeightKind>> combos = parse_combinations(combinations_text);
    if (combos.empty()) {
        throw InputError("ablate: no combinations given (use 'plain;plain,speed_limit_ratio')");
    }
    if (config.trials < 2) {
        std::cerr << "warning: trials < 2, std columns will be empty\n";
    }
    const AblationTable table = run_ablation(config, network, series, combos, identical_seeds);
    write_ablation_csv(config.output_dir + "/ablation.csv", table);
    write_ablation_trials_csv(config.output_dir + "/ablation_trials.csv", table);
    for (const AblationRow& row : table.rows) {
        if (row.failed) {
            std::cout << combination_label(row.combination) << ": FAILED ("
                      << row.failure_reason << ")\n";
        } else {
            const MetricStats& s = row.stats.at("rmse").back();
            std::cout << combination_label(row.combination) << ": RMSE@"
                      << table.horizons.back() * 5 << "min " << s.mean << " +/- " << s.stddev
                      << (row.best ? "  <- best" : "") << "\n";
        }
    }
    return 0;
}

int cmd_inspect_weights(const std::string& checkpoint_path, const std::string& nodes_text,
                        const ExperimentConfig& config) {
    const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    if (!checkpoint.model.hyper.use_graph_conv) {
        throw InputError("inspect-weights: checkpoint was trained without graph convolution");
    }
    std::vector<Index> nodes;
    {
        std::stringstream ss(nodes_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) {
                continue;
            }
            auto it = std::find(checkpoint.segment_names.begin(), checkpoint.segment_names.end(),
                                item);
            if (it != checkpoint.segment_names.end()) {
                nodes.push_back(it - checkpoint.segment_names.begin());
                continue;
            }
            try {
                const long long idx = csv::parse_int(item, "inspect-weights node list");
                if (idx < 0 || idx >= static_cast<long long>(checkpoint.segment_names.size())) {
                    throw InputError("");
                }
                nodes.push_back(static_cast<Index>(idx));
            } catch (const InputError&) {
                throw InputError("inspect-weights: unknown node id '" + item + "'");
            }
        }
    }
    if (nodes.empty()) {
        throw InputError("inspect-weights: node subset is empty");
    }
    for (const auto& entry : checkpoint.model.graph_conv) {
        csv::Table table;
        table.header = {"row", "col", "value"};
        for (const auto& slot : weight_product_subset(entry, nodes)) {
            table.rows.push_back({std::to_string(slot.row), std::to_string(slot.col),
                                  csv::format_double(slot.value)});
        }
        csv::write_file(config.output_dir + "/product_" + to_string(entry.key) + ".csv", table);
    }
    std::cout << "wrote " << checkpoint.model.graph_conv.size() << " weight-product matrices for "
              << nodes.size() << " nodes to " << config.output_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-weight traffic graph convolution forecasting toolkit"};
    app.require_subcommand(1);

    // build-graph
    auto* build_graph = app.add_subcommand("build-graph", "Load a topology and emit adjacency ranks");
    CommonFlags bg_flags;
    std::string bg_topology;
    add_common(build_graph, bg_flags);
    build_graph->add_option("--topology", bg_topology, "Topology directory")->required();

    // gen-weights
    auto* gen_weights = app.add_subcommand("gen-weights", "Emit clipped weighted adjacency matrices");
    CommonFlags gw_flags;
    std::string gw_topology;
    std::string gw_kinds;
    add_common(gen_weights, gw_flags);
    gen_weights->add_option("--topology", gw_topology, "Topology directory")->required();
    gen_weights->add_option("--kinds", gw_kinds, "Comma-separated weight kinds");

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "Generate a synthetic network and speed series");
    CommonFlags sd_flags;
    std::string sd_topology = "grid";
    SynthSpec sd_spec;
    add_common(synth, sd_flags);
    synth->add_option("--shape", sd_topology, "grid or ring");
    synth->add_option("--rows", sd_spec.grid_rows, "Grid rows");
    synth->add_option("--cols", sd_spec.grid_cols, "Grid cols");
    synth->add_option("--ring-size", sd_spec.ring_size, "Ring segment count");
    synth->add_option("--days", sd_spec.days, "Days of data");
    synth->add_option("--diffusion", sd_spec.diffusion, "Neighbor coupling");
    synth->add_option("--amplitude", sd_spec.demand_amplitude, "Daily demand amplitude");
    synth->add_option("--noise", sd_spec.noise_std, "Noise std");
    synth->add_option("--event-rate", sd_spec.event_rate, "Congestion shocks per segment per day");
    synth->add_option("--event-magnitude", sd_spec.event_magnitude, "Peak relative shock dip");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
    CommonFlags tr_flags;
    std::string tr_topology, tr_speeds, tr_kinds;
    bool tr_no_gc = false, tr_dump = false, tr_plots = false;
    add_common(train_cmd, tr_flags);
    train_cmd->add_option("--topology", tr_topology, "Topology directory");
    train_cmd->add_option("--speeds", tr_speeds, "Speed CSV");
    train_cmd->add_option("--kinds", tr_kinds, "Comma-separated weight kinds");
    train_cmd->add_flag("--no-graph-conv", tr_no_gc, "Bypass the graph convolution (baseline)");
    train_cmd->add_flag("--dump-config", tr_dump, "Print the resolved configuration and exit");
    train_cmd->add_flag("--plots", tr_plots, "Write SVG charts");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on the test split");
    CommonFlags ev_flags;
    std::string ev_checkpoint, ev_topology, ev_speeds, ev_name;
    bool ev_plots = false;
    add_common(eval_cmd, ev_flags);
    eval_cmd->add_option("--checkpoint", ev_checkpoint, "Checkpoint JSON")->required();
    eval_cmd->add_option("--topology", ev_topology, "Topology directory")->required();
    eval_cmd->add_option("--speeds", ev_speeds, "Speed CSV")->required();
    eval_cmd->add_option("--name", ev_name, "Model name used in reports");
    eval_cmd->add_flag("--plots", ev_plots, "Write SVG charts");

    // dm-test
    auto* dm_cmd = app.add_subcommand("dm-test", "Diebold-Mariano test of two loss series");
    CommonFlags dm_flags;
    std::string dm_a, dm_b;
    int dm_lag = -1;
    add_common(dm_cmd, dm_flags);
    dm_cmd->add_option("--losses-a", dm_a, "window_losses CSV of model A")->required();
    dm_cmd->add_option("--losses-b", dm_b, "window_losses CSV of model B")->required();
    dm_cmd->add_option("--lag", dm_lag, "Autocovariance truncation lag (default t_p - 1)");

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "Repeated trials over weight combinations");
    CommonFlags ab_flags;
    std::string ab_topology, ab_speeds, ab_combos;
    bool ab_same_seeds = false;
    add_common(ablate_cmd, ab_flags);
    ablate_cmd->add_option("--topology", ab_topology, "Topology directory");
    ablate_cmd->add_option("--speeds", ab_speeds, "Speed CSV");
    ablate_cmd->add_option("--combinations", ab_combos,
                           "Semicolon-separated kind lists, e.g. 'plain;plain,speed_limit_ratio'")
        ->required();
    ablate_cmd->add_flag("--identical-seeds", ab_same_seeds, "Use the same seed for every trial");

    // inspect-weights
    auto* inspect_cmd = app.add_subcommand("inspect-weights",
                                           "Export learned weight products for a node subset");
    CommonFlags iw_flags;
    std::string iw_checkpoint, iw_nodes;
    add_common(inspect_cmd, iw_flags);
    inspect_cmd->add_option("--checkpoint", iw_checkpoint, "Checkpoint JSON")->required();
    inspect_cmd->add_option("--nodes", iw_nodes, "Comma-separated node ids or names")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (build_graph->parsed()) {
            return cmd_build_graph(bg_topology, make_config(bg_flags));
        }
        if (gen_weights->parsed()) {
            ExperimentConfig config = make_config(gw_flags);
            if (!gw_kinds.empty()) {
                config.kinds = parse_kinds(gw_kinds);
            }
            return cmd_gen_weights(gw_topology, config);
        }
        if (synth->parsed()) {
            ExperimentConfig config = make_config(sd_flags);
            if (sd_topology == "ring") {
                sd_spec.topology = SynthSpec::Topology::Ring;
            } else if (sd_topology != "grid") {
                throw InputError("synth-data: --shape must be grid or ring");
            }
            if (sd_flags.seed) {
                sd_spec.seed = *sd_flags.seed;
            }
            return cmd_synth_data(sd_spec, config);
        }
        if (train_cmd->parsed()) {
            ExperimentConfig config = make_config(tr_flags);
            if (!tr_kinds.empty()) {
                config.kinds = parse_kinds(tr_kinds);
            }
            return cmd_train(tr_topology, tr_speeds, std::move(config), tr_no_gc, tr_dump,
                             tr_plots);
        }
        if (eval_cmd->parsed()) {
            return cmd_evaluate(ev_checkpoint, ev_topology, ev_speeds, ev_name,
                                make_config(ev_flags), ev_plots);
        }
        if (dm_cmd->parsed()) {
            return cmd_dm_test(dm_a, dm_b, dm_lag, make_config(dm_flags));
        }
        if (ablate_cmd->parsed()) {
            return cmd_ablate(ab_topology, ab_speeds, ab_combos, make_config(ab_flags),
                              ab_same_seeds);
        }
        if (inspect_cmd->parsed()) {
            return cmd_inspect_weights(iw_checkpoint, iw_nodes, make_config(iw_flags));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
