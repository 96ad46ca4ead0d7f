#include "mwtgc/training.hpp"

#include "mwtgc/csv.hpp"
#include "mwtgc/error.hpp"
#include "mwtgc/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace mwtgc {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !(decay_factor > 0.0 && decay_factor <= 1.0)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be positive and "
                                    "decay_factor in (0, 1]");
    }
    if (decay_every < 1 || batch_size < 1 || max_epochs < 1 || early_stop_patience < 1) {
        throw std::invalid_argument("TrainConfig: decay_every, batch_size, max_epochs, "
                                    "early_stop_patience must be >= 1");
    }
    if (!(rmsprop_smoothing > 0.0 && rmsprop_smoothing < 1.0) || !(rmsprop_epsilon > 0.0)) {
        throw std::invalid_argument("TrainConfig: rmsprop_smoothing in (0,1), epsilon > 0");
    }
    if (early_stop_min_delta < 0.0) {
        throw std::invalid_argument("TrainConfig: early_stop_min_delta must be >= 0");
    }
}

double lr_for_epoch(const TrainConfig& config, int epoch) {
    if (epoch < 1) {
        throw std::invalid_argument("lr_for_epoch: epochs are 1-based");
    }
    const int decays = (epoch - 1) / config.decay_every;
    return config.learning_rate * std::pow(config.decay_factor, decays);
}

double l2_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw std::invalid_argument("l2_loss: shape mismatch " + std::to_string(pred.rows()) +
                                    "x" + std::to_string(pred.cols()) + " vs " +
                                    std::to_string(target.rows()) + "x" +
                                    std::to_string(target.cols()));
    }
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

RmspropState RmspropState::like(const std::vector<Matrix*>& params) {
    RmspropState state;
    state.accumulators.reserve(params.size());
    for (const Matrix* p : params) {
        state.accumulators.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
    return state;
}

void rmsprop_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                  RmspropState& state, double lr, const TrainConfig& config) {
    if (params.size() != grads.size() || params.size() != state.accumulators.size()) {
        throw std::invalid_argument("rmsprop_step: parameter/gradient/state count mismatch");
    }
    const double rho = config.rmsprop_smoothing;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!grads[i].allFinite()) {
            throw NumericError("rmsprop_step: non-finite gradient for parameter " +
                               std::to_string(i));
        }
        Matrix& v = state.accumulators[i];
        v = rho * v + (1.0 - rho) * grads[i].cwiseProduct(grads[i]);
        params[i]->array() -=
            lr * grads[i].array() / (v.array().sqrt() + config.rmsprop_epsilon);
    }
}

namespace {

// Gathers window steps into B x N matrices: inputs[t](b, :) is the speed row
// at window_start[b] + t.
void gather_batch(const Matrix& normalized, const std::vector<int>& starts, std::size_t begin,
                  std::size_t end, int h, int t_p, std::vector<Matrix>& inputs,
                  std::vector<Matrix>& targets) {
    const Index batch = static_cast<Index>(end - begin);
    const Index n = normalized.rows();
    inputs.assign(static_cast<std::size_t>(h), Matrix(batch, n));
    targets.assign(static_cast<std::size_t>(t_p), Matrix(batch, n));
    for (std::size_t b = begin; b < end; ++b) {
        const int s = starts[b];
        const Index row = static_cast<Index>(b - begin);
        for (int t = 0; t < h; ++t) {
            inputs[static_cast<std::size_t>(t)].row(row) = normalized.col(s + t).transpose();
        }
        for (int t = 0; t < t_p; ++t) {
            targets[static_cast<std::size_t>(t)].row(row) =
                normalized.col(s + h + t).transpose();
        }
    }
}

} // namespace

double dataset_rmse(const ModelParameters& model, const SpeedSeries& series,
                    const WindowSet& window_set, int h, int t_p, const Normalizer& normalizer,
                    int batch_size) {
    const Matrix normalized = normalizer.normalize(series.values_kmh);
    double sq_sum = 0.0;
    double count = 0.0;
    std::vector<Matrix> inputs;
    std::vector<Matrix> targets;
    for (std::size_t begin = 0; begin < window_set.starts.size();
         begin += static_cast<std::size_t>(batch_size)) {
        const std::size_t end =
            std::min(window_set.starts.size(), begin + static_cast<std::size_t>(batch_size));
        gather_batch(normalized, window_set.starts, begin, end, h, t_p, inputs, targets);
        ad::Tape tape;
        const TapedModel staged = stage_parameters(tape, model);
        const std::vector<ad::Var> preds = forward_batch(tape, model, staged, inputs);
        for (std::size_t t = 0; t < preds.size(); ++t) {
            const Matrix pred_kmh = normalizer.denormalize(tape.value(preds[t]));
            const Matrix target_kmh = normalizer.denormalize(targets[t]);
            sq_sum += (pred_kmh - target_kmh).squaredNorm();
            count += static_cast<double>(pred_kmh.size());
        }
    }
    return std::sqrt(sq_sum / count);
}

TrainState train(ModelParameters& model, const SpeedSeries& series, const WindowDataset& windows,
                 const Normalizer& normalizer, const TrainConfig& config) {
    config.validate();
    if (windows.train.starts.empty() || windows.val.starts.empty()) {
        throw std::invalid_argument("train: train and validation splits must be non-empty");
    }
    const auto t_begin = std::chrono::steady_clock::now();
    const Matrix normalized = normalizer.normalize(series.values_kmh);
    const int h = windows.history_steps;
    const int t_p = windows.horizon_steps;

    std::ofstream log;
    if (!config.log_path.empty()) {
        log.open(config.log_path);
        if (!log) {
            throw InputError("cannot write training log: " + config.log_path);
        }
        log << "epoch,train_loss,val_rmse,lr,seconds\n";
    }

    SeededRng rng(config.seed);
    std::vector<Matrix*> params = model.param_ptrs();
    RmspropState opt_state = RmspropState::like(params);

    TrainState state;
    std::vector<Matrix> best_params;
    auto snapshot = [&params]() {
        std::vector<Matrix> copy;
        copy.reserve(params.size());
        for (const Matrix* p : params) {
            copy.push_back(*p);
        }
        return copy;
    };
    auto restore = [&params](const std::vector<Matrix>& saved) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            *params[i] = saved[i];
        }
    };

    std::vector<int> order = windows.train.starts;
    std::vector<Matrix> inputs;
    std::vector<Matrix> targets;
    state.best_val_rmse = std::numeric_limits<double>::infinity();

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const double lr = lr_for_epoch(config, epoch);
        rng.shuffle(order);
        double loss_sum = 0.0;
        int batch_count = 0;
        bool aborted = false;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            gather_batch(normalized, order, begin, end, h, t_p, inputs, targets);
            try {
                ad::Tape tape;
                const TapedModel staged = stage_parameters(tape, model);
                const std::vector<ad::Var> preds = forward_batch(tape, model, staged, inputs);
                const ad::Var loss = prediction_loss(tape, preds, targets);
                const double loss_value = tape.value(loss)(0, 0);
                if (!std::isfinite(loss_value)) {
                    throw NumericError("train: non-finite loss");
                }
                tape.backward(loss);
                const std::vector<Matrix> grads = collect_gradients(tape, staged);
                rmsprop_step(params, grads, opt_state, lr, config);
                loss_sum += loss_value;
                ++batch_count;
            } catch (const NumericError&) {
                aborted = true;
                break;
            }
        }
        if (aborted) {
            state.diverged = true;
            break;
        }

        const double train_loss = loss_sum / std::max(batch_count, 1);
        const double val_rmse = dataset_rmse(model, series, windows.val, h, t_p, normalizer,
                                             config.batch_size);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
        state.epochs_run = epoch;
        state.train_loss_history.push_back(train_loss);
        state.val_rmse_history.push_back(val_rmse);
        state.lr_history.push_back(lr);
        if (log) {
            log << epoch << ',' << csv::format_double(train_loss) << ','
                << csv::format_double(val_rmse) << ',' << csv::format_double(lr) << ','
                << csv::format_double(seconds) << '\n';
            log.flush();
        }
        if (config.verbose) {
            std::cerr << "epoch " << epoch << " train_loss " << train_loss << " val_rmse "
                      << val_rmse << " lr " << lr << "\n";
        }

        if (val_rmse < state.best_val_rmse - config.early_stop_min_delta) {
            state.best_val_rmse = val_rmse;
            state.best_epoch = epoch;
            best_params = snapshot();
        } else if (epoch - state.best_epoch >= config.early_stop_patience) {
            state.early_stopped = true;
            break;
        }
    }

    if (!best_params.empty()) {
        restore(best_params);
    }
    state.seconds_elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
    return state;
}

} // namespace mwtgc
