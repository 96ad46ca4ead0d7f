#pragma once

#include "mwtgc/data.hpp"
#include "mwtgc/model.hpp"
#include "mwtgc/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mwtgc {

struct TrainConfig {
    double learning_rate = 1e-3;
    double decay_factor = 0.7;  // multiplied in every decay_every epochs
    int decay_every = 5;
    int batch_size = 50;
    int max_epochs = 300;
    int early_stop_patience = 10;        // epochs without validation improvement
    double early_stop_min_delta = 1e-4;  // km/h a new best must beat the old one by
    double rmsprop_smoothing = 0.9;
    double rmsprop_epsilon = 1e-8;
    std::uint64_t seed = 42;
    std::string log_path;        // optional epoch,train_loss,val_rmse,lr,seconds CSV
    bool verbose = false;

    void validate() const;
};

/// Scheduled learning rate for a 1-based epoch index.
double lr_for_epoch(const TrainConfig& config, int epoch);

/// Mean of squared differences over all entries.
double l2_loss(const Matrix& pred, const Matrix& target);

/// Per-parameter squared-gradient accumulators.
struct RmspropState {
    std::vector<Matrix> accumulators;

    static RmspropState like(const std::vector<Matrix*>& params);
};

/// v <- rho*v + (1-rho)*g^2;  theta <- theta - lr*g/(sqrt(v) + eps).
/// Throws NumericError on non-finite gradients.
void rmsprop_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                  RmspropState& state, double lr, const TrainConfig& config);

struct TrainState {
    int epochs_run = 0;
    int best_epoch = 0;
    double best_val_rmse = 0.0;
    bool early_stopped = false;
    bool diverged = false;
    std::vector<double> train_loss_history; // normalized-space loss per epoch
    std::vector<double> val_rmse_history;   // km/h
    std::vector<double> lr_history;
    double seconds_elapsed = 0.0;
};

/// Mini-batch training: seeded shuffle each epoch, stepped LR decay, early
/// stopping on validation RMSE (km/h). On return `model` holds the parameters
/// of the best validation epoch. A non-finite loss aborts with the best
/// parameters so far and sets `diverged`.
TrainState train(ModelParameters& model, const SpeedSeries& series, const WindowDataset& windows,
                 const Normalizer& normalizer, const TrainConfig& config);

/// Validation/test RMSE in km/h over all horizon steps, batched forward.
double dataset_rmse(const ModelParameters& model, const SpeedSeries& series,
                    const WindowSet& window_set, int h, int t_p, const Normalizer& normalizer,
                    int batch_size);

} // namespace mwtgc
