#pragma once

#include "mwtgc/graph.hpp"
#include "mwtgc/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mwtgc {

/// N x T matrix of 5-minute mean speeds on a gap-free timestamp grid.
struct SpeedSeries {
    Matrix values_kmh;                     // N x T
    std::vector<std::int64_t> timestamps;  // epoch seconds, 300 s apart
    std::vector<std::string> segment_names;
    int imputed_count = 0;

    Index segment_count() const { return values_kmh.rows(); }
    Index step_count() const { return values_kmh.cols(); }
};

constexpr int kStepsPerDay = 288; // 5-minute cadence
constexpr std::int64_t kStepSeconds = 300;

/// Train/validation/test boundaries in whole days, in that order.
struct SplitSpec {
    int train_days = 21;
    int val_days = 2;
    int test_days = 7;

    int train_steps() const { return train_days * kStepsPerDay; }
    int val_steps() const { return val_days * kStepsPerDay; }
    int test_steps() const { return test_days * kStepsPerDay; }
};

/// Scales speeds by the training standard deviation: unit variance keeps the
/// loss scale uniform across networks while speeds stay positive, so the
/// rectified graph-convolution output passes the full signal (a centered
/// encoding would zero out every below-mean reading). The training mean is
/// kept for reporting.
struct Normalizer {
    double mean = 0.0;
    double stddev = 1.0;

    double normalize(double kmh) const { return kmh / stddev; }
    double denormalize(double z) const { return z * stddev; }
    Matrix normalize(const Matrix& kmh) const { return kmh / stddev; }
    Matrix denormalize(const Matrix& z) const { return z * stddev; }
};

/// Fits on the training range only. Throws NumericError when the values are
/// constant (stddev would be zero).
Normalizer fit_normalizer(const Matrix& training_values);

/// Sliding stride-1 windows of (h input, t_p target) steps; `starts` hold the
/// index of each window's first input step. No window crosses a split boundary.
struct WindowSet {
    std::vector<int> starts;
};

/// Starts of all stride-1 windows of `window_len` steps inside [begin, end):
/// end - begin - window_len + 1 of them when the range is long enough.
WindowSet window_starts(int begin, int end, int window_len);

struct WindowDataset {
    int history_steps = 0; // h
    int horizon_steps = 0; // t_p
    int train_end = 0;     // exclusive step indices of each split
    int val_end = 0;
    int test_end = 0;
    WindowSet train;
    WindowSet val;
    WindowSet test;
};

WindowDataset window_dataset(const SpeedSeries& series, int h, int t_p, const SplitSpec& split);

/// Synthetic road network plus speed dynamics for desk-scale runs: relative
/// speeds relax toward free flow, diffuse between connected segments, dip with
/// a daily sinusoidal demand profile plus congestion shocks that spread along
/// edges, and carry seeded Gaussian noise.
struct SynthSpec {
    enum class Topology { Grid, Ring };
    Topology topology = Topology::Grid;
    int grid_rows = 5;
    int grid_cols = 6;
    int ring_size = 30;
    double spacing_m = 500.0;
    int days = 30;
    double diffusion = 0.2;         // neighbor coupling per step
    double demand_amplitude = 0.35; // peak fraction of free flow removed by demand
    double noise_std = 0.005;       // process noise on the latent relative speed
    double obs_noise_std = 0.06;    // measurement noise on the reported speeds
    double event_rate = 0.4;        // expected congestion shocks per segment per day
    double event_magnitude = 0.7;   // peak relative-speed dip of one shock
    std::uint64_t seed = 42;
    std::int64_t start_epoch = 1522540800; // 2018-04-01T00:00:00
};

struct SyntheticResult {
    RoadNetwork network;
    SpeedSeries speeds;
};

SyntheticResult generate_synthetic(const SynthSpec& spec);

/// Speed CSV with header `timestamp,<seg_id_1>,...,<seg_id_N>`. Columns must
/// match the network's segment names exactly (any order); unknown or missing
/// ids raise InputError listing the offenders. Gaps in the timestamp grid and
/// empty cells are imputed by per-segment linear interpolation (nearest value
/// at the ends) and counted.
SpeedSeries load_speeds(const std::string& path, const RoadNetwork& network);
void save_speeds(const SpeedSeries& series, const std::string& path);

std::int64_t parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

} // namespace mwtgc
