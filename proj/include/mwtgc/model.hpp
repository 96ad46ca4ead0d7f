#pragma once

#include "mwtgc/autodiff.hpp"
#include "mwtgc/data.hpp"
#include "mwtgc/rng.hpp"
#include "mwtgc/sparse_pattern.hpp"
#include "mwtgc/types.hpp"
#include "mwtgc/weights.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mwtgc {

/// One (kind, direction, rank) slice of the graph convolution: the clipped
/// weighted adjacency, fixed, and the learnable per-edge parameters on the
/// same pattern (diagonal included).
struct GraphConvEntry {
    WeightKey key;
    SparsePatternMatrix wtilde;
    Matrix wgc; // nnz x 1
};

/// Per-node linear map from the ck concatenated convolution features to
/// c_out features, shared across nodes. Row-vector convention: out = in * gamma.
struct DrcKernel {
    Matrix gamma; // ck x c_out
    Matrix bias;  // 1 x c_out
};

/// LSTM gate parameters, row-vector convention (x: B x in, w: in x h_size).
struct LstmCell {
    Matrix w_input_in, w_forget_in, w_output_in, w_cell_in;             // in x h_size
    Matrix w_input_hidden, w_forget_hidden, w_output_hidden, w_cell_hidden; // h_size x h_size
    Matrix b_input, b_forget, b_output, b_cell;                         // 1 x h_size
};

struct ModelHyper {
    int history_steps = 12;  // encoder input length
    int horizon_steps = 12;  // decoder output length
    int max_rank = 3;
    int c_out = 4;
    int h_size = 0;
    bool use_graph_conv = true;

    void validate() const;
};

struct ModelParameters {
    ModelHyper hyper;
    int n_segments = 0;
    std::vector<GraphConvEntry> graph_conv; // concatenation order
    DrcKernel drc;
    // bypass mode: per-node affine lift of the raw speeds to c_out features,
    // shared across nodes, no cross-node mixing
    Matrix input_proj_w; // 1 x c_out
    Matrix input_proj_b; // 1 x c_out
    LstmCell encoder;
    LstmCell decoder;
    Matrix output_w; // h_size x N
    Matrix output_b; // 1 x N

    int conv_column_count() const { return static_cast<int>(graph_conv.size()); }
    int encoder_input_dim() const { return hyper.c_out * n_segments; }

    /// Visits every learnable array in a fixed order (the checkpoint and
    /// optimizer orders match it).
    void for_each_param(const std::function<void(const std::string&, Matrix&)>& fn);
    void for_each_param(const std::function<void(const std::string&, const Matrix&)>& fn) const;
    std::vector<Matrix*> param_ptrs();
};

struct InitOptions {
    double wgc_noise = 0.05; // uniform half-width around 1.0
};

/// Builds parameters for the multi-weight model. h_size <= 0 selects 2N.
ModelParameters init_model(const WeightedAdjacencySet& weights, int n_segments, ModelHyper hyper,
                           SeededRng& rng, const InitOptions& options = {});

/// Builds the bypass variant: the graph convolution and DRC are replaced by a
/// learned per-node linear lift of the raw speeds to the same c_out*N encoder
/// input. No spatial mixing; the spatial structure only enters through the
/// graph convolution it replaces.
ModelParameters init_model_without_graph_conv(int n_segments, ModelHyper hyper, SeededRng& rng);

/// Staged copies of the parameters on a tape, same order as for_each_param.
struct TapedModel {
    std::vector<ad::Var> params;
    std::vector<ad::Var> wgc; // subset view: one per graph_conv entry
    ad::Var drc_gamma, drc_bias;
    ad::Var input_proj_w, input_proj_b;
    struct Cell {
        ad::Var w_input_in, w_forget_in, w_output_in, w_cell_in;
        ad::Var w_input_hidden, w_forget_hidden, w_output_hidden, w_cell_hidden;
        ad::Var b_input, b_forget, b_output, b_cell;
    } encoder, decoder;
    ad::Var output_w, output_b;
};

TapedModel stage_parameters(ad::Tape& tape, const ModelParameters& model);

/// Gradients for every staged parameter after a backward pass, aligned with
/// for_each_param order.
std::vector<Matrix> collect_gradients(const ad::Tape& tape, const TapedModel& staged);

/// Batched forward pass. inputs[t] is B x N (normalized speeds), t ascending;
/// returns horizon_steps predictions of shape B x N. Throws NumericError with
/// the step index if a hidden state goes non-finite.
std::vector<ad::Var> forward_batch(ad::Tape& tape, const ModelParameters& model,
                                   const TapedModel& staged, const std::vector<Matrix>& inputs);

/// Mean squared error over all predictions: 1x1 node.
ad::Var prediction_loss(ad::Tape& tape, const std::vector<ad::Var>& preds,
                        const std::vector<Matrix>& targets);

// Single-signal operations (thin wrappers over the taped path).

/// x: length-N speeds -> N x ck convolution output, ReLU applied. Columns
/// follow the entry order of `layer`.
Matrix graph_convolve(const Vector& x, const std::vector<GraphConvEntry>& layer);

/// gc: N x ck -> N x c_out, one shared linear map per row, no activation.
Matrix dimension_reduce(const Matrix& gc, const DrcKernel& kernel);

struct LstmState {
    Matrix hidden; // B x h_size
    Matrix cell;   // B x h_size
};

/// Runs the encoder over a sequence of flattened inputs (each 1 x input_dim).
LstmState encode(const std::vector<Matrix>& sequence, const LstmCell& cell, int h_size);

/// Autoregressive decode from an encoder state; x_last is the last observed
/// (normalized) speed row. Returns N x t_p.
Matrix decode(const LstmState& state, const Matrix& x_last, const ModelParameters& model, int t_p);

/// Full forward for one window: N x h -> N x horizon_steps, normalized space.
Matrix model_forward(const ModelParameters& model, const Matrix& window);

/// Self-describing JSON checkpoint. Reload reproduces forward outputs
/// bit-identically.
struct Checkpoint {
    ModelParameters model;
    std::vector<WeightKind> kinds;
    WeightConfig weight_config;
    Normalizer normalizer;
    std::uint64_t seed = 0;
    std::vector<std::string> segment_names;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Entries of W_gc element-wise with the clipped adjacency, restricted to the
/// slots whose row and column both lie in `nodes` (heatmap export).
std::vector<SparsePatternMatrix::Entry> weight_product_subset(const GraphConvEntry& entry,
                                                              std::span<const Index> nodes);

} // namespace mwtgc
