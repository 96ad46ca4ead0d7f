#include "mwtgc/model.hpp"

#include "mwtgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace mwtgc {

void ModelHyper::validate() const {
    if (history_steps < 1 || horizon_steps < 1) {
        throw std::invalid_argument("ModelHyper: history and horizon must be >= 1");
    }
    if (max_rank < 1 || c_out < 1 || h_size < 1) {
        throw std::invalid_argument("ModelHyper: max_rank, c_out, h_size must be >= 1");
    }
}

namespace {

template <typename Self, typename Fn>
void visit_params(Self& self, const Fn& fn) {
    for (auto& entry : self.graph_conv) {
        fn("wgc/" + to_string(entry.key), entry.wgc);
    }
    if (self.hyper.use_graph_conv) {
        fn("drc/gamma", self.drc.gamma);
        fn("drc/bias", self.drc.bias);
    } else {
        fn("input_proj/weight", self.input_proj_w);
        fn("input_proj/bias", self.input_proj_b);
    }
    auto cell = [&fn](const char* prefix, auto& c) {
        fn(std::string(prefix) + "/w_input_in", c.w_input_in);
        fn(std::string(prefix) + "/w_forget_in", c.w_forget_in);
        fn(std::string(prefix) + "/w_output_in", c.w_output_in);
        fn(std::string(prefix) + "/w_cell_in", c.w_cell_in);
        fn(std::string(prefix) + "/w_input_hidden", c.w_input_hidden);
        fn(std::string(prefix) + "/w_forget_hidden", c.w_forget_hidden);
        fn(std::string(prefix) + "/w_output_hidden", c.w_output_hidden);
        fn(std::string(prefix) + "/w_cell_hidden", c.w_cell_hidden);
        fn(std::string(prefix) + "/b_input", c.b_input);
        fn(std::string(prefix) + "/b_forget", c.b_forget);
        fn(std::string(prefix) + "/b_output", c.b_output);
        fn(std::string(prefix) + "/b_cell", c.b_cell);
    };
    cell("encoder", self.encoder);
    cell("decoder", self.decoder);
    fn("output/weight", self.output_w);
    fn("output/bias", self.output_b);
}

} // namespace

void ModelParameters::for_each_param(
    const std::function<void(const std::string&, Matrix&)>& fn) {
    visit_params(*this, fn);
}

void ModelParameters::for_each_param(
    const std::function<void(const std::string&, const Matrix&)>& fn) const {
    visit_params(*this, fn);
}

std::vector<Matrix*> ModelParameters::param_ptrs() {
    std::vector<Matrix*> ptrs;
    for_each_param([&ptrs](const std::string&, Matrix& m) { ptrs.push_back(&m); });
    return ptrs;
}

namespace {

Matrix glorot(Index rows, Index cols, SeededRng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform(-limit, limit);
        }
    }
    return m;
}

LstmCell init_lstm(Index input_dim, Index h_size, SeededRng& rng) {
    LstmCell cell;
    cell.w_input_in = glorot(input_dim, h_size, rng);
    cell.w_forget_in = glorot(input_dim, h_size, rng);
    cell.w_output_in = glorot(input_dim, h_size, rng);
    cell.w_cell_in = glorot(input_dim, h_size, rng);
    cell.w_input_hidden = glorot(h_size, h_size, rng);
    cell.w_forget_hidden = glorot(h_size, h_size, rng);
    cell.w_output_hidden = glorot(h_size, h_size, rng);
    cell.w_cell_hidden = glorot(h_size, h_size, rng);
    cell.b_input = Matrix::Zero(1, h_size);
    cell.b_forget = Matrix::Ones(1, h_size); // open forget gate at the start
    cell.b_output = Matrix::Zero(1, h_size);
    cell.b_cell = Matrix::Zero(1, h_size);
    return cell;
}

void init_common(ModelParameters& model, SeededRng& rng) {
    const Index n = model.n_segments;
    const Index h_size = model.hyper.h_size;
    const Index enc_in = model.encoder_input_dim();
    model.encoder = init_lstm(enc_in, h_size, rng);
    model.decoder = init_lstm(n, h_size, rng);
    model.output_w = glorot(h_size, n, rng);
    model.output_b = Matrix::Zero(1, n);
}

} // namespace

ModelParameters init_model(const WeightedAdjacencySet& weights, int n_segments, ModelHyper hyper,
                           SeededRng& rng, const InitOptions& options) {
    if (hyper.h_size <= 0) {
        hyper.h_size = 2 * n_segments;
    }
    hyper.use_graph_conv = true;
    hyper.validate();
    if (weights.max_rank() != hyper.max_rank) {
        throw std::invalid_argument("init_model: weight set rank " +
                                    std::to_string(weights.max_rank()) +
                                    " differs from hyper.max_rank " +
                                    std::to_string(hyper.max_rank));
    }
    ModelParameters model;
    model.hyper = hyper;
    model.n_segments = n_segments;
    for (std::size_t i = 0; i < weights.count(); ++i) {
        GraphConvEntry entry;
        entry.key = weights.keys()[i];
        entry.wtilde = weights.matrix(i);
        entry.wgc = Matrix(entry.wtilde.nnz(), 1);
        for (Index k = 0; k < entry.wtilde.nnz(); ++k) {
            entry.wgc(k, 0) = 1.0 + rng.uniform(-options.wgc_noise, options.wgc_noise);
        }
        model.graph_conv.push_back(std::move(entry));
    }
    const Index ck = model.conv_column_count();
    // The convolution columns are weighted neighborhood sums, so their scale
    // is the mean adjacency row sum times the signal scale; fold that
    // amplification into the kernel init or the first gates start saturated.
    double amplification = 0.0;
    for (const auto& entry : model.graph_conv) {
        amplification += entry.wtilde.values().sum() / static_cast<double>(n_segments);
    }
    amplification /= static_cast<double>(model.graph_conv.size());
    model.drc.gamma = glorot(ck, hyper.c_out, rng) / std::max(1.0, amplification);
    model.drc.bias = Matrix::Zero(1, hyper.c_out);
    init_common(model, rng);
    return model;
}

ModelParameters init_model_without_graph_conv(int n_segments, ModelHyper hyper, SeededRng& rng) {
    if (hyper.h_size <= 0) {
        hyper.h_size = 2 * n_segments;
    }
    hyper.use_graph_conv = false;
    hyper.validate();
    ModelParameters model;
    model.hyper = hyper;
    model.n_segments = n_segments;
    // start as pure replication of the raw signal, mirroring the unit W_gc init
    model.input_proj_w = Matrix::Ones(1, hyper.c_out);
    model.input_proj_b = Matrix::Zero(1, hyper.c_out);
    init_common(model, rng);
    return model;
}

TapedModel stage_parameters(ad::Tape& tape, const ModelParameters& model) {
    TapedModel staged;
    std::vector<std::pair<std::string, ad::Var>> named;
    model.for_each_param([&](const std::string& name, const Matrix& value) {
        const ad::Var v = tape.leaf(value);
        staged.params.push_back(v);
        named.emplace_back(name, v);
    });
    std::size_t at = 0;
    for (std::size_t i = 0; i < model.graph_conv.size(); ++i) {
        staged.wgc.push_back(named[at++].second);
    }
    if (model.hyper.use_graph_conv) {
        staged.drc_gamma = named[at++].second;
        staged.drc_bias = named[at++].second;
    } else {
        staged.input_proj_w = named[at++].second;
        staged.input_proj_b = named[at++].second;
    }
    auto take_cell = [&named, &at]() {
        TapedModel::Cell c;
        c.w_input_in = named[at++].second;
        c.w_forget_in = named[at++].second;
        c.w_output_in = named[at++].second;
        c.w_cell_in = named[at++].second;
        c.w_input_hidden = named[at++].second;
        c.w_forget_hidden = named[at++].second;
        c.w_output_hidden = named[at++].second;
        c.w_cell_hidden = named[at++].second;
        c.b_input = named[at++].second;
        c.b_forget = named[at++].second;
        c.b_output = named[at++].second;
        c.b_cell = named[at++].second;
        return c;
    };
    staged.encoder = take_cell();
    staged.decoder = take_cell();
    staged.output_w = named[at++].second;
    staged.output_b = named[at++].second;
    return staged;
}

std::vector<Matrix> collect_gradients(const ad::Tape& tape, const TapedModel& staged) {
    std::vector<Matrix> grads;
    grads.reserve(staged.params.size());
    for (const ad::Var v : staged.params) {
        grads.push_back(tape.grad(v));
    }
    return grads;
}

namespace {

struct StepState {
    ad::Var hidden;
    ad::Var cell;
};

StepState lstm_step(ad::Tape& tape, const TapedModel::Cell& cell, ad::Var input,
                    const StepState& prev) {
    auto gate_pre = [&](ad::Var w_in, ad::Var w_hidden, ad::Var bias) {
        return ad::add_row_broadcast(
            tape, ad::add(tape, ad::matmul(tape, input, w_in), ad::matmul(tape, prev.hidden, w_hidden)),
            bias);
    };
    const ad::Var gate_i = ad::sigmoid(tape, gate_pre(cell.w_input_in, cell.w_input_hidden, cell.b_input));
    const ad::Var gate_f =
        ad::sigmoid(tape, gate_pre(cell.w_forget_in, cell.w_forget_hidden, cell.b_forget));
    const ad::Var gate_o =
        ad::sigmoid(tape, gate_pre(cell.w_output_in, cell.w_output_hidden, cell.b_output));
    const ad::Var candidate =
        ad::tanh(tape, gate_pre(cell.w_cell_in, cell.w_cell_hidden, cell.b_cell));
    StepState next;
    next.cell = ad::add(tape, ad::cwise_mul(tape, gate_f, prev.cell),
                        ad::cwise_mul(tape, gate_i, candidate));
    next.hidden = ad::cwise_mul(tape, gate_o, ad::tanh(tape, next.cell));
    return next;
}

void check_finite_state(const ad::Tape& tape, const StepState& s, const char* stage, int step) {
    if (!tape.value(s.hidden).allFinite() || !tape.value(s.cell).allFinite()) {
        throw NumericError(std::string(stage) + " step " + std::to_string(step) +
                           ": non-finite hidden state");
    }
}

using SharedPatterns = std::shared_ptr<const std::vector<SparsePatternMatrix>>;

SharedPatterns shared_patterns(const std::vector<GraphConvEntry>& entries) {
    auto patterns = std::make_shared<std::vector<SparsePatternMatrix>>();
    patterns->reserve(entries.size());
    for (const auto& entry : entries) {
        patterns->push_back(entry.wtilde);
    }
    return patterns;
}

/// One time step of input preparation: raw B x N speeds to the B x (c_out*N)
/// encoder input.
ad::Var encoder_input_step(ad::Tape& tape, const ModelParameters& model, const TapedModel& staged,
                           const SharedPatterns& patterns, const Matrix& x_t) {
    const ad::Var x = tape.constant(x_t);
    if (!model.hyper.use_graph_conv) {
        return ad::per_node_affine(tape, x, staged.input_proj_w, staged.input_proj_b);
    }
    ad::Var gc = ad::multi_sparse_conv(tape, x, patterns, staged.wgc);
    gc = ad::relu(tape, gc);
    ad::Var reduced = ad::add_row_broadcast(tape, ad::matmul(tape, gc, staged.drc_gamma),
                                            staged.drc_bias);
    return ad::rows_to_feature_columns(tape, reduced, model.n_segments);
}

} // namespace

std::vector<ad::Var> forward_batch(ad::Tape& tape, const ModelParameters& model,
                                   const TapedModel& staged, const std::vector<Matrix>& inputs) {
    if (static_cast<int>(inputs.size()) != model.hyper.history_steps) {
        throw std::invalid_argument("forward_batch: expected " +
                                    std::to_string(model.hyper.history_steps) +
                                    " input steps, got " + std::to_string(inputs.size()));
    }
    const Index batch = inputs.front().rows();
    for (const Matrix& x : inputs) {
        if (x.rows() != batch || x.cols() != model.n_segments) {
            throw std::invalid_argument("forward_batch: every input step must be " +
                                        std::to_string(batch) + "x" +
                                        std::to_string(model.n_segments));
        }
    }

    const SharedPatterns patterns =
        model.hyper.use_graph_conv ? shared_patterns(model.graph_conv) : nullptr;
    StepState state{tape.constant(Matrix::Zero(batch, model.hyper.h_size)),
                    tape.constant(Matrix::Zero(batch, model.hyper.h_size))};
    for (int t = 0; t < model.hyper.history_steps; ++t) {
        const ad::Var z = encoder_input_step(tape, model, staged, patterns,
                                             inputs[static_cast<std::size_t>(t)]);
        state = lstm_step(tape, staged.encoder, z, state);
        check_finite_state(tape, state, "encoder", t);
    }

    // decoder: starts from the last observation, then feeds its own output back
    ad::Var decoder_input = tape.constant(inputs.back());
    std::vector<ad::Var> predictions;
    predictions.reserve(static_cast<std::size_t>(model.hyper.horizon_steps));
    for (int t = 0; t < model.hyper.horizon_steps; ++t) {
        state = lstm_step(tape, staged.decoder, decoder_input, state);
        check_finite_state(tape, state, "decoder", t);
        const ad::Var pred = ad::add_row_broadcast(
            tape, ad::matmul(tape, state.hidden, staged.output_w), staged.output_b);
        predictions.push_back(pred);
        decoder_input = pred;
    }
    return predictions;
}

ad::Var prediction_loss(ad::Tape& tape, const std::vector<ad::Var>& preds,
                        const std::vector<Matrix>& targets) {
    if (preds.empty() || preds.size() != targets.size()) {
        throw std::invalid_argument("prediction_loss: prediction/target count mismatch");
    }
    ad::Var total;
    double count = 0.0;
    for (std::size_t t = 0; t < preds.size(); ++t) {
        const ad::Var diff = ad::sub(tape, preds[t], tape.constant(targets[t]));
        const ad::Var sq = ad::sum_squares(tape, diff);
        total = t == 0 ? sq : ad::add(tape, total, sq);
        count += static_cast<double>(targets[t].size());
    }
    return ad::scale(tape, total, 1.0 / count);
}

Matrix graph_convolve(const Vector& x, const std::vector<GraphConvEntry>& layer) {
    if (layer.empty()) {
        throw std::invalid_argument("graph_convolve: empty layer");
    }
    const Index n = layer.front().wtilde.rows();
    if (x.size() != n) {
        throw std::invalid_argument("graph_convolve: signal length " + std::to_string(x.size()) +
                                    " does not match layer size " + std::to_string(n));
    }
    ad::Tape tape;
    const ad::Var xv = tape.constant(x.transpose()); // 1 x N
    std::vector<ad::Var> values;
    for (const auto& entry : layer) {
        values.push_back(tape.constant(entry.wgc));
    }
    const ad::Var gc =
        ad::relu(tape, ad::multi_sparse_conv(tape, xv, shared_patterns(layer), values));
    return tape.value(gc); // (1*N) x ck == N x ck
}

Matrix dimension_reduce(const Matrix& gc, const DrcKernel& kernel) {
    if (gc.cols() != kernel.gamma.rows()) {
        throw std::invalid_argument("dimension_reduce: input has " + std::to_string(gc.cols()) +
                                    " columns, kernel expects " +
                                    std::to_string(kernel.gamma.rows()));
    }
    return (gc * kernel.gamma).rowwise() + kernel.bias.row(0);
}

LstmState encode(const std::vector<Matrix>& sequence, const LstmCell& cell, int h_size) {
    if (sequence.empty()) {
        throw std::invalid_argument("encode: empty sequence");
    }
    ad::Tape tape;
    TapedModel::Cell staged{
        tape.constant(cell.w_input_in),     tape.constant(cell.w_forget_in),
        tape.constant(cell.w_output_in),    tape.constant(cell.w_cell_in),
        tape.constant(cell.w_input_hidden), tape.constant(cell.w_forget_hidden),
        tape.constant(cell.w_output_hidden), tape.constant(cell.w_cell_hidden),
        tape.constant(cell.b_input),        tape.constant(cell.b_forget),
        tape.constant(cell.b_output),       tape.constant(cell.b_cell)};
    const Index batch = sequence.front().rows();
    StepState state{tape.constant(Matrix::Zero(batch, h_size)),
                    tape.constant(Matrix::Zero(batch, h_size))};
    for (std::size_t t = 0; t < sequence.size(); ++t) {
        state = lstm_step(tape, staged, tape.constant(sequence[t]), state);
        check_finite_state(tape, state, "encoder", static_cast<int>(t));
    }
    return LstmState{tape.value(state.hidden), tape.value(state.cell)};
}

Matrix decode(const LstmState& state, const Matrix& x_last, const ModelParameters& model,
              int t_p) {
    if (t_p < 1) {
        throw std::invalid_argument("decode: t_p must be >= 1");
    }
    ad::Tape tape;
    TapedModel staged = stage_parameters(tape, model);
    StepState s{tape.constant(state.hidden), tape.constant(state.cell)};
    ad::Var input = tape.constant(x_last);
    Matrix out(model.n_segments, t_p);
    for (int t = 0; t < t_p; ++t) {
        s = lstm_step(tape, staged.decoder, input, s);
        check_finite_state(tape, s, "decoder", t);
        const ad::Var pred = ad::add_row_broadcast(
            tape, ad::matmul(tape, s.hidden, staged.output_w), staged.output_b);
        out.col(t) = tape.value(pred).row(0).transpose();
        input = pred;
    }
    return out;
}

std::vector<SparsePatternMatrix::Entry> weight_product_subset(const GraphConvEntry& entry,
                                                              std::span<const Index> nodes) {
    std::vector<SparsePatternMatrix::Entry> out;
    auto wanted = [&nodes](Index v) {
        return std::find(nodes.begin(), nodes.end(), v) != nodes.end();
    };
    for (Index k = 0; k < entry.wtilde.nnz(); ++k) {
        const Index i = entry.wtilde.row_indices()[static_cast<std::size_t>(k)];
        const Index j = entry.wtilde.col_indices()[static_cast<std::size_t>(k)];
        if (wanted(i) && wanted(j)) {
            out.push_back({i, j, entry.wgc(k, 0) * entry.wtilde.values()[k]});
        }
    }
    return out;
}

Matrix model_forward(const ModelParameters& model, const Matrix& window) {
    if (window.rows() != model.n_segments || window.cols() != model.hyper.history_steps) {
        throw std::invalid_argument(
            "model_forward: window must be " + std::to_string(model.n_segments) + "x" +
            std::to_string(model.hyper.history_steps) + ", got " + std::to_string(window.rows()) +
            "x" + std::to_string(window.cols()));
    }
    ad::Tape tape;
    const TapedModel staged = stage_parameters(tape, model);
    std::vector<Matrix> inputs;
    inputs.reserve(static_cast<std::size_t>(window.cols()));
    for (Index t = 0; t < window.cols(); ++t) {
        inputs.push_back(window.col(t).transpose());
    }
    const std::vector<ad::Var> preds = forward_batch(tape, model, staged, inputs);
    Matrix out(model.n_segments, model.hyper.horizon_steps);
    for (std::size_t t = 0; t < preds.size(); ++t) {
        out.col(static_cast<Index>(t)) = tape.value(preds[t]).row(0).transpose();
    }
    return out;
}

} // namespace mwtgc
