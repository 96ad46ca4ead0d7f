#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mwtgc/error.hpp"
#include "mwtgc/graph.hpp"
#include "mwtgc/model.hpp"
#include "mwtgc/rng.hpp"
#include "mwtgc/weights.hpp"

#include <cmath>
#include <filesystem>
#include <vector>

using namespace mwtgc;

namespace {

RoadSegment seg(int id, double limit, double x, double y, double heading = 0.0) {
    RoadSegment s;
    s.id = id;
    s.name = "n" + std::to_string(id);
    s.speed_limit_kmh = limit;
    s.mid_x_m = x;
    s.mid_y_m = y;
    s.heading_rad = normalize_heading(heading);
    s.length_m = 100.0;
    return s;
}

// 0 -> 1 only
RoadNetwork two_node() {
    RoadNetwork net;
    net.segments = {seg(0, 60, 0, 0), seg(1, 60, 400, 0)};
    net.connections = {{0, 1, false}};
    return net;
}

RoadNetwork small_loop(int n) {
    RoadNetwork net;
    for (int i = 0; i < n; ++i) {
        net.segments.push_back(seg(i, i % 2 == 0 ? 60 : 80, 100.0 * i, 50.0 * (i % 3)));
    }
    for (int i = 0; i < n; ++i) {
        net.connections.push_back({i, (i + 1) % n, false});
    }
    if (n >= 4) {
        net.connections.push_back({0, n / 2, false}); // a chord
    }
    return net;
}

GraphConvEntry unit_entry(const SparsePatternMatrix& wtilde, WeightKey key) {
    GraphConvEntry e;
    e.key = key;
    e.wtilde = wtilde;
    e.wgc = Matrix::Ones(wtilde.nnz(), 1);
    return e;
}

void set_params(ModelParameters& model, const std::vector<Matrix>& values) {
    std::size_t at = 0;
    model.for_each_param([&](const std::string&, Matrix& m) { m = values[at++]; });
}

std::vector<Matrix> get_params(const ModelParameters& model) {
    std::vector<Matrix> values;
    model.for_each_param(
        [&](const std::string&, const Matrix& m) { values.push_back(m); });
    return values;
}

ModelParameters tiny_model(const RoadNetwork& net, const std::vector<WeightKind>& kinds,
                           ModelHyper hyper, std::uint64_t seed) {
    const WeightedAdjacencySet wset = build_weight_set(net, hyper.max_rank, kinds, WeightConfig{});
    SeededRng rng(seed);
    return init_model(wset, net.size(), hyper, rng);
}

} // namespace

TEST_CASE("graph_convolve hand example on a 2-node graph") {
    const auto adj = build_adjacency(two_node());
    const auto wtilde = clip_with_identity(weight_plain(adj.outflow));
    std::vector<GraphConvEntry> layer{
        unit_entry(wtilde, {WeightKind::Plain, FlowDirection::Outflow, 1})};
    Vector x(2);
    x << 3.0, 5.0;
    const Matrix out = graph_convolve(x, layer);
    REQUIRE(out.rows() == 2);
    REQUIRE(out.cols() == 1);
    CHECK(out(0, 0) == doctest::Approx(8.0));
    CHECK(out(1, 0) == doctest::Approx(5.0));
}

TEST_CASE("graph_convolve with identity weights acts per node") {
    // edgeless graph: clipped matrix is exactly the identity
    RoadNetwork net;
    net.segments = {seg(0, 60, 0, 0), seg(1, 60, 100, 0), seg(2, 60, 200, 0)};
    const auto adj = build_adjacency(net);
    const auto wtilde = clip_with_identity(weight_plain(adj.outflow));
    std::vector<GraphConvEntry> layer{
        unit_entry(wtilde, {WeightKind::Plain, FlowDirection::Outflow, 1})};
    Vector x(3);
    x << -2.0, 0.5, 4.0;
    const Matrix out = graph_convolve(x, layer);
    CHECK(out(0, 0) == 0.0); // relu
    CHECK(out(1, 0) == doctest::Approx(0.5));
    CHECK(out(2, 0) == doctest::Approx(4.0));

    // no cross-node flow: perturbing node 2 leaves nodes 0 and 1 unchanged
    Vector x2 = x;
    x2[2] += 10.0;
    const Matrix out2 = graph_convolve(x2, layer);
    CHECK(out2(0, 0) == out(0, 0));
    CHECK(out2(1, 0) == out(1, 0));
    CHECK(out2(2, 0) != out(2, 0));

    CHECK(graph_convolve(Vector::Zero(3), layer).isZero());
}

TEST_CASE("graph_convolve column count is c * k") {
    const RoadNetwork net = small_loop(5);
    for (int k = 1; k <= 3; ++k) {
        const auto wset =
            build_weight_set(net, k, {WeightKind::Plain, WeightKind::SpeedLimitRatio},
                             WeightConfig{});
        std::vector<GraphConvEntry> layer;
        for (std::size_t i = 0; i < wset.count(); ++i) {
            layer.push_back(unit_entry(wset.matrix(i), wset.keys()[i]));
        }
        const Matrix out = graph_convolve(Vector::Ones(5), layer);
        CHECK(out.cols() == 2 * 2 * k); // |kinds| * directions * rank
    }
}

TEST_CASE("dimension_reduce examples") {
    DrcKernel averaging;
    averaging.gamma = Matrix::Constant(2, 1, 0.5);
    averaging.bias = Matrix::Zero(1, 1);
    Matrix gc(1, 2);
    gc << 2.0, 4.0;
    CHECK(dimension_reduce(gc, averaging)(0, 0) == doctest::Approx(3.0));

    DrcKernel identity;
    identity.gamma = Matrix::Identity(2, 2);
    identity.bias = Matrix::Zero(1, 2);
    CHECK(dimension_reduce(gc, identity).isApprox(gc));

    DrcKernel zero;
    zero.gamma = Matrix::Zero(2, 3);
    zero.bias = Matrix::Ones(1, 3) * 0.7;
    const Matrix out = dimension_reduce(Matrix::Random(4, 2), zero);
    for (Index i = 0; i < out.rows(); ++i) {
        for (Index j = 0; j < out.cols(); ++j) {
            CHECK(out(i, j) == doctest::Approx(0.7));
        }
    }

    CHECK_THROWS_AS(dimension_reduce(Matrix::Zero(1, 3), averaging), std::invalid_argument);
}

TEST_CASE("encoder stays at zero for zero inputs and parameters") {
    LstmCell cell;
    const int h_size = 3;
    const int in = 2;
    cell.w_input_in = cell.w_forget_in = cell.w_output_in = cell.w_cell_in = Matrix::Zero(in, h_size);
    cell.w_input_hidden = cell.w_forget_hidden = cell.w_output_hidden = cell.w_cell_hidden =
        Matrix::Zero(h_size, h_size);
    cell.b_input = cell.b_forget = cell.b_output = cell.b_cell = Matrix::Zero(1, h_size);
    const std::vector<Matrix> sequence(4, Matrix::Zero(1, in));
    const LstmState state = encode(sequence, cell, h_size);
    CHECK(state.hidden.isZero());
    CHECK(state.cell.isZero());
}

TEST_CASE("single scalar LSTM step matches independent recursion") {
    LstmCell cell;
    cell.w_input_in = Matrix::Constant(1, 1, 0.1);
    cell.w_forget_in = Matrix::Constant(1, 1, 0.2);
    cell.w_output_in = Matrix::Constant(1, 1, 0.3);
    cell.w_cell_in = Matrix::Constant(1, 1, 0.4);
    cell.w_input_hidden = Matrix::Constant(1, 1, 0.5);
    cell.w_forget_hidden = Matrix::Constant(1, 1, 0.6);
    cell.w_output_hidden = Matrix::Constant(1, 1, 0.7);
    cell.w_cell_hidden = Matrix::Constant(1, 1, 0.8);
    cell.b_input = Matrix::Constant(1, 1, 0.01);
    cell.b_forget = Matrix::Constant(1, 1, 0.02);
    cell.b_output = Matrix::Constant(1, 1, 0.03);
    cell.b_cell = Matrix::Constant(1, 1, 0.04);

    const double x = 0.5;
    auto sigma = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double i = sigma(x * 0.1 + 0.01);
    const double f = sigma(x * 0.2 + 0.02);
    const double o = sigma(x * 0.3 + 0.03);
    const double ctilde = std::tanh(x * 0.4 + 0.04);
    const double c1 = f * 0.0 + i * ctilde;
    const double h1 = o * std::tanh(c1);

    const LstmState state = encode({Matrix::Constant(1, 1, x)}, cell, 1);
    CHECK(state.cell(0, 0) == doctest::Approx(c1).epsilon(1e-12));
    CHECK(state.hidden(0, 0) == doctest::Approx(h1).epsilon(1e-12));
    (void)f;
}

TEST_CASE("hidden state stays inside the unit ball") {
    const RoadNetwork net = small_loop(4);
    ModelHyper hyper;
    hyper.history_steps = 6;
    hyper.horizon_steps = 2;
    hyper.max_rank = 1;
    hyper.c_out = 2;
    hyper.h_size = 5;
    ModelParameters model = tiny_model(net, {WeightKind::Plain}, hyper, 11);
    SeededRng rng(3);
    std::vector<Matrix> inputs;
    for (int t = 0; t < hyper.history_steps; ++t) {
        Matrix x(2, 4);
        for (Index r = 0; r < 2; ++r) {
            for (Index c = 0; c < 4; ++c) {
                x(r, c) = rng.uniform(-3.0, 3.0);
            }
        }
        inputs.push_back(x);
    }
    ad::Tape tape;
    const TapedModel staged = stage_parameters(tape, model);
    // encoder internals are exercised through the forward; h = o*tanh(C) bound
    const auto preds = forward_batch(tape, model, staged, inputs);
    CHECK(!preds.empty());
    // direct check on the encode() wrapper
    std::vector<Matrix> seq(6, Matrix::Random(1, model.encoder_input_dim()));
    const LstmState s = encode(seq, model.encoder, hyper.h_size);
    CHECK(s.hidden.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("decoder with zero parameters emits the output bias") {
    const RoadNetwork net = small_loop(4);
    ModelHyper hyper;
    hyper.history_steps = 2;
    hyper.horizon_steps = 3;
    hyper.max_rank = 1;
    hyper.c_out = 1;
    hyper.h_size = 3;
    ModelParameters model = tiny_model(net, {WeightKind::Plain}, hyper, 5);
    std::vector<Matrix> zeros;
    model.for_each_param([&](const std::string&, const Matrix& m) {
        zeros.push_back(Matrix::Zero(m.rows(), m.cols()));
    });
    set_params(model, zeros);
    model.output_b = Matrix::Ones(1, 4) * 0.25;
    const Matrix out = model_forward(model, Matrix::Random(4, 2));
    for (Index i = 0; i < out.rows(); ++i) {
        for (Index t = 0; t < out.cols(); ++t) {
            CHECK(out(i, t) == doctest::Approx(0.25));
        }
    }
}

TEST_CASE("truncated horizon is a prefix of the longer run") {
    const RoadNetwork net = small_loop(5);
    ModelHyper hyper;
    hyper.history_steps = 4;
    hyper.horizon_steps = 6;
    hyper.max_rank = 2;
    hyper.c_out = 2;
    hyper.h_size = 4;
    ModelParameters model =
        tiny_model(net, {WeightKind::Plain, WeightKind::SpeedLimitRatio}, hyper, 17);
    const Matrix window = Matrix::Random(5, 4);
    const Matrix long_run = model_forward(model, window);

    ModelParameters truncated = model;
    truncated.hyper.horizon_steps = 1;
    const Matrix short_run = model_forward(truncated, window);
    CHECK(short_run.col(0).isApprox(long_run.col(0), 1e-14));

    truncated.hyper.horizon_steps = 3;
    const Matrix mid_run = model_forward(truncated, window);
    CHECK(mid_run.isApprox(long_run.leftCols(3), 1e-14));
}

TEST_CASE("tiny hand-set decoder matches test-local recursion") {
    // one node, h_size 1: every parameter is a scalar
    RoadNetwork net;
    net.segments = {seg(0, 60, 0, 0), seg(1, 60, 100, 0)};
    net.connections = {{0, 1, false}};
    ModelHyper hyper;
    hyper.history_steps = 1;
    hyper.horizon_steps = 2;
    hyper.max_rank = 1;
    hyper.c_out = 1;
    hyper.h_size = 1;
    ModelParameters model = tiny_model(net, {WeightKind::Plain}, hyper, 23);

    const Matrix window = Matrix::Constant(2, 1, 0.3);
    const Matrix out = model_forward(model, window);

    // independent recursion with plain scalar math
    auto sigma = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    // encoder input: graph convolution then DRC on each node
    Matrix eff = Matrix::Zero(2, 2);
    const auto& entryO = model.graph_conv[0];
    for (Index k = 0; k < entryO.wtilde.nnz(); ++k) {
        eff(entryO.wtilde.row_indices()[static_cast<std::size_t>(k)],
            entryO.wtilde.col_indices()[static_cast<std::size_t>(k)]) =
            entryO.wgc(k, 0) * entryO.wtilde.values()[k];
    }
    Matrix effI = Matrix::Zero(2, 2);
    const auto& entryI = model.graph_conv[1];
    for (Index k = 0; k < entryI.wtilde.nnz(); ++k) {
        effI(entryI.wtilde.row_indices()[static_cast<std::size_t>(k)],
             entryI.wtilde.col_indices()[static_cast<std::size_t>(k)]) =
            entryI.wgc(k, 0) * entryI.wtilde.values()[k];
    }
    const Vector x = window.col(0);
    Vector gc_o = (eff * x).cwiseMax(0.0);
    Vector gc_i = (effI * x).cwiseMax(0.0);
    // per node: [outflow, inflow] row times gamma + bias
    Vector z(2);
    for (int node = 0; node < 2; ++node) {
        z[node] = gc_o[node] * model.drc.gamma(0, 0) + gc_i[node] * model.drc.gamma(1, 0) +
                  model.drc.bias(0, 0);
    }
    auto lstm = [&sigma](const LstmCell& cell, const Vector& input, double h_prev, double c_prev) {
        double acc_i = cell.b_input(0, 0), acc_f = cell.b_forget(0, 0),
               acc_o = cell.b_output(0, 0), acc_c = cell.b_cell(0, 0);
        for (Index k = 0; k < input.size(); ++k) {
            acc_i += input[k] * cell.w_input_in(k, 0);
            acc_f += input[k] * cell.w_forget_in(k, 0);
            acc_o += input[k] * cell.w_output_in(k, 0);
            acc_c += input[k] * cell.w_cell_in(k, 0);
        }
        acc_i += h_prev * cell.w_input_hidden(0, 0);
        acc_f += h_prev * cell.w_forget_hidden(0, 0);
        acc_o += h_prev * cell.w_output_hidden(0, 0);
        acc_c += h_prev * cell.w_cell_hidden(0, 0);
        const double i = sigma(acc_i);
        const double f = sigma(acc_f);
        const double o = sigma(acc_o);
        const double c = f * c_prev + i * std::tanh(acc_c);
        return std::pair<double, double>{o * std::tanh(c), c};
    };
    auto [h_enc, c_enc] = lstm(model.encoder, z, 0.0, 0.0);
    double h = h_enc, c = c_enc;
    Vector dec_in = x;
    Matrix expected(2, 2);
    for (int t = 0; t < 2; ++t) {
        auto [h_next, c_next] = lstm(model.decoder, dec_in, h, c);
        h = h_next;
        c = c_next;
        for (int node = 0; node < 2; ++node) {
            expected(node, t) = h * model.output_w(0, node) + model.output_b(0, node);
        }
        dec_in = expected.col(t);
    }
    CHECK(out.isApprox(expected, 1e-12));
}

TEST_CASE("forward is deterministic and shape-correct") {
    const RoadNetwork net = small_loop(4);
    ModelHyper hyper;
    hyper.history_steps = 12;
    hyper.horizon_steps = 12;
    hyper.max_rank = 2;
    hyper.c_out = 2;
    hyper.h_size = 8;
    ModelParameters model =
        tiny_model(net, {WeightKind::Plain, WeightKind::Distance}, hyper, 77);
    const Matrix window = Matrix::Random(4, 12);
    const Matrix a = model_forward(model, window);
    const Matrix b = model_forward(model, window);
    CHECK(a.rows() == 4);
    CHECK(a.cols() == 12);
    CHECK(a == b); // bit-identical

    CHECK_THROWS_AS(model_forward(model, Matrix::Zero(4, 5)), std::invalid_argument);
}

TEST_CASE("full model gradient passes the finite-difference check") {
    const RoadNetwork net = small_loop(3);
    ModelHyper hyper;
    hyper.history_steps = 2;
    hyper.horizon_steps = 2;
    hyper.max_rank = 1;
    hyper.c_out = 1;
    hyper.h_size = 2;
    ModelParameters base = tiny_model(net, {WeightKind::Plain}, hyper, 41);

    SeededRng rng(4242);
    std::vector<Matrix> inputs;
    std::vector<Matrix> targets;
    for (int t = 0; t < hyper.history_steps; ++t) {
        Matrix x(2, 3);
        for (Index r = 0; r < x.rows(); ++r)
            for (Index c = 0; c < x.cols(); ++c) x(r, c) = rng.uniform(-1, 1);
        inputs.push_back(x);
    }
    for (int t = 0; t < hyper.horizon_steps; ++t) {
        Matrix x(2, 3);
        for (Index r = 0; r < x.rows(); ++r)
            for (Index c = 0; c < x.cols(); ++c) x(r, c) = rng.uniform(-1, 1);
        targets.push_back(x);
    }

    ad::LossFn loss = [&](const std::vector<Matrix>& params, std::vector<Matrix>* grads) {
        ModelParameters model = base;
        set_params(model, params);
        ad::Tape tape;
        const TapedModel staged = stage_parameters(tape, model);
        const auto preds = forward_batch(tape, model, staged, inputs);
        const ad::Var l = prediction_loss(tape, preds, targets);
        if (grads != nullptr) {
            tape.backward(l);
            *grads = collect_gradients(tape, staged);
        }
        return tape.value(l)(0, 0);
    };
    CHECK(ad::grad_check(loss, get_params(base), 1e-5) < 1e-4);
}

TEST_CASE("node relabeling permutes forward outputs") {
    const int n = 4;
    const RoadNetwork net = small_loop(n);
    ModelHyper hyper;
    hyper.history_steps = 3;
    hyper.horizon_steps = 2;
    hyper.max_rank = 2;
    hyper.c_out = 2;
    hyper.h_size = 5;
    ModelParameters model =
        tiny_model(net, {WeightKind::Plain, WeightKind::SpeedLimitRatio}, hyper, 91);

    const std::vector<Index> perm{2, 0, 3, 1}; // node i -> perm[i]
    ModelParameters permuted = model;
    for (std::size_t e = 0; e < model.graph_conv.size(); ++e) {
        const auto& src = model.graph_conv[e];
        std::vector<SparsePatternMatrix::Entry> entries;
        std::vector<std::pair<std::pair<Index, Index>, double>> wgc_by_pos;
        for (Index k = 0; k < src.wtilde.nnz(); ++k) {
            const Index i = perm[static_cast<std::size_t>(
                src.wtilde.row_indices()[static_cast<std::size_t>(k)])];
            const Index j = perm[static_cast<std::size_t>(
                src.wtilde.col_indices()[static_cast<std::size_t>(k)])];
            entries.push_back({i, j, src.wtilde.values()[k]});
            wgc_by_pos.push_back({{i, j}, src.wgc(k, 0)});
        }
        permuted.graph_conv[e].wtilde = SparsePatternMatrix::from_entries(n, n, entries);
        std::sort(wgc_by_pos.begin(), wgc_by_pos.end());
        Matrix wgc(static_cast<Index>(wgc_by_pos.size()), 1);
        for (std::size_t k = 0; k < wgc_by_pos.size(); ++k) {
            wgc(static_cast<Index>(k), 0) = wgc_by_pos[k].second;
        }
        permuted.graph_conv[e].wgc = wgc;
    }
    const int c_out = hyper.c_out;
    auto permute_in_rows_blocked = [&](const Matrix& w) {
        Matrix out = w;
        for (int i = 0; i < n; ++i) {
            for (int f = 0; f < c_out; ++f) {
                out.row(perm[static_cast<std::size_t>(i)] * c_out + f) = w.row(i * c_out + f);
            }
        }
        return out;
    };
    permuted.encoder.w_input_in = permute_in_rows_blocked(model.encoder.w_input_in);
    permuted.encoder.w_forget_in = permute_in_rows_blocked(model.encoder.w_forget_in);
    permuted.encoder.w_output_in = permute_in_rows_blocked(model.encoder.w_output_in);
    permuted.encoder.w_cell_in = permute_in_rows_blocked(model.encoder.w_cell_in);
    auto permute_rows = [&](const Matrix& w) {
        Matrix out = w;
        for (int i = 0; i < n; ++i) {
            out.row(perm[static_cast<std::size_t>(i)]) = w.row(i);
        }
        return out;
    };
    permuted.decoder.w_input_in = permute_rows(model.decoder.w_input_in);
    permuted.decoder.w_forget_in = permute_rows(model.decoder.w_forget_in);
    permuted.decoder.w_output_in = permute_rows(model.decoder.w_output_in);
    permuted.decoder.w_cell_in = permute_rows(model.decoder.w_cell_in);
    auto permute_cols = [&](const Matrix& w) {
        Matrix out = w;
        for (int i = 0; i < n; ++i) {
            out.col(perm[static_cast<std::size_t>(i)]) = w.col(i);
        }
        return out;
    };
    permuted.output_w = permute_cols(model.output_w);
    permuted.output_b = permute_cols(model.output_b);

    const Matrix window = Matrix::Random(n, hyper.history_steps);
    Matrix permuted_window(n, hyper.history_steps);
    for (int i = 0; i < n; ++i) {
        permuted_window.row(perm[static_cast<std::size_t>(i)]) = window.row(i);
    }
    const Matrix out = model_forward(model, window);
    const Matrix out_perm = model_forward(permuted, permuted_window);
    for (int i = 0; i < n; ++i) {
        CHECK(out_perm.row(perm[static_cast<std::size_t>(i)]).isApprox(out.row(i), 1e-10));
    }
}

TEST_CASE("weight products restrict to the node subset") {
    const RoadNetwork net = small_loop(5);
    ModelHyper hyper;
    hyper.history_steps = 2;
    hyper.horizon_steps = 1;
    hyper.max_rank = 1;
    hyper.c_out = 1;
    hyper.h_size = 2;
    ModelParameters model = tiny_model(net, {WeightKind::Plain}, hyper, 3);
    const std::vector<Index> subset{1, 2};
    for (const auto& entry : model.graph_conv) {
        const auto slots = weight_product_subset(entry, subset);
        CHECK(!slots.empty());
        for (const auto& slot : slots) {
            CHECK((slot.row == 1 || slot.row == 2));
            CHECK((slot.col == 1 || slot.col == 2));
            CHECK(slot.value ==
                  doctest::Approx(entry.wgc(0, 0) * 0.0 + slot.value)); // value is finite
        }
        // with unit conv parameters the product equals the clipped adjacency
        GraphConvEntry unit = entry;
        unit.wgc = Matrix::Ones(entry.wtilde.nnz(), 1);
        for (const auto& slot : weight_product_subset(unit, subset)) {
            CHECK(slot.value == entry.wtilde.coeff(slot.row, slot.col));
        }
    }
}

TEST_CASE("checkpoints reload bit-identically") {
    const RoadNetwork net = small_loop(4);
    ModelHyper hyper;
    hyper.history_steps = 3;
    hyper.horizon_steps = 2;
    hyper.max_rank = 2;
    hyper.c_out = 2;
    hyper.h_size = 0; // resolves to 2N
    ModelParameters model =
        tiny_model(net, {WeightKind::Plain, WeightKind::SpeedLimitRatio}, hyper, 2024);
    CHECK(model.hyper.h_size == 8);

    Checkpoint cp;
    cp.model = model;
    cp.kinds = {WeightKind::Plain, WeightKind::SpeedLimitRatio};
    cp.weight_config = WeightConfig{};
    cp.weight_config.category_norm_kmh = 80.0;
    cp.normalizer = Normalizer{31.4159, 8.25};
    cp.seed = 98765;
    for (const auto& s : net.segments) {
        cp.segment_names.push_back(s.name);
    }

    const std::string path =
        (std::filesystem::temp_directory_path() / "mwtgc_checkpoint_test.json").string();
    save_checkpoint(cp, path);
    const Checkpoint loaded = load_checkpoint(path);
    CHECK(loaded.seed == cp.seed);
    CHECK(loaded.normalizer.mean == cp.normalizer.mean);
    CHECK(loaded.normalizer.stddev == cp.normalizer.stddev);
    CHECK(loaded.kinds == cp.kinds);
    CHECK(loaded.segment_names == cp.segment_names);

    const Matrix window = Matrix::Random(4, 3);
    const Matrix a = model_forward(cp.model, window);
    const Matrix b = model_forward(loaded.model, window);
    CHECK(a == b); // bit-identical after the JSON round trip

    // the no-graph-conv variant round-trips too
    SeededRng rng(5);
    Checkpoint cp2 = cp;
    cp2.model = init_model_without_graph_conv(4, hyper, rng);
    cp2.kinds.clear();
    save_checkpoint(cp2, path);
    const Checkpoint loaded2 = load_checkpoint(path);
    const Matrix c = model_forward(cp2.model, window);
    const Matrix d = model_forward(loaded2.model, window);
    CHECK(c == d);
}
