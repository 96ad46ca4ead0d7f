#include "mwtgc/error.hpp"
#include "mwtgc/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace mwtgc {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    Matrix m(rows, cols);
    const json& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows) {
        throw InputError("checkpoint: matrix row count mismatch");
    }
    for (Index r = 0; r < rows; ++r) {
        const json& row = data.at(static_cast<std::size_t>(r));
        if (static_cast<Index>(row.size()) != cols) {
            throw InputError("checkpoint: matrix column count mismatch");
        }
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return m;
}

json pattern_to_json(const SparsePatternMatrix& p) {
    json rows = json::array();
    json cols = json::array();
    json vals = json::array();
    for (Index k = 0; k < p.nnz(); ++k) {
        rows.push_back(p.row_indices()[static_cast<std::size_t>(k)]);
        cols.push_back(p.col_indices()[static_cast<std::size_t>(k)]);
        vals.push_back(p.values()[k]);
    }
    return json{{"n", p.rows()}, {"row", std::move(rows)}, {"col", std::move(cols)},
                {"value", std::move(vals)}};
}

SparsePatternMatrix pattern_from_json(const json& j) {
    const Index n = j.at("n").get<Index>();
    const auto& rows = j.at("row");
    const auto& cols = j.at("col");
    const auto& vals = j.at("value");
    if (rows.size() != cols.size() || rows.size() != vals.size()) {
        throw InputError("checkpoint: ragged sparse pattern");
    }
    std::vector<SparsePatternMatrix::Entry> entries;
    entries.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        entries.push_back({rows.at(k).get<Index>(), cols.at(k).get<Index>(),
                           vals.at(k).get<double>()});
    }
    return SparsePatternMatrix::from_entries(n, n, std::move(entries));
}

json cell_to_json(const LstmCell& c) {
    return json{{"w_input_in", matrix_to_json(c.w_input_in)},
                {"w_forget_in", matrix_to_json(c.w_forget_in)},
                {"w_output_in", matrix_to_json(c.w_output_in)},
                {"w_cell_in", matrix_to_json(c.w_cell_in)},
                {"w_input_hidden", matrix_to_json(c.w_input_hidden)},
                {"w_forget_hidden", matrix_to_json(c.w_forget_hidden)},
                {"w_output_hidden", matrix_to_json(c.w_output_hidden)},
                {"w_cell_hidden", matrix_to_json(c.w_cell_hidden)},
                {"b_input", matrix_to_json(c.b_input)},
                {"b_forget", matrix_to_json(c.b_forget)},
                {"b_output", matrix_to_json(c.b_output)},
                {"b_cell", matrix_to_json(c.b_cell)}};
}

LstmCell cell_from_json(const json& j) {
    LstmCell c;
    c.w_input_in = matrix_from_json(j.at("w_input_in"));
    c.w_forget_in = matrix_from_json(j.at("w_forget_in"));
    c.w_output_in = matrix_from_json(j.at("w_output_in"));
    c.w_cell_in = matrix_from_json(j.at("w_cell_in"));
    c.w_input_hidden = matrix_from_json(j.at("w_input_hidden"));
    c.w_forget_hidden = matrix_from_json(j.at("w_forget_hidden"));
    c.w_output_hidden = matrix_from_json(j.at("w_output_hidden"));
    c.w_cell_hidden = matrix_from_json(j.at("w_cell_hidden"));
    c.b_input = matrix_from_json(j.at("b_input"));
    c.b_forget = matrix_from_json(j.at("b_forget"));
    c.b_output = matrix_from_json(j.at("b_output"));
    c.b_cell = matrix_from_json(j.at("b_cell"));
    return c;
}

} // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    const ModelParameters& m = checkpoint.model;
    json j;
    j["format"] = "mwtgc-checkpoint";
    j["version"] = 1;
    j["hyper"] = {{"history_steps", m.hyper.history_steps},
                  {"horizon_steps", m.hyper.horizon_steps},
                  {"max_rank", m.hyper.max_rank},
                  {"c_out", m.hyper.c_out},
                  {"h_size", m.hyper.h_size},
                  {"use_graph_conv", m.hyper.use_graph_conv}};
    j["n_segments"] = m.n_segments;
    j["seed"] = checkpoint.seed;
    j["normalizer"] = {{"mean", checkpoint.normalizer.mean},
                       {"stddev", checkpoint.normalizer.stddev}};
    json kinds = json::array();
    for (const WeightKind k : checkpoint.kinds) {
        kinds.push_back(to_string(k));
    }
    j["weight_kinds"] = std::move(kinds);
    j["weight_config"] = {{"sigma_m", checkpoint.weight_config.sigma_m},
                          {"angle_floor_rad", checkpoint.weight_config.angle_floor_rad},
                          {"category_norm_kmh", checkpoint.weight_config.category_norm_kmh},
                          {"angle_theta_is_delta", checkpoint.weight_config.angle_theta_is_delta}};
    j["segments"] = checkpoint.segment_names;

    json conv = json::array();
    for (const auto& entry : m.graph_conv) {
        conv.push_back(json{{"kind", to_string(entry.key.kind)},
                            {"direction", to_string(entry.key.direction)},
                            {"rank", entry.key.rank},
                            {"wtilde", pattern_to_json(entry.wtilde)},
                            {"wgc", matrix_to_json(entry.wgc)}});
    }
    j["graph_conv"] = std::move(conv);
    if (m.hyper.use_graph_conv) {
        j["drc"] = {{"gamma", matrix_to_json(m.drc.gamma)}, {"bias", matrix_to_json(m.drc.bias)}};
    } else {
        j["input_proj"] = {{"weight", matrix_to_json(m.input_proj_w)},
                           {"bias", matrix_to_json(m.input_proj_b)}};
    }
    j["encoder"] = cell_to_json(m.encoder);
    j["decoder"] = cell_to_json(m.decoder);
    j["output"] = {{"weight", matrix_to_json(m.output_w)}, {"bias", matrix_to_json(m.output_b)}};

    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write checkpoint: " + path);
    }
    out << j.dump(1) << '\n';
    if (!out) {
        throw InputError("checkpoint write failed: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open checkpoint: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("checkpoint parse error in " + path + ": " + e.what());
    }
    if (j.value("format", "") != "mwtgc-checkpoint") {
        throw InputError(path + " is not a model checkpoint");
    }
    Checkpoint cp;
    ModelParameters& m = cp.model;
    const json& hyper = j.at("hyper");
    m.hyper.history_steps = hyper.at("history_steps").get<int>();
    m.hyper.horizon_steps = hyper.at("horizon_steps").get<int>();
    m.hyper.max_rank = hyper.at("max_rank").get<int>();
    m.hyper.c_out = hyper.at("c_out").get<int>();
    m.hyper.h_size = hyper.at("h_size").get<int>();
    m.hyper.use_graph_conv = hyper.at("use_graph_conv").get<bool>();
    m.n_segments = j.at("n_segments").get<int>();
    cp.seed = j.at("seed").get<std::uint64_t>();
    cp.normalizer.mean = j.at("normalizer").at("mean").get<double>();
    cp.normalizer.stddev = j.at("normalizer").at("stddev").get<double>();
    for (const auto& k : j.at("weight_kinds")) {
        cp.kinds.push_back(weight_kind_from_string(k.get<std::string>()));
    }
    const json& wc = j.at("weight_config");
    cp.weight_config.sigma_m = wc.at("sigma_m").get<double>();
    cp.weight_config.angle_floor_rad = wc.at("angle_floor_rad").get<double>();
    cp.weight_config.category_norm_kmh = wc.at("category_norm_kmh").get<double>();
    cp.weight_config.angle_theta_is_delta = wc.at("angle_theta_is_delta").get<bool>();
    cp.segment_names = j.at("segments").get<std::vector<std::string>>();

    for (const auto& entry_json : j.at("graph_conv")) {
        GraphConvEntry entry;
        entry.key.kind = weight_kind_from_string(entry_json.at("kind").get<std::string>());
        entry.key.direction = entry_json.at("direction").get<std::string>() == "inflow"
                                  ? FlowDirection::Inflow
                                  : FlowDirection::Outflow;
        entry.key.rank = entry_json.at("rank").get<int>();
        entry.wtilde = pattern_from_json(entry_json.at("wtilde"));
        entry.wgc = matrix_from_json(entry_json.at("wgc"));
        m.graph_conv.push_back(std::move(entry));
    }
    if (m.hyper.use_graph_conv) {
        m.drc.gamma = matrix_from_json(j.at("drc").at("gamma"));
        m.drc.bias = matrix_from_json(j.at("drc").at("bias"));
    } else {
        m.input_proj_w = matrix_from_json(j.at("input_proj").at("weight"));
        m.input_proj_b = matrix_from_json(j.at("input_proj").at("bias"));
    }
    m.encoder = cell_from_json(j.at("encoder"));
    m.decoder = cell_from_json(j.at("decoder"));
    m.output_w = matrix_from_json(j.at("output").at("weight"));
    m.output_b = matrix_from_json(j.at("output").at("bias"));
    return cp;
}

} // namespace mwtgc
