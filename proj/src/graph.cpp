#include "mwtgc/graph.hpp"

#include "mwtgc/csv.hpp"
#include "mwtgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>

namespace mwtgc {

double normalize_heading(double heading_rad) {
    const double two_pi = 2.0 * M_PI;
    double h = std::fmod(heading_rad, two_pi);
    if (h < 0.0) {
        h += two_pi;
    }
    if (h >= two_pi) { // fmod can land exactly on 2*pi after the correction
        h -= two_pi;
    }
    return h;
}

void RoadNetwork::validate() const {
    const int n = size();
    for (int i = 0; i < n; ++i) {
        const RoadSegment& s = segments[static_cast<std::size_t>(i)];
        if (s.id != i) {
            throw InputError("segment ids must be contiguous: index " + std::to_string(i) +
                             " holds id " + std::to_string(s.id));
        }
        if (!(s.speed_limit_kmh > 0.0) || !std::isfinite(s.speed_limit_kmh)) {
            throw InputError("segment '" + s.name + "': speed limit must be positive, got " +
                             std::to_string(s.speed_limit_kmh));
        }
        if (!(s.length_m > 0.0) || !std::isfinite(s.length_m)) {
            throw InputError("segment '" + s.name + "': length must be positive");
        }
        if (!(s.heading_rad >= 0.0 && s.heading_rad < 2.0 * M_PI)) {
            throw InputError("segment '" + s.name + "': heading outside [0, 2*pi)");
        }
        if (!std::isfinite(s.mid_x_m) || !std::isfinite(s.mid_y_m)) {
            throw InputError("segment '" + s.name + "': non-finite midpoint");
        }
    }
    std::set<std::pair<int, int>> seen;
    for (const Connection& c : connections) {
        if (c.from_id < 0 || c.from_id >= n || c.to_id < 0 || c.to_id >= n) {
            throw InputError("connection (" + std::to_string(c.from_id) + " -> " +
                             std::to_string(c.to_id) + ") references a segment that does not exist");
        }
        if (c.from_id == c.to_id) {
            throw InputError("connection (" + std::to_string(c.from_id) + " -> " +
                             std::to_string(c.to_id) + ") connects a segment to itself");
        }
        if (!seen.insert({c.from_id, c.to_id}).second) {
            throw InputError("duplicate connection (" + std::to_string(c.from_id) + " -> " +
                             std::to_string(c.to_id) + ")");
        }
    }
}

double RoadNetwork::max_speed_limit() const {
    double m = 0.0;
    for (const RoadSegment& s : segments) {
        m = std::max(m, s.speed_limit_kmh);
    }
    return m;
}

AdjacencyPair build_adjacency(const RoadNetwork& network) {
    network.validate();
    const int n = network.size();
    std::vector<Eigen::Triplet<std::int64_t>> triplets;
    triplets.reserve(network.connections.size());
    for (const Connection& c : network.connections) {
        if (c.is_u_turn) {
            continue;
        }
        triplets.emplace_back(c.from_id, c.to_id, 1);
    }
    AdjacencyPair pair;
    pair.rank = 1;
    pair.outflow.resize(n, n);
    pair.outflow.setFromTriplets(triplets.begin(), triplets.end());
    pair.inflow = pair.outflow.transpose();
    pair.outflow.makeCompressed();
    pair.inflow.makeCompressed();
    return pair;
}

namespace {

AdjacencyMatrix matrix_power(const AdjacencyMatrix& a, int k) {
    AdjacencyMatrix result = a;
    for (int i = 1; i < k; ++i) {
        result = (result * a).pruned();
    }
    result.makeCompressed();
    return result;
}

} // namespace

AdjacencyPair rank_k_adjacency(const AdjacencyPair& rank1, int k) {
    if (k < 1) {
        throw std::invalid_argument("rank_k_adjacency: k must be >= 1, got " + std::to_string(k));
    }
    if (rank1.rank != 1) {
        throw std::invalid_argument("rank_k_adjacency: input must be a rank-1 adjacency");
    }
    AdjacencyPair out;
    out.rank = k;
    out.outflow = matrix_power(rank1.outflow, k);
    out.inflow = matrix_power(rank1.inflow, k);
    return out;
}

namespace {

std::string expect_header(const csv::Table& t, const std::string& expected, const std::string& path) {
    std::string actual;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i > 0) {
            actual += ',';
        }
        actual += t.header[i];
    }
    if (actual != expected) {
        throw InputError(path + ": expected header '" + expected + "', got '" + actual + "'");
    }
    return actual;
}

} // namespace

RoadNetwork load_network(const std::string& dir) {
    const std::string seg_path = dir + "/segments.csv";
    const std::string con_path = dir + "/connections.csv";
    const csv::Table seg_table = csv::read_file(seg_path);
    const csv::Table con_table = csv::read_file(con_path);
    expect_header(seg_table, "id,speed_limit_kmh,mid_x_m,mid_y_m,heading_rad,length_m", seg_path);
    expect_header(con_table, "from_id,to_id,is_u_turn", con_path);

    // Deterministic index assignment: external ids sorted lexicographically.
    std::map<std::string, int> index_of;
    for (const auto& row : seg_table.rows) {
        if (!index_of.emplace(row[0], 0).second) {
            throw InputError(seg_path + ": duplicate segment id '" + row[0] + "'");
        }
    }
    int next = 0;
    for (auto& [name, idx] : index_of) {
        idx = next++;
    }

    RoadNetwork net;
    net.segments.resize(index_of.size());
    for (const auto& row : seg_table.rows) {
        RoadSegment s;
        s.id = index_of.at(row[0]);
        s.name = row[0];
        s.speed_limit_kmh = csv::parse_double(row[1], seg_path + " id " + row[0]);
        s.mid_x_m = csv::parse_double(row[2], seg_path + " id " + row[0]);
        s.mid_y_m = csv::parse_double(row[3], seg_path + " id " + row[0]);
        s.heading_rad = normalize_heading(csv::parse_double(row[4], seg_path + " id " + row[0]));
        s.length_m = csv::parse_double(row[5], seg_path + " id " + row[0]);
        net.segments[static_cast<std::size_t>(s.id)] = std::move(s);
    }

    auto lookup = [&](const std::string& name) {
        auto it = index_of.find(name);
        if (it == index_of.end()) {
            throw InputError(con_path + ": connection references unknown segment id '" + name + "'");
        }
        return it->second;
    };
    for (const auto& row : con_table.rows) {
        Connection c;
        c.from_id = lookup(row[0]);
        c.to_id = lookup(row[1]);
        const long long flag = csv::parse_int(row[2], con_path);
        if (flag != 0 && flag != 1) {
            throw InputError(con_path + ": is_u_turn must be 0 or 1, got '" + row[2] + "'");
        }
        c.is_u_turn = flag == 1;
        net.connections.push_back(c);
    }
    net.validate();
    return net;
}

void save_network(const RoadNetwork& network, const std::string& dir) {
    network.validate();
    std::filesystem::create_directories(dir);
    csv::Table seg;
    seg.header = {"id", "speed_limit_kmh", "mid_x_m", "mid_y_m", "heading_rad", "length_m"};
    for (const RoadSegment& s : network.segments) {
        seg.rows.push_back({s.name, csv::format_double(s.speed_limit_kmh),
                            csv::format_double(s.mid_x_m), csv::format_double(s.mid_y_m),
                            csv::format_double(s.heading_rad), csv::format_double(s.length_m)});
    }
    csv::write_file(dir + "/segments.csv", seg);

    csv::Table con;
    con.header = {"from_id", "to_id", "is_u_turn"};
    for (const Connection& c : network.connections) {
        con.rows.push_back({network.segments[static_cast<std::size_t>(c.from_id)].name,
                            network.segments[static_cast<std::size_t>(c.to_id)].name,
                            c.is_u_turn ? "1" : "0"});
    }
    csv::write_file(dir + "/connections.csv", con);
}

} // namespace mwtgc
