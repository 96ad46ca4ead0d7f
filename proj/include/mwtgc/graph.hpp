#pragma once

#include "mwtgc/types.hpp"

#include <Eigen/SparseCore>
#include <string>
#include <vector>

namespace mwtgc {

/// Directed adjacency with integer path counts, compressed sparse row.
using AdjacencyMatrix = Eigen::SparseMatrix<std::int64_t, Eigen::RowMajor>;

/// One directed stretch of roadway, treated as a graph node emitting a speed
/// signal. `id` is the contiguous in-memory index; `name` is the external
/// identifier as it appeared in the topology file.
struct RoadSegment {
    int id = 0;
    std::string name;
    double speed_limit_kmh = 0.0;
    double mid_x_m = 0.0;
    double mid_y_m = 0.0;
    double heading_rad = 0.0; // normalized to [0, 2*pi)
    double length_m = 0.0;
};

struct Connection {
    int from_id = 0;
    int to_id = 0;
    bool is_u_turn = false; // flagged connections produce no edge
};

struct RoadNetwork {
    std::vector<RoadSegment> segments;
    std::vector<Connection> connections;

    int size() const { return static_cast<int>(segments.size()); }

    /// Checks id contiguity, positive limits and lengths, heading range,
    /// connection endpoints, self-connections, and duplicate pairs.
    /// Throws InputError naming the first offender.
    void validate() const;

    double max_speed_limit() const;
};

/// Wraps headings into [0, 2*pi).
double normalize_heading(double heading_rad);

/// Inflow/outflow adjacency at a given rank. At rank k, entry (i,j) of the
/// outflow matrix counts directed paths of length k from i to j; the inflow
/// matrix is its transpose.
struct AdjacencyPair {
    AdjacencyMatrix inflow;
    AdjacencyMatrix outflow;
    int rank = 1;
};

/// Rank-1 adjacency from the connection list. U-turn connections contribute
/// no edge. Validates the network first.
AdjacencyPair build_adjacency(const RoadNetwork& network);

/// k-th matrix power of the rank-1 adjacency. k must be >= 1.
AdjacencyPair rank_k_adjacency(const AdjacencyPair& rank1, int k);

/// Topology file pair `segments.csv` + `connections.csv` in `dir`. External
/// segment ids may be arbitrary strings; indices are assigned in sorted id
/// order so a load is deterministic. Round trip through save() is lossless.
RoadNetwork load_network(const std::string& dir);
void save_network(const RoadNetwork& network, const std::string& dir);

} // namespace mwtgc
