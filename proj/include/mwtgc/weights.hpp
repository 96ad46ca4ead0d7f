#pragma once

#include "mwtgc/graph.hpp"
#include "mwtgc/sparse_pattern.hpp"
#include "mwtgc/types.hpp"

#include <string>
#include <vector>

namespace mwtgc {

/// Structural features a weighted adjacency matrix can encode.
enum class WeightKind {
    Plain,
    Distance,
    SpeedLimitRatio,
    SpeedLimitCategory,
    SpeedLimitChange,
    Angle,
};

enum class FlowDirection { Outflow, Inflow };

constexpr int kWeightKindCount = 6;

std::string to_string(WeightKind kind);
std::string to_string(FlowDirection dir);
WeightKind weight_kind_from_string(const std::string& name);

struct WeightConfig {
    double sigma_m = 1000.0;        // distance falloff scale
    double angle_floor_rad = 1e-6;  // clamp for the angle-weight denominator
    double category_norm_kmh = 0.0; // 0 = use the network's max speed limit
    bool angle_theta_is_delta = false; // alternative inner-angle convention

    /// Resolves the category divisor against the network and checks ranges.
    double resolved_category_norm(const RoadNetwork& network) const;
    void validate(const RoadNetwork& network) const;
};

/// Identifies one weighted adjacency matrix within a set.
struct WeightKey {
    WeightKind kind = WeightKind::Plain;
    FlowDirection direction = FlowDirection::Outflow;
    int rank = 1;

    bool operator==(const WeightKey&) const = default;
};

std::string to_string(const WeightKey& key);

// Raw (pre-clip) weight matrices on the pattern of one directed rank-k
// adjacency matrix. The entry at (i, j) carries the weight of the traffic
// flow the slot describes: i -> j in an outflow matrix, j -> i in an inflow
// matrix. Zero-valued weights keep their slot so patterns stay aligned.
SparsePatternMatrix weight_plain(const AdjacencyMatrix& adj);
SparsePatternMatrix weight_distance(const RoadNetwork& network, const AdjacencyMatrix& adj,
                                    FlowDirection dir, const WeightConfig& config);
SparsePatternMatrix weight_speed_limit_ratio(const RoadNetwork& network,
                                             const AdjacencyMatrix& adj, FlowDirection dir);
SparsePatternMatrix weight_speed_limit_category(const RoadNetwork& network,
                                                const AdjacencyMatrix& adj, FlowDirection dir,
                                                const WeightConfig& config);
SparsePatternMatrix weight_speed_limit_change(const RoadNetwork& network,
                                              const AdjacencyMatrix& adj, FlowDirection dir);
SparsePatternMatrix weight_angle(const RoadNetwork& network, const AdjacencyMatrix& adj,
                                 FlowDirection dir, const WeightConfig& config);

/// Adds the identity and clamps every entry into [0, 1]. The result's pattern
/// is the input pattern plus the full diagonal; the diagonal becomes exactly 1.
SparsePatternMatrix clip_with_identity(const SparsePatternMatrix& raw);

/// Dense convenience spelling of the same operation.
Matrix clip_with_identity(const Matrix& raw);

/// The clipped weighted adjacency matrices for the chosen kinds, both flow
/// directions, ranks 1..max_rank. Matrices are kept in concatenation order:
/// rank ascending, then kind in declaration order, then outflow before inflow.
class WeightedAdjacencySet {
public:
    WeightedAdjacencySet() = default;
    WeightedAdjacencySet(std::vector<WeightKey> keys, std::vector<SparsePatternMatrix> matrices,
                         int max_rank, WeightConfig config);

    int max_rank() const { return max_rank_; }
    std::size_t count() const { return keys_.size(); }
    const WeightConfig& config() const { return config_; }

    const std::vector<WeightKey>& keys() const { return keys_; }
    const SparsePatternMatrix& matrix(std::size_t i) const { return matrices_[i]; }
    const SparsePatternMatrix& matrix(const WeightKey& key) const;

private:
    std::vector<WeightKey> keys_;
    std::vector<SparsePatternMatrix> matrices_;
    int max_rank_ = 0;
    WeightConfig config_;
};

/// Generates |kinds| x 2 x max_rank clipped matrices. Kinds are deduplicated
/// and ordered by declaration order; the list must not be empty.
WeightedAdjacencySet build_weight_set(const RoadNetwork& network, int max_rank,
                                      const std::vector<WeightKind>& kinds,
                                      const WeightConfig& config);

} // namespace mwtgc
