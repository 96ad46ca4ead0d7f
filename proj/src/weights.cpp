#include "mwtgc/weights.hpp"

#include "mwtgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mwtgc {

std::string to_string(WeightKind kind) {
    switch (kind) {
    case WeightKind::Plain: return "plain";
    case WeightKind::Distance: return "distance";
    case WeightKind::SpeedLimitRatio: return "speed_limit_ratio";
    case WeightKind::SpeedLimitCategory: return "speed_limit_category";
    case WeightKind::SpeedLimitChange: return "speed_limit_change";
    case WeightKind::Angle: return "angle";
    }
    throw std::invalid_argument("unknown WeightKind");
}

std::string to_string(FlowDirection dir) {
    return dir == FlowDirection::Outflow ? "outflow" : "inflow";
}

WeightKind weight_kind_from_string(const std::string& name) {
    for (int i = 0; i < kWeightKindCount; ++i) {
        const auto kind = static_cast<WeightKind>(i);
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw InputError("unknown weight kind '" + name +
                     "' (expected plain, distance, speed_limit_ratio, speed_limit_category, "
                     "speed_limit_change, or angle)");
}

std::string to_string(const WeightKey& key) {
    return to_string(key.kind) + "_" + to_string(key.direction) + "_k" + std::to_string(key.rank);
}

double WeightConfig::resolved_category_norm(const RoadNetwork& network) const {
    return category_norm_kmh > 0.0 ? category_norm_kmh : network.max_speed_limit();
}

void WeightConfig::validate(const RoadNetwork& network) const {
    if (!(sigma_m > 0.0)) {
        throw std::invalid_argument("WeightConfig: sigma must be positive");
    }
    if (!(angle_floor_rad > 0.0 && angle_floor_rad <= 0.01)) {
        throw std::invalid_argument("WeightConfig: angle_floor must be in (0, 0.01]");
    }
    if (category_norm_kmh > 0.0 && category_norm_kmh < network.max_speed_limit()) {
        throw std::invalid_argument("WeightConfig: category_norm " +
                                    std::to_string(category_norm_kmh) +
                                    " is below the network's max speed limit " +
                                    std::to_string(network.max_speed_limit()));
    }
}

namespace {

// Walks the adjacency pattern and fills one weight per slot. `fn(src, dst)`
// receives the flow endpoints in moving direction: slot (i, j) describes the
// flow i -> j in an outflow matrix and j -> i in an inflow matrix.
template <typename Fn>
SparsePatternMatrix map_flow_weights(const AdjacencyMatrix& adj, FlowDirection dir, Fn&& fn) {
    std::vector<SparsePatternMatrix::Entry> entries;
    entries.reserve(static_cast<std::size_t>(adj.nonZeros()));
    for (int row = 0; row < adj.outerSize(); ++row) {
        for (AdjacencyMatrix::InnerIterator it(adj, row); it; ++it) {
            const Index i = it.row();
            const Index j = it.col();
            const Index src = dir == FlowDirection::Outflow ? i : j;
            const Index dst = dir == FlowDirection::Outflow ? j : i;
            entries.push_back({i, j, fn(src, dst, it.value())});
        }
    }
    return SparsePatternMatrix::from_entries(adj.rows(), adj.cols(), std::move(entries));
}

} // namespace

SparsePatternMatrix weight_plain(const AdjacencyMatrix& adj) {
    return map_flow_weights(adj, FlowDirection::Outflow,
                            [](Index, Index, std::int64_t count) { return static_cast<double>(count); });
}

SparsePatternMatrix weight_distance(const RoadNetwork& network, const AdjacencyMatrix& adj,
                                    FlowDirection dir, const WeightConfig& config) {
    const double sigma_sq = config.sigma_m * config.sigma_m;
    return map_flow_weights(adj, dir, [&](Index src, Index dst, std::int64_t) {
        const RoadSegment& a = network.segments[static_cast<std::size_t>(src)];
        const RoadSegment& b = network.segments[static_cast<std::size_t>(dst)];
        const double dx = a.mid_x_m - b.mid_x_m;
        const double dy = a.mid_y_m - b.mid_y_m;
        return std::exp(-(dx * dx + dy * dy) / sigma_sq);
    });
}

SparsePatternMatrix weight_speed_limit_ratio(const RoadNetwork& network,
                                             const AdjacencyMatrix& adj, FlowDirection dir) {
    return map_flow_weights(adj, dir, [&](Index src, Index dst, std::int64_t) {
        return network.segments[static_cast<std::size_t>(dst)].speed_limit_kmh /
               network.segments[static_cast<std::size_t>(src)].speed_limit_kmh;
    });
}

SparsePatternMatrix weight_speed_limit_category(const RoadNetwork& network,
                                                const AdjacencyMatrix& adj, FlowDirection dir,
                                                const WeightConfig& config) {
    const double norm = config.resolved_category_norm(network);
    return map_flow_weights(adj, dir, [&](Index, Index dst, std::int64_t) {
        return network.segments[static_cast<std::size_t>(dst)].speed_limit_kmh / norm;
    });
}

SparsePatternMatrix weight_speed_limit_change(const RoadNetwork& network,
                                              const AdjacencyMatrix& adj, FlowDirection dir) {
    return map_flow_weights(adj, dir, [&](Index src, Index dst, std::int64_t) {
        return network.segments[static_cast<std::size_t>(src)].speed_limit_kmh !=
                       network.segments[static_cast<std::size_t>(dst)].speed_limit_kmh
                   ? 1.0
                   : 0.0;
    });
}

SparsePatternMatrix weight_angle(const RoadNetwork& network, const AdjacencyMatrix& adj,
                                 FlowDirection dir, const WeightConfig& config) {
    return map_flow_weights(adj, dir, [&](Index src, Index dst, std::int64_t) {
        const double ha = network.segments[static_cast<std::size_t>(src)].heading_rad;
        const double hb = network.segments[static_cast<std::size_t>(dst)].heading_rad;
        double delta = std::fabs(normalize_heading(ha) - normalize_heading(hb));
        if (delta > M_PI) {
            delta = 2.0 * M_PI - delta; // smallest absolute difference, in [0, pi]
        }
        const double inner = config.angle_theta_is_delta ? delta : M_PI - delta;
        const double denom = std::max(std::fabs(M_PI - inner), config.angle_floor_rad);
        return std::exp(-1.0 / denom);
    });
}

SparsePatternMatrix clip_with_identity(const SparsePatternMatrix& raw) {
    if (raw.rows() != raw.cols()) {
        throw std::invalid_argument("clip_with_identity: matrix must be square");
    }
    const Index n = raw.rows();
    std::vector<SparsePatternMatrix::Entry> entries;
    entries.reserve(static_cast<std::size_t>(raw.nnz() + n));
    std::vector<bool> diag_present(static_cast<std::size_t>(n), false);
    for (Index k = 0; k < raw.nnz(); ++k) {
        const Index i = raw.row_indices()[static_cast<std::size_t>(k)];
        const Index j = raw.col_indices()[static_cast<std::size_t>(k)];
        double v = raw.values()[k];
        if (i == j) {
            v += 1.0;
            diag_present[static_cast<std::size_t>(i)] = true;
        }
        entries.push_back({i, j, std::clamp(v, 0.0, 1.0)});
    }
    for (Index i = 0; i < n; ++i) {
        if (!diag_present[static_cast<std::size_t>(i)]) {
            entries.push_back({i, i, 1.0});
        }
    }
    return SparsePatternMatrix::from_entries(n, n, std::move(entries));
}

Matrix clip_with_identity(const Matrix& raw) {
    if (raw.rows() != raw.cols()) {
        throw std::invalid_argument("clip_with_identity: matrix must be square");
    }
    Matrix out = raw + Matrix::Identity(raw.rows(), raw.cols());
    return out.cwiseMax(0.0).cwiseMin(1.0);
}

WeightedAdjacencySet::WeightedAdjacencySet(std::vector<WeightKey> keys,
                                           std::vector<SparsePatternMatrix> matrices, int max_rank,
                                           WeightConfig config)
    : keys_(std::move(keys)), matrices_(std::move(matrices)), max_rank_(max_rank),
      config_(config) {
    if (keys_.size() != matrices_.size()) {
        throw std::invalid_argument("WeightedAdjacencySet: key/matrix count mismatch");
    }
}

const SparsePatternMatrix& WeightedAdjacencySet::matrix(const WeightKey& key) const {
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        if (keys_[i] == key) {
            return matrices_[i];
        }
    }
    throw std::invalid_argument("WeightedAdjacencySet: no matrix for " + to_string(key));
}

WeightedAdjacencySet build_weight_set(const RoadNetwork& network, int max_rank,
                                      const std::vector<WeightKind>& kinds,
                                      const WeightConfig& config) {
    if (kinds.empty()) {
        throw std::invalid_argument("build_weight_set: kinds list must not be empty");
    }
    if (max_rank < 1) {
        throw std::invalid_argument("build_weight_set: max_rank must be >= 1");
    }
    config.validate(network);

    std::set<WeightKind> unique(kinds.begin(), kinds.end());
    std::vector<WeightKind> ordered;
    for (int i = 0; i < kWeightKindCount; ++i) {
        const auto kind = static_cast<WeightKind>(i);
        if (unique.count(kind) > 0) {
            ordered.push_back(kind);
        }
    }

    const AdjacencyPair rank1 = build_adjacency(network);
    std::vector<WeightKey> keys;
    std::vector<SparsePatternMatrix> matrices;
    for (int rank = 1; rank <= max_rank; ++rank) {
        const AdjacencyPair at_rank = rank_k_adjacency(rank1, rank);
        for (const WeightKind kind : ordered) {
            for (const FlowDirection dir : {FlowDirection::Outflow, FlowDirection::Inflow}) {
                const AdjacencyMatrix& adj =
                    dir == FlowDirection::Outflow ? at_rank.outflow : at_rank.inflow;
                SparsePatternMatrix raw;
                switch (kind) {
                case WeightKind::Plain: raw = weight_plain(adj); break;
                case WeightKind::Distance: raw = weight_distance(network, adj, dir, config); break;
                case WeightKind::SpeedLimitRatio:
                    raw = weight_speed_limit_ratio(network, adj, dir);
                    break;
                case WeightKind::SpeedLimitCategory:
                    raw = weight_speed_limit_category(network, adj, dir, config);
                    break;
                case WeightKind::SpeedLimitChange:
                    raw = weight_speed_limit_change(network, adj, dir);
                    break;
                case WeightKind::Angle: raw = weight_angle(network, adj, dir, config); break;
                }
                keys.push_back({kind, dir, rank});
                matrices.push_back(clip_with_identity(raw));
            }
        }
    }
    return WeightedAdjacencySet(std::move(keys), std::move(matrices), max_rank, config);
}

} // namespace mwtgc
