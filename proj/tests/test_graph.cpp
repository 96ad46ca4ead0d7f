#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mwtgc/error.hpp"
#include "mwtgc/graph.hpp"
#include "mwtgc/rng.hpp"

#include <filesystem>
#include <fstream>
#include <vector>

using namespace mwtgc;

namespace {

RoadSegment seg(int id, double limit = 60.0, double x = 0.0, double y = 0.0,
                double heading = 0.0) {
    RoadSegment s;
    s.id = id;
    s.name = "s" + std::string(id < 10 ? "0" : "") + std::to_string(id);
    s.speed_limit_kmh = limit;
    s.mid_x_m = x;
    s.mid_y_m = y;
    s.heading_rad = heading;
    s.length_m = 100.0;
    return s;
}

RoadNetwork chain3() {
    RoadNetwork net;
    net.segments = {seg(0), seg(1), seg(2)};
    net.connections = {{0, 1, false}, {1, 2, false}};
    return net;
}

// Independent oracle: walks of length k from `from` to `to`, counted by
// recursive edge enumeration over the connection list.
long long count_walks(const RoadNetwork& net, int from, int to, int k) {
    if (k == 0) {
        return from == to ? 1 : 0;
    }
    long long total = 0;
    for (const Connection& c : net.connections) {
        if (c.is_u_turn || c.from_id != from) {
            continue;
        }
        total += count_walks(net, c.to_id, to, k - 1);
    }
    return total;
}

RoadNetwork random_network(SeededRng& rng, int n, double edge_prob) {
    RoadNetwork net;
    for (int i = 0; i < n; ++i) {
        net.segments.push_back(seg(i, 60.0, i * 10.0, 0.0));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && rng.uniform01() < edge_prob) {
                net.connections.push_back({i, j, rng.uniform01() < 0.1});
            }
        }
    }
    return net;
}

} // namespace

TEST_CASE("rank-1 adjacency of a chain") {
    const AdjacencyPair adj = build_adjacency(chain3());
    const IntMatrix out = IntMatrix(adj.outflow);
    CHECK(out(0, 1) == 1);
    CHECK(out(1, 2) == 1);
    CHECK(out.sum() == 2);
    CHECK(IntMatrix(adj.inflow) == IntMatrix(out.transpose()));
    for (int i = 0; i < 3; ++i) {
        CHECK(out(i, i) == 0);
    }
}

TEST_CASE("U-turn connections contribute no edge") {
    RoadNetwork net = chain3();
    net.connections.push_back({2, 0, true});
    const AdjacencyPair adj = build_adjacency(net);
    CHECK(IntMatrix(adj.outflow)(2, 0) == 0);
    CHECK(IntMatrix(adj.outflow).sum() == 2);

    // adding a U-turn changes nothing at any rank
    const AdjacencyPair base = build_adjacency(chain3());
    for (int k = 1; k <= 3; ++k) {
        CHECK(IntMatrix(rank_k_adjacency(adj, k).outflow) ==
              IntMatrix(rank_k_adjacency(base, k).outflow));
    }
}

TEST_CASE("empty connection list gives zero matrices") {
    RoadNetwork net;
    net.segments = {seg(0), seg(1), seg(2)};
    const AdjacencyPair adj = build_adjacency(net);
    CHECK(IntMatrix(adj.outflow).isZero());
    CHECK(IntMatrix(adj.inflow).isZero());
}

TEST_CASE("rank-k powers on chain and diamond") {
    const AdjacencyPair chain = build_adjacency(chain3());
    const AdjacencyPair chain2 = rank_k_adjacency(chain, 2);
    CHECK(IntMatrix(chain2.outflow)(0, 2) == 1);
    CHECK(IntMatrix(chain2.outflow).sum() == 1);

    RoadNetwork diamond;
    diamond.segments = {seg(0), seg(1), seg(2), seg(3)};
    diamond.connections = {{0, 1, false}, {0, 2, false}, {1, 3, false}, {2, 3, false}};
    const AdjacencyPair d2 = rank_k_adjacency(build_adjacency(diamond), 2);
    CHECK(IntMatrix(d2.outflow)(0, 3) == 2);

    const AdjacencyPair same = rank_k_adjacency(chain, 1);
    CHECK(IntMatrix(same.outflow) == IntMatrix(chain.outflow));
}

TEST_CASE("rank-k rejects k = 0") {
    CHECK_THROWS_AS(rank_k_adjacency(build_adjacency(chain3()), 0), std::invalid_argument);
}

TEST_CASE("rank-k matches the walk-count oracle on random graphs") {
    SeededRng rng(20240401);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(11)); // N <= 12
        const RoadNetwork net = random_network(rng, n, 0.25);
        const AdjacencyPair rank1 = build_adjacency(net);
        for (int k = 1; k <= 3; ++k) {
            const AdjacencyPair at_k = rank_k_adjacency(rank1, k);
            const IntMatrix out = IntMatrix(at_k.outflow);
            const IntMatrix in = IntMatrix(at_k.inflow);
            REQUIRE(in == IntMatrix(out.transpose()));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    REQUIRE(out(i, j) == count_walks(net, i, j, k));
                }
            }
        }
    }
}

TEST_CASE("dangling and malformed connections are rejected") {
    RoadNetwork net = chain3();
    net.connections.push_back({1, 7, false});
    CHECK_THROWS_WITH_AS(build_adjacency(net), doctest::Contains("7"), InputError);

    RoadNetwork self_loop = chain3();
    self_loop.connections.push_back({1, 1, false});
    CHECK_THROWS_AS(build_adjacency(self_loop), InputError);

    RoadNetwork dup = chain3();
    dup.connections.push_back({0, 1, true});
    CHECK_THROWS_WITH_AS(build_adjacency(dup), doctest::Contains("duplicate"), InputError);

    RoadNetwork bad_limit = chain3();
    bad_limit.segments[1].speed_limit_kmh = 0.0;
    CHECK_THROWS_AS(build_adjacency(bad_limit), InputError);
}

TEST_CASE("heading normalization wraps into [0, 2*pi)") {
    CHECK(normalize_heading(0.0) == doctest::Approx(0.0));
    CHECK(normalize_heading(7.0) == doctest::Approx(7.0 - 2.0 * M_PI));
    CHECK(normalize_heading(-1.0) == doctest::Approx(2.0 * M_PI - 1.0));
    CHECK(normalize_heading(2.0 * M_PI) == doctest::Approx(0.0));
}

TEST_CASE("topology files round-trip losslessly") {
    RoadNetwork net = chain3();
    net.segments[1].speed_limit_kmh = 82.5;
    net.segments[2].heading_rad = 1.234567890123456;
    net.connections.push_back({2, 0, true});

    const std::string dir = (std::filesystem::temp_directory_path() / "mwtgc_topo_test").string();
    save_network(net, dir);
    const RoadNetwork loaded = load_network(dir);
    REQUIRE(loaded.size() == net.size());
    for (int i = 0; i < net.size(); ++i) {
        const auto& a = net.segments[static_cast<std::size_t>(i)];
        const auto& b = loaded.segments[static_cast<std::size_t>(i)];
        CHECK(a.name == b.name);
        CHECK(a.speed_limit_kmh == b.speed_limit_kmh);
        CHECK(a.mid_x_m == b.mid_x_m);
        CHECK(a.mid_y_m == b.mid_y_m);
        CHECK(a.heading_rad == b.heading_rad);
        CHECK(a.length_m == b.length_m);
    }
    REQUIRE(loaded.connections.size() == net.connections.size());

    // second round trip is byte-identical
    const std::string dir2 = dir + "_again";
    save_network(loaded, dir2);
    auto read_all = [](const std::string& p) {
        std::ifstream in(p);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    CHECK(read_all(dir + "/segments.csv") == read_all(dir2 + "/segments.csv"));
    CHECK(read_all(dir + "/connections.csv") == read_all(dir2 + "/connections.csv"));
}

TEST_CASE("loader rejects unknown connection endpoints") {
    const std::string dir =
        (std::filesystem::temp_directory_path() / "mwtgc_topo_bad").string();
    std::filesystem::create_directories(dir);
    {
        std::ofstream seg_file(dir + "/segments.csv");
        seg_file << "id,speed_limit_kmh,mid_x_m,mid_y_m,heading_rad,length_m\n";
        seg_file << "a,60,0,0,0,100\n";
    }
    {
        std::ofstream con_file(dir + "/connections.csv");
        con_file << "from_id,to_id,is_u_turn\n";
        con_file << "a,missing,0\n";
    }
    CHECK_THROWS_WITH_AS(load_network(dir), doctest::Contains("missing"), InputError);
}
