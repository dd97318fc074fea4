#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "equiflow/common.hpp"
#include "equiflow/graph.hpp"
#include "equiflow/rng.hpp"
#include "test_nets.hpp"

using namespace equiflow;
using namespace equiflow::testnets;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("dijkstra on a line") {
    RoadNetwork net = line(3);
    auto tree = dijkstra(net, {1.0, 2.0}, 0);
    CHECK(tree.dist[2] == doctest::Approx(3.0));
    CHECK(extract_path(tree, net, 0, 2) == std::vector<int>{0, 1});
}

TEST_CASE("dijkstra picks the cheap parallel arc and reports unreachable") {
    RoadNetwork net = pigou();
    auto tree = dijkstra(net, {1.0, 2.0}, 0);
    CHECK(tree.dist[1] == doctest::Approx(1.0));
    CHECK(tree.pred_arc[1] == 0);

    // disconnected vertex
    RoadNetwork iso;
    iso.vertices = {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}};
    iso.arcs = {make_arc(0, 0, 1)};
    iso.finalize();
    auto t2 = dijkstra(iso, {1.0}, 0);
    CHECK(t2.dist[2] == kInf);

    CHECK_THROWS_AS(dijkstra(net, {-0.1, 1.0}, 0), SolverError);
}

TEST_CASE("dijkstra breaks exact ties toward the lower arc id") {
    RoadNetwork net = pigou();
    auto tree = dijkstra(net, {2.5, 2.5}, 0);
    CHECK(tree.pred_arc[1] == 0);
}

TEST_CASE("bellman_ford handles negative costs and finds cycles") {
    RoadNetwork net = pigou();
    auto tree = bellman_ford(net, {-1.0, 2.0}, 0);
    CHECK(tree.dist[1] == doctest::Approx(-1.0));

    // 2-cycle with costs (-1, -1)
    RoadNetwork cyc;
    cyc.vertices = {{0, 0, 0}, {1, 1, 0}};
    cyc.arcs = {make_arc(0, 0, 1), make_arc(1, 1, 0)};
    cyc.finalize();
    try {
        bellman_ford(cyc, {-1.0, -1.0}, 0);
        FAIL("expected NegativeCycleError");
    } catch (const NegativeCycleError& e) {
        CHECK(e.cycle_arcs.size() == 2);
    }
}

TEST_CASE("bellman_ford agrees with dijkstra on nonnegative costs") {
    Rng rng(5);
    RoadNetwork net = dag_grid(3);
    for (int trial = 0; trial < 25; ++trial) {
        CostVector costs(net.num_arcs());
        for (double& c : costs) c = rng.uniform(0.0, 5.0);
        auto td = dijkstra(net, costs, 0);
        auto tb = bellman_ford(net, costs, 0);
        for (int v = 0; v < net.num_vertices(); ++v) {
            if (td.dist[v] == kInf)
                CHECK(tb.dist[v] == kInf);
            else
                CHECK(td.dist[v] == doctest::Approx(tb.dist[v]).epsilon(1e-12));
        }
    }
}

TEST_CASE("shortest_path_lmo routes the full demand") {
    RoadNetwork net = pigou();
    Commodity c{0, 1, 2.0, 0};
    PathFlow pf = shortest_path_lmo(net, {1.0, 2.0}, c);
    CHECK(pf.arcs == std::vector<int>{0});
    CHECK(pf.weight == doctest::Approx(2.0));

    // ties by lowest arc id
    pf = shortest_path_lmo(net, {2.5, 2.5}, c);
    CHECK(pf.arcs == std::vector<int>{0});

    // negative costs route through bellman_ford
    pf = shortest_path_lmo(net, {1.0, -2.0}, c);
    CHECK(pf.arcs == std::vector<int>{1});
}

TEST_CASE("enumerate_paths is complete and ordered") {
    CHECK(enumerate_paths(pigou(), 0, 1).size() == 2);

    // 2x2 grid corner-to-corner has exactly two monotone routes
    RoadNetwork grid = dag_grid(2);
    auto paths = enumerate_paths(grid, 0, 3);
    CHECK(paths.size() == 2);
    CHECK(paths[0] < paths[1]);  // lexicographic order

    // triangle with both orientations: 0->1, 1->2, 0->2 plus reversals
    RoadNetwork tri;
    tri.vertices = {{0, 0, 0}, {1, 1, 0}, {2, 0, 1}};
    tri.arcs = {make_arc(0, 0, 1), make_arc(1, 1, 0), make_arc(2, 1, 2),
                make_arc(3, 2, 1), make_arc(4, 0, 2), make_arc(5, 2, 0)};
    tri.finalize();
    // 0->2 directly, or 0->1->2: hand count = 2 elementary paths
    CHECK(enumerate_paths(tri, 0, 2).size() == 2);

    // max_len prunes
    CHECK(enumerate_paths(tri, 0, 2, 1).size() == 1);

    // lmo output never beats an enumerated path
    CostVector costs = {1.0, 1.0, 1.0, 1.0, 2.5, 1.0};
    PathFlow pf = shortest_path_lmo(tri, costs, {0, 2, 1.0, 0});
    for (const auto& p : enumerate_paths(tri, 0, 2))
        CHECK(path_cost(costs, pf.arcs) <= path_cost(costs, p) + 1e-12);
}

TEST_CASE("enumerate_paths refuses large graphs") {
    RoadNetwork big = dag_grid(4);  // 16 vertices
    CHECK_THROWS_AS(enumerate_paths(big, 0, 15), DataError);
}
