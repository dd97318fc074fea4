#include "equiflow/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "equiflow/common.hpp"

namespace equiflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ShortestPathTree dijkstra(const RoadNetwork& net, const CostVector& costs, int source) {
    if (static_cast<int>(costs.size()) != net.num_arcs())
        throw DataError("cost vector length does not match arc count");
    for (double c : costs)
        if (c < 0.0) throw SolverError("dijkstra requires nonnegative costs");

    ShortestPathTree tree;
    tree.dist.assign(net.num_vertices(), kInf);
    tree.pred_arc.assign(net.num_vertices(), -1);
    tree.dist[source] = 0.0;

    // Strict-improvement relaxation keeps the predecessor graph acyclic; with
    // out-arcs scanned in ascending id order, equal-cost ties settle on the
    // lowest arc id and runs are deterministic.
    using Item = std::pair<double, int>;  // (dist, vertex)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > tree.dist[v]) continue;
        for (int aid : net.out_arcs[v]) {
            const Arc& arc = net.arcs[aid];
            const double nd = d + costs[aid];
            if (nd < tree.dist[arc.head]) {
                tree.dist[arc.head] = nd;
                tree.pred_arc[arc.head] = aid;
                heap.emplace(nd, arc.head);
            }
        }
    }
    return tree;
}

ShortestPathTree bellman_ford(const RoadNetwork& net, const CostVector& costs, int source) {
    if (static_cast<int>(costs.size()) != net.num_arcs())
        throw DataError("cost vector length does not match arc count");

    ShortestPathTree tree;
    const int nv = net.num_vertices();
    tree.dist.assign(nv, kInf);
    tree.pred_arc.assign(nv, -1);
    tree.dist[source] = 0.0;

    int changed_vertex = -1;
    for (int round = 0; round < nv; ++round) {
        changed_vertex = -1;
        for (const Arc& arc : net.arcs) {
            if (tree.dist[arc.tail] == kInf) continue;
            const double nd = tree.dist[arc.tail] + costs[arc.id];
            if (nd < tree.dist[arc.head]) {
                tree.dist[arc.head] = nd;
                tree.pred_arc[arc.head] = arc.id;
                changed_vertex = arc.head;
            }
        }
        if (changed_vertex < 0) return tree;
    }

    // Round |V| still relaxed: walk predecessors back onto the cycle.
    int v = changed_vertex;
    for (int i = 0; i < nv; ++i) v = net.arcs[tree.pred_arc[v]].tail;
    std::vector<int> cycle;
    int w = v;
    do {
        const int aid = tree.pred_arc[w];
        cycle.push_back(aid);
        w = net.arcs[aid].tail;
    } while (w != v && static_cast<int>(cycle.size()) <= nv);
    std::reverse(cycle.begin(), cycle.end());
    throw NegativeCycleError(cycle);
}

std::vector<int> extract_path(const ShortestPathTree& tree, const RoadNetwork& net, int source,
                              int target) {
    if (tree.dist[target] == kInf) throw SolverError("destination unreachable");
    std::vector<int> arcs;
    int v = target;
    while (v != source) {
        const int aid = tree.pred_arc[v];
        if (aid < 0 || static_cast<int>(arcs.size()) > net.num_arcs())
            throw SolverError("broken predecessor chain");
        arcs.push_back(aid);
        v = net.arcs[aid].tail;
    }
    std::reverse(arcs.begin(), arcs.end());
    return arcs;
}

PathFlow shortest_path_lmo(const RoadNetwork& net, const CostVector& costs,
                           const Commodity& commodity, int commodity_index) {
    bool nonneg = true;
    for (double c : costs)
        if (c < 0.0) {
            nonneg = false;
            break;
        }
    const ShortestPathTree tree = nonneg ? dijkstra(net, costs, commodity.origin)
                                         : bellman_ford(net, costs, commodity.origin);
    PathFlow pf;
    pf.commodity = commodity_index;
    pf.arcs = extract_path(tree, net, commodity.origin, commodity.destination);
    pf.weight = commodity.demand;
    return pf;
}

double path_cost(const CostVector& costs, const std::vector<int>& arcs) {
    double c = 0.0;
    for (int a : arcs) c += costs[a];
    return c;
}

namespace {

void enumerate_rec(const RoadNetwork& net, int v, int destination, int max_len,
                   std::vector<int>& arc_stack, std::vector<char>& visited,
                   std::vector<std::vector<int>>& out) {
    if (v == destination) {
        out.push_back(arc_stack);
        return;
    }
    if (max_len >= 0 && static_cast<int>(arc_stack.size()) >= max_len) return;
    std::vector<int> outs = net.out_arcs[v];
    std::sort(outs.begin(), outs.end());
    for (int aid : outs) {
        const Arc& arc = net.arcs[aid];
        if (visited[arc.head]) continue;
        visited[arc.head] = 1;
        arc_stack.push_back(aid);
        enumerate_rec(net, arc.head, destination, max_len, arc_stack, visited, out);
        arc_stack.pop_back();
        visited[arc.head] = 0;
    }
}

}  // namespace

std::vector<std::vector<int>> enumerate_paths(const RoadNetwork& net, int origin, int destination,
                                              int max_len) {
    if (net.num_vertices() > 12)
        throw DataError("path enumeration is restricted to graphs with at most 12 vertices");
    std::vector<std::vector<int>> out;
    std::vector<int> stack;
    std::vector<char> visited(net.num_vertices(), 0);
    visited[origin] = 1;
    enumerate_rec(net, origin, destination, max_len, stack, visited, out);
    return out;
}

}  // namespace equiflow
