#pragma once

// Small fixed networks shared across the test suites.

#include <vector>

#include "equiflow/network.hpp"

namespace equiflow::testnets {

inline Arc make_arc(int id, int tail, int head, double length = 1.0) {
    Arc a;
    a.id = id;
    a.tail = tail;
    a.head = head;
    a.length = length;
    a.transit_time = length / a.free_speed;
    return a;
}

// Two parallel arcs 0 -> 1.
inline RoadNetwork pigou() {
    RoadNetwork net;
    net.vertices = {{0, 0.0, 0.0}, {1, 1.0, 0.0}};
    net.arcs = {make_arc(0, 0, 1), make_arc(1, 0, 1)};
    net.finalize();
    return net;
}

// 0 -> 1 -> 2.
inline RoadNetwork line(int n = 3) {
    RoadNetwork net;
    for (int v = 0; v < n; ++v) net.vertices.push_back({v, static_cast<double>(v), 0.0});
    for (int v = 0; v + 1 < n; ++v) net.arcs.push_back(make_arc(v, v, v + 1));
    net.finalize();
    return net;
}

// size x size grid, arcs right and down (a DAG corner-to-corner).
inline RoadNetwork dag_grid(int size) {
    RoadNetwork net;
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j)
            net.vertices.push_back({i * size + j, static_cast<double>(j), static_cast<double>(i)});
    int id = 0;
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
            if (j + 1 < size) net.arcs.push_back(make_arc(id++, i * size + j, i * size + j + 1));
            if (i + 1 < size) net.arcs.push_back(make_arc(id++, i * size + j, (i + 1) * size + j));
        }
    net.finalize();
    return net;
}

// Two parallel two-arc routes 0 -> 1 -> 3 and 0 -> 2 -> 3 (4 arcs).
inline RoadNetwork diamond() {
    RoadNetwork net;
    net.vertices = {{0, 0, 0}, {1, 1, 1}, {2, 1, -1}, {3, 2, 0}};
    net.arcs = {make_arc(0, 0, 1), make_arc(1, 1, 3), make_arc(2, 0, 2), make_arc(3, 2, 3)};
    net.finalize();
    return net;
}

// The three-node instance: two parallel 0->1 arcs with different costs and a
// shared 1->2 bottleneck.
inline RoadNetwork funnel() {
    RoadNetwork net;
    net.vertices = {{0, 0, 0}, {1, 1, 0}, {2, 2, 0}};
    net.arcs = {make_arc(0, 0, 1), make_arc(1, 0, 1), make_arc(2, 1, 2)};
    net.finalize();
    return net;
}

}  // namespace equiflow::testnets
