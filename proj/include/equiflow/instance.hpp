#pragma once

#include <cstdint>
#include <vector>

#include "equiflow/network.hpp"

namespace equiflow {

// One prediction problem: a base network, the trips placed on it, and the
// time discretization. Targets live in "report space": one value per arc for
// static instances, one per (arc, epoch) — row-major [a * T + t] — for
// time-variant ones.
struct Instance {
    RoadNetwork net;
    std::vector<Commodity> commodities;
    std::vector<int> homes;
    std::vector<int> works;
    int time_steps = 1;
    double epoch_duration = 180.0;

    bool time_variant() const { return time_steps > 1; }
    int report_size() const { return net.num_arcs() * time_steps; }
};

}  // namespace equiflow
