#pragma once

#include <map>
#include <string>
#include <vector>

namespace equiflow {

struct Vertex {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct Arc {
    int id = 0;
    int tail = 0;
    int head = 0;
    double length = 1.0;        // meters
    double free_speed = 13.89;  // m/s
    double capacity = 600.0;    // vehicles
    int lanes = 1;
    double transit_time = 0.0;  // seconds
};

// Directed multigraph. Parallel arcs are allowed everywhere (the extended
// network needs them); arc identity is by id, never by (tail, head).
// Arcs with id >= first_virtual_arc() are bookkeeping arcs introduced by the
// time expansion (destination collectors): they carry flow in the solvers but
// are excluded from metrics, features and attribute validation.
struct RoadNetwork {
    std::vector<Vertex> vertices;
    std::vector<Arc> arcs;
    std::vector<std::vector<int>> out_arcs;
    std::vector<std::vector<int>> in_arcs;
    int virtual_arc_start = -1;  // -1: none

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_arcs() const { return static_cast<int>(arcs.size()); }
    int first_virtual_arc() const { return virtual_arc_start < 0 ? num_arcs() : virtual_arc_start; }
    int num_real_arcs() const { return first_virtual_arc(); }
    bool is_virtual(int arc_id) const { return arc_id >= first_virtual_arc(); }

    // Rebuilds adjacency and validates ids/attributes. Throws DataError.
    void finalize();
};

struct Commodity {
    int origin = 0;
    int destination = 0;
    double demand = 1.0;
    int departure_epoch = 0;  // used by the time expansion; 0 for static instances

    bool operator==(const Commodity&) const = default;
};

void validate_commodities(const RoadNetwork& net, const std::vector<Commodity>& commodities);

struct AggregatedFlow {
    std::vector<double> per_arc;
};

struct MultiFlow {
    // per_commodity[j][a] = flow of commodity j on arc a
    std::vector<std::vector<double>> per_commodity;
};

AggregatedFlow aggregate_flow(const MultiFlow& mf);

struct ConservationReport {
    bool ok = false;
    double max_residual = 0.0;
};

// Flow conservation at every vertex: sum(out) - sum(in) = +demand at the
// origin, -demand at the destination, 0 elsewhere, within tol (1e-9 default).
ConservationReport check_conservation(const RoadNetwork& net, const std::vector<double>& flow,
                                      int origin, int destination, double demand,
                                      double tol = 1e-9);

// Aggregated variant: divergence at each vertex must match the summed
// commodity supplies/demands.
ConservationReport check_conservation_aggregated(const RoadNetwork& net,
                                                 const std::vector<double>& flow,
                                                 const std::vector<Commodity>& commodities,
                                                 double tol = 1e-8);

// Per-vertex divergence sum(out) - sum(in) of a flow vector.
std::vector<double> divergence(const RoadNetwork& net, const std::vector<double>& flow);

// Net supply vector implied by a commodity list.
std::vector<double> supply_vector(const RoadNetwork& net, const std::vector<Commodity>& commodities);

// --- Capacity expansion (piecewise-constant latency encoding) -------------

struct ExpandedNetwork {
    RoadNetwork graph;  // M parallel copies per base arc
    int copies = 1;     // M
    std::vector<double> arc_capacity;  // per expanded arc: tau_m - tau_{m-1}
    std::vector<int> base_arc_of;      // expanded arc id -> base arc id
    std::vector<int> copy_index_of;    // expanded arc id -> m in 1..M (the capacity index)

    int expanded_arc_of(int base_arc, int m /*1..M*/) const { return base_arc * copies + (m - 1); }
};

// thresholds[a] = (tau_0=0 < tau_1 < ... < tau_M), same M for every arc.
ExpandedNetwork capacity_expand(const RoadNetwork& net,
                                const std::vector<std::vector<double>>& thresholds);

// Uniform rule: tau_m = m * quantum for every arc.
std::vector<std::vector<double>> uniform_thresholds(const RoadNetwork& net, int copies,
                                                    double quantum);

// --- Time expansion --------------------------------------------------------

struct TimeExpandedNetwork {
    RoadNetwork graph;  // T*|A| real arcs, then one collector arc per (vertex, epoch)
    int epochs = 1;     // T
    double epoch_duration = 1.0;
    int base_vertices = 0;
    int base_arcs = 0;

    int arc_of(int base_arc, int t) const { return t * base_arcs + base_arc; }
    // (base arc, epoch) of a real expanded arc
    std::pair<int, int> base_of(int exp_arc) const { return {exp_arc % base_arcs, exp_arc / base_arcs}; }
    int vertex_of(int base_vertex, int t) const { return t * base_vertices + base_vertex; }
    // every base vertex gets one collector ("arrived") vertex reachable from
    // all of its epoch copies via virtual arcs
    int collector_of(int base_vertex) const { return epochs * base_vertices + base_vertex; }

    // Maps a base-space commodity (with departure epoch) into the expanded graph.
    Commodity map_commodity(const Commodity& c) const;
    std::vector<Commodity> map_commodities(const std::vector<Commodity>& cs) const;
};

TimeExpandedNetwork time_expand(const RoadNetwork& net, int epochs, double epoch_duration);

// --- Flow collapse ----------------------------------------------------------

// Sum over the M copies of each base arc.
std::vector<double> collapse_flow(const ExpandedNetwork& exp, const std::vector<double>& flow);

// Per-(base arc, epoch) matrix, row-major [a * T + t]; virtual arcs dropped.
std::vector<double> collapse_flow_matrix(const TimeExpandedNetwork& exp,
                                         const std::vector<double>& flow);
// Sum over epochs.
std::vector<double> collapse_flow(const TimeExpandedNetwork& exp, const std::vector<double>& flow);

// Spreads a base-arc flow over the copies of an expanded network, filling
// copy m = 1 first (threshold order); inverse of collapse for feasible flows.
std::vector<double> lift_flow(const ExpandedNetwork& exp, const std::vector<double>& base_flow);

}  // namespace equiflow
