#include "equiflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "equiflow/common.hpp"

namespace equiflow {

void RoadNetwork::finalize() {
    const int nv = num_vertices();
    const int na = num_arcs();
    for (int v = 0; v < nv; ++v) {
        if (vertices[v].id != v) throw DataError("vertex ids must be dense 0..|V|-1");
    }
    for (int a = 0; a < na; ++a) {
        const Arc& arc = arcs[a];
        if (arc.id != a) throw DataError("arc ids must be dense 0..|A|-1");
        if (arc.tail < 0 || arc.tail >= nv || arc.head < 0 || arc.head >= nv)
            throw DataError("arc endpoint references a missing vertex");
        if (!is_virtual(a)) {
            if (!(arc.length > 0.0) || !(arc.free_speed > 0.0) || !(arc.capacity > 0.0))
                throw DataError("arc length/speed/capacity must be strictly positive");
        }
    }
    out_arcs.assign(nv, {});
    in_arcs.assign(nv, {});
    for (const Arc& arc : arcs) {
        out_arcs[arc.tail].push_back(arc.id);
        in_arcs[arc.head].push_back(arc.id);
    }
}

void validate_commodities(const RoadNetwork& net, const std::vector<Commodity>& commodities) {
    for (const Commodity& c : commodities) {
        if (c.origin < 0 || c.origin >= net.num_vertices() || c.destination < 0 ||
            c.destination >= net.num_vertices())
            throw DataError("commodity endpoint references a missing vertex");
        if (c.origin == c.destination) throw DataError("commodity origin equals destination");
        if (!(c.demand > 0.0)) throw DataError("commodity demand must be positive");
    }
}

AggregatedFlow aggregate_flow(const MultiFlow& mf) {
    AggregatedFlow out;
    if (mf.per_commodity.empty()) return out;
    const std::size_t n = mf.per_commodity.front().size();
    out.per_arc.assign(n, 0.0);
    for (const auto& y : mf.per_commodity) {
        if (y.size() != n) throw DataError("per-commodity flow vectors disagree on arc dimension");
        for (std::size_t a = 0; a < n; ++a) out.per_arc[a] += y[a];
    }
    return out;
}

std::vector<double> divergence(const RoadNetwork& net, const std::vector<double>& flow) {
    std::vector<double> div(net.num_vertices(), 0.0);
    for (const Arc& arc : net.arcs) {
        div[arc.tail] += flow[arc.id];
        div[arc.head] -= flow[arc.id];
    }
    return div;
}

std::vector<double> supply_vector(const RoadNetwork& net, const std::vector<Commodity>& commodities) {
    std::vector<double> b(net.num_vertices(), 0.0);
    for (const Commodity& c : commodities) {
        b[c.origin] += c.demand;
        b[c.destination] -= c.demand;
    }
    return b;
}

ConservationReport check_conservation(const RoadNetwork& net, const std::vector<double>& flow,
                                      int origin, int destination, double demand, double tol) {
    if (static_cast<int>(flow.size()) != net.num_arcs())
        throw DataError("flow vector length does not match arc count");
    std::vector<double> div = divergence(net, flow);
    div[origin] -= demand;
    div[destination] += demand;
    double worst = 0.0;
    for (double r : div) worst = std::max(worst, std::abs(r));
    return {worst <= tol, worst};
}

ConservationReport check_conservation_aggregated(const RoadNetwork& net,
                                                 const std::vector<double>& flow,
                                                 const std::vector<Commodity>& commodities,
                                                 double tol) {
    if (static_cast<int>(flow.size()) != net.num_arcs())
        throw DataError("flow vector length does not match arc count");
    std::vector<double> div = divergence(net, flow);
    const std::vector<double> b = supply_vector(net, commodities);
    double worst = 0.0;
    for (int v = 0; v < net.num_vertices(); ++v) worst = std::max(worst, std::abs(div[v] - b[v]));
    return {worst <= tol, worst};
}

std::vector<std::vector<double>> uniform_thresholds(const RoadNetwork& net, int copies,
                                                    double quantum) {
    if (copies < 1) throw DataError("need at least one copy");
    if (!(quantum > 0.0)) throw DataError("capacity quantum must be positive");
    std::vector<double> tau(copies + 1);
    for (int m = 0; m <= copies; ++m) tau[m] = m * quantum;
    return std::vector<std::vector<double>>(net.num_real_arcs(), tau);
}

ExpandedNetwork capacity_expand(const RoadNetwork& net,
                                const std::vector<std::vector<double>>& thresholds) {
    if (net.virtual_arc_start >= 0)
        throw DataError("capacity expansion of a network with virtual arcs is unsupported");
    if (static_cast<int>(thresholds.size()) != net.num_arcs())
        throw DataError("need one threshold ladder per arc");
    const int copies = static_cast<int>(thresholds.front().size()) - 1;
    if (copies < 1) throw DataError("threshold ladder needs at least tau_0, tau_1");
    for (const auto& tau : thresholds) {
        if (static_cast<int>(tau.size()) != copies + 1)
            throw DataError("all arcs must share the same number of thresholds");
        if (tau[0] != 0.0) throw DataError("tau_0 must equal 0");
        for (int m = 1; m <= copies; ++m)
            if (!(tau[m] > tau[m - 1])) throw DataError("thresholds must be strictly increasing");
    }

    ExpandedNetwork exp;
    exp.copies = copies;
    exp.graph.vertices = net.vertices;
    exp.graph.arcs.reserve(net.num_arcs() * copies);
    exp.arc_capacity.reserve(net.num_arcs() * copies);
    exp.base_arc_of.reserve(net.num_arcs() * copies);
    exp.copy_index_of.reserve(net.num_arcs() * copies);
    for (const Arc& base : net.arcs) {
        const auto& tau = thresholds[base.id];
        for (int m = 1; m <= copies; ++m) {
            Arc a = base;
            a.id = static_cast<int>(exp.graph.arcs.size());
            a.capacity = tau[m] - tau[m - 1];
            exp.graph.arcs.push_back(a);
            exp.arc_capacity.push_back(a.capacity);
            exp.base_arc_of.push_back(base.id);
            exp.copy_index_of.push_back(m);
        }
    }
    exp.graph.finalize();
    return exp;
}

Commodity TimeExpandedNetwork::map_commodity(const Commodity& c) const {
    if (c.departure_epoch < 0 || c.departure_epoch >= epochs)
        throw DataError("departure epoch outside the expansion horizon");
    Commodity m = c;
    m.origin = vertex_of(c.origin, c.departure_epoch);
    m.destination = collector_of(c.destination);
    return m;
}

std::vector<Commodity> TimeExpandedNetwork::map_commodities(const std::vector<Commodity>& cs) const {
    std::vector<Commodity> out;
    out.reserve(cs.size());
    for (const Commodity& c : cs) out.push_back(map_commodity(c));
    return out;
}

TimeExpandedNetwork time_expand(const RoadNetwork& net, int epochs, double epoch_duration) {
    if (epochs < 1) throw DataError("time expansion needs at least one epoch");
    if (!(epoch_duration > 0.0)) throw DataError("epoch duration must be positive");
    if (net.virtual_arc_start >= 0)
        throw DataError("time expansion of an already expanded network is unsupported");

    TimeExpandedNetwork exp;
    exp.epochs = epochs;
    exp.epoch_duration = epoch_duration;
    exp.base_vertices = net.num_vertices();
    exp.base_arcs = net.num_arcs();

    RoadNetwork& g = exp.graph;
    g.vertices.reserve(static_cast<std::size_t>(epochs + 1) * net.num_vertices());
    for (int t = 0; t <= epochs; ++t) {  // layer `epochs` holds the collectors
        for (const Vertex& v : net.vertices) {
            Vertex nv = v;
            nv.id = t * net.num_vertices() + v.id;
            g.vertices.push_back(nv);
        }
    }

    // Real arcs first: (a, t) runs from (tail, t) to (head, t + dt).
    g.arcs.reserve(static_cast<std::size_t>(epochs) * net.num_arcs() +
                   static_cast<std::size_t>(epochs) * net.num_vertices());
    for (int t = 0; t < epochs; ++t) {
        for (const Arc& base : net.arcs) {
            const int dt = static_cast<int>(std::ceil(base.transit_time / epoch_duration));
            const int th = std::min(t + dt, epochs - 1);
            Arc a = base;
            a.id = exp.arc_of(base.id, t);
            a.tail = exp.vertex_of(base.tail, t);
            a.head = exp.vertex_of(base.head, th);
            g.arcs.push_back(a);
        }
    }
    g.virtual_arc_start = static_cast<int>(g.arcs.size());

    // Collector arcs: (v, t) -> arrived(v). Zero cost carriers so that a
    // commodity may finish at any epoch.
    for (int v = 0; v < net.num_vertices(); ++v) {
        for (int t = 0; t < epochs; ++t) {
            Arc a;
            a.id = static_cast<int>(g.arcs.size());
            a.tail = exp.vertex_of(v, t);
            a.head = exp.collector_of(v);
            a.length = 0.0;
            a.free_speed = 1.0;
            a.capacity = std::numeric_limits<double>::infinity();
            a.transit_time = 0.0;
            g.arcs.push_back(a);
        }
    }
    g.finalize();
    return exp;
}

std::vector<double> collapse_flow(const ExpandedNetwork& exp, const std::vector<double>& flow) {
    if (flow.size() != exp.base_arc_of.size()) throw DataError("expanded flow length mismatch");
    const int base_arcs = exp.graph.num_arcs() / exp.copies;
    std::vector<double> out(base_arcs, 0.0);
    for (std::size_t e = 0; e < flow.size(); ++e) out[exp.base_arc_of[e]] += flow[e];
    return out;
}

std::vector<double> collapse_flow_matrix(const TimeExpandedNetwork& exp,
                                         const std::vector<double>& flow) {
    if (static_cast<int>(flow.size()) != exp.graph.num_arcs())
        throw DataError("expanded flow length mismatch");
    std::vector<double> mat(static_cast<std::size_t>(exp.base_arcs) * exp.epochs, 0.0);
    for (int e = 0; e < exp.graph.num_real_arcs(); ++e) {
        const auto [a, t] = exp.base_of(e);
        mat[static_cast<std::size_t>(a) * exp.epochs + t] += flow[e];
    }
    return mat;
}

std::vector<double> collapse_flow(const TimeExpandedNetwork& exp, const std::vector<double>& flow) {
    std::vector<double> mat = collapse_flow_matrix(exp, flow);
    std::vector<double> out(exp.base_arcs, 0.0);
    for (int a = 0; a < exp.base_arcs; ++a)
        for (int t = 0; t < exp.epochs; ++t) out[a] += mat[static_cast<std::size_t>(a) * exp.epochs + t];
    return out;
}

std::vector<double> lift_flow(const ExpandedNetwork& exp, const std::vector<double>& base_flow) {
    const int base_arcs = exp.graph.num_arcs() / exp.copies;
    if (static_cast<int>(base_flow.size()) != base_arcs) throw DataError("base flow length mismatch");
    std::vector<double> out(exp.graph.num_arcs(), 0.0);
    for (int a = 0; a < base_arcs; ++a) {
        double remaining = base_flow[a];
        if (remaining < 0.0) throw DataError("cannot lift a negative flow");
        for (int m = 1; m <= exp.copies && remaining > 0.0; ++m) {
            const int e = exp.expanded_arc_of(a, m);
            const double take = std::min(remaining, exp.arc_capacity[e]);
            out[e] = take;
            remaining -= take;
        }
        if (remaining > 1e-9)
            throw DataError("base flow exceeds the expansion's total capacity");
    }
    return out;
}

}  // namespace equiflow
