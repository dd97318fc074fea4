#include "equiflow/scenarios.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include "equiflow/common.hpp"
#include "equiflow/equilibrium.hpp"
#include "equiflow/io.hpp"
#include "equiflow/mcmf.hpp"
#include "equiflow/rng.hpp"

namespace equiflow {

namespace {
constexpr double kGridSpacing = 100.0;  // meters
constexpr double kFreeSpeed = 13.89;    // m/s (~50 km/h)
constexpr double kCapacity = 600.0;
}  // namespace

Layout parse_layout(const std::string& s) {
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (u == "HE") return Layout::HE;
    if (u == "LE") return Layout::LE;
    if (u == "LEU") return Layout::LEU;
    if (u == "HEU") return Layout::HEU;
    if (u == "SW") return Layout::SW;
    throw UsageError("unknown layout '" + s + "' (expected HE, LE, LEU, HEU or SW)");
}

OracleKind parse_oracle(const std::string& s) {
    std::string l;
    for (char c : s) l.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (l == "easy-mcfp" || l == "easymcfp") return OracleKind::EasyMCFP;
    if (l == "easy-we" || l == "easywe") return OracleKind::EasyWE;
    if (l == "random-mcfp" || l == "randommcfp") return OracleKind::RandomMCFP;
    if (l == "random-we" || l == "randomwe") return OracleKind::RandomWE;
    throw UsageError("unknown oracle '" + s + "' (expected easy-mcfp, easy-we, random-mcfp or random-we)");
}

std::string to_string(Layout l) {
    switch (l) {
        case Layout::HE: return "HE";
        case Layout::LE: return "LE";
        case Layout::LEU: return "LEU";
        case Layout::HEU: return "HEU";
        case Layout::SW: return "SW";
    }
    return "?";
}

std::string to_string(OracleKind o) {
    switch (o) {
        case OracleKind::EasyMCFP: return "easy-mcfp";
        case OracleKind::EasyWE: return "easy-we";
        case OracleKind::RandomMCFP: return "random-mcfp";
        case OracleKind::RandomWE: return "random-we";
    }
    return "?";
}

namespace {

void add_arc_pair(RoadNetwork& net, int u, int v) {
    const auto& a = net.vertices[u];
    const auto& b = net.vertices[v];
    const double len = std::hypot(a.x - b.x, a.y - b.y);
    for (int dir = 0; dir < 2; ++dir) {
        Arc arc;
        arc.id = static_cast<int>(net.arcs.size());
        arc.tail = dir == 0 ? u : v;
        arc.head = dir == 0 ? v : u;
        arc.length = len;
        arc.free_speed = kFreeSpeed;
        arc.capacity = kCapacity;
        arc.lanes = 1;
        arc.transit_time = len / kFreeSpeed;
        net.arcs.push_back(arc);
    }
}

RoadNetwork build_grid(int size, double jitter, Rng* rng) {
    if (size < 2) throw DataError("network size must be at least 2");
    RoadNetwork net;
    net.vertices.reserve(static_cast<std::size_t>(size) * size);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            Vertex v;
            v.id = i * size + j;
            v.x = (j + (rng ? rng->uniform(-jitter, jitter) : 0.0)) * kGridSpacing;
            v.y = (i + (rng ? rng->uniform(-jitter, jitter) : 0.0)) * kGridSpacing;
            net.vertices.push_back(v);
        }
    }
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            const int v = i * size + j;
            if (j + 1 < size) add_arc_pair(net, v, v + 1);
            if (i + 1 < size) add_arc_pair(net, v, v + size);
        }
    }
    return net;
}

}  // namespace

RoadNetwork grid_network(int size) {
    RoadNetwork net = build_grid(size, 0.0, nullptr);
    net.finalize();
    return net;
}

RoadNetwork generate_network(std::uint64_t seed, int size) {
    Rng rng(derive_seed(seed, "network"));
    RoadNetwork net = build_grid(size, 0.3, &rng);

    // Diagonal shortcuts across random cells until |A| ~ 4 |V|.
    std::set<std::pair<int, int>> used;
    const int wanted_pairs = 2 * size;
    int attempts = 0;
    int added = 0;
    while (added < wanted_pairs && attempts < 50 * wanted_pairs) {
        ++attempts;
        const int i = static_cast<int>(rng.below(size - 1));
        const int j = static_cast<int>(rng.below(size - 1));
        const bool main_diag = rng.uniform() < 0.5;
        int u = i * size + j, v = (i + 1) * size + (j + 1);
        if (!main_diag) {
            u = i * size + (j + 1);
            v = (i + 1) * size + j;
        }
        if (!used.insert({std::min(u, v), std::max(u, v)}).second) continue;
        add_arc_pair(net, u, v);
        ++added;
    }
    net.finalize();
    return net;
}

namespace {

// Sampling without replacement until the candidate set is exhausted, then
// fresh rounds; keeps "counts = |V|" a permutation.
std::vector<int> sample_rounds(const std::vector<int>& candidates, int count, Rng& rng) {
    if (candidates.empty()) throw DataError("no candidate vertices for location placement");
    std::vector<int> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        std::vector<int> round = candidates;
        rng.shuffle(round);
        for (int v : round) {
            if (static_cast<int>(out.size()) >= count) break;
            out.push_back(v);
        }
    }
    return out;
}

}  // namespace

std::pair<std::vector<int>, std::vector<int>> place_locations(const RoadNetwork& net, Layout layout,
                                                              int n_homes, int n_works,
                                                              std::uint64_t seed) {
    Rng rng(derive_seed(seed, "locations"));
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Vertex& v : net.vertices) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    const double xmid = 0.5 * (xmin + xmax);
    const double ymid = 0.5 * (ymin + ymax);

    std::vector<int> all(net.num_vertices());
    for (int v = 0; v < net.num_vertices(); ++v) all[v] = v;

    switch (layout) {
        case Layout::HE:
        case Layout::HEU: {
            return {sample_rounds(all, n_homes, rng), sample_rounds(all, n_works, rng)};
        }
        case Layout::LE:
        case Layout::LEU: {
            std::vector<int> top_right, bottom_left;
            for (const Vertex& v : net.vertices) {
                if (v.x >= xmid && v.y >= ymid) top_right.push_back(v.id);
                if (v.x <= xmid && v.y <= ymid) bottom_left.push_back(v.id);
            }
            return {sample_rounds(top_right, n_homes, rng), sample_rounds(bottom_left, n_works, rng)};
        }
        case Layout::SW: {
            std::vector<double> weight(net.num_vertices(), 0.0);
            double total = 0.0;
            for (int v = 0; v < net.num_vertices(); ++v) {
                weight[v] = static_cast<double>(net.out_arcs[v].size() + net.in_arcs[v].size());
                total += weight[v];
            }
            auto draw = [&] {
                double r = rng.uniform() * total;
                for (int v = 0; v < net.num_vertices(); ++v) {
                    r -= weight[v];
                    if (r <= 0.0) return v;
                }
                return net.num_vertices() - 1;
            };
            std::vector<int> homes(n_homes), works(n_works);
            for (int& h : homes) h = draw();
            for (int& w : works) w = draw();
            return {homes, works};
        }
    }
    throw UsageError("unhandled layout");
}

std::vector<Commodity> make_commodities(const std::vector<int>& homes, const std::vector<int>& works,
                                        int time_steps) {
    if (homes.size() != works.size())
        throw DataError("need equally many home and work locations to pair trips");
    const int n = static_cast<int>(homes.size());
    std::vector<int> w = works;
    // a trip needs distinct endpoints; rotate clashing work assignments away
    for (int i = 0; i < n; ++i) {
        if (w[i] != homes[i]) continue;
        bool fixed = false;
        for (int k = 1; k < n && !fixed; ++k) {
            const int j = (i + k) % n;
            if (w[j] != homes[i] && w[i] != homes[j]) {
                std::swap(w[i], w[j]);
                fixed = true;
            }
        }
        if (!fixed) throw DataError("cannot pair trips: all locations coincide");
    }
    const int evening = time_steps / 2;
    std::vector<Commodity> out;
    out.reserve(2 * n);
    for (int i = 0; i < n; ++i) out.push_back({homes[i], w[i], 1.0, 0});
    for (int i = 0; i < n; ++i) out.push_back({w[i], homes[i], 1.0, evening});
    return out;
}

Instance make_instance(const ScenarioSpec& spec, std::uint64_t instance_seed) {
    if (spec.agents < 2 || spec.agents % 2 != 0)
        throw UsageError("agent count must be even and at least 2 (morning+evening pairing)");
    Instance inst;
    const bool uniform_grid = spec.layout == Layout::LEU || spec.layout == Layout::HEU;
    inst.net = uniform_grid ? grid_network(spec.size) : generate_network(instance_seed, spec.size);
    const int pairs = spec.agents / 2;
    auto [homes, works] = place_locations(inst.net, spec.layout, pairs, pairs, instance_seed);
    inst.homes = homes;
    inst.works = works;
    inst.time_steps = spec.time_steps;
    inst.epoch_duration = spec.epoch_duration;
    inst.commodities = make_commodities(homes, works, spec.time_steps);
    return inst;
}

namespace {

// Replicates a per-base-arc vector over a time expansion (virtual arcs get 0).
std::vector<double> replicate_over_time(const TimeExpandedNetwork& tx,
                                        const std::vector<double>& base) {
    std::vector<double> out(tx.graph.num_arcs(), 0.0);
    for (int e = 0; e < tx.graph.num_real_arcs(); ++e) out[e] = base[tx.base_of(e).first];
    return out;
}

}  // namespace

std::vector<double> oracle_target(const Instance& inst, OracleKind oracle, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "oracle"));
    const int nb = inst.net.num_arcs();

    std::vector<double> theta0(nb, 0.0), theta1(nb, 0.0), costs(nb, 0.0);
    switch (oracle) {
        case OracleKind::EasyMCFP:
            for (int a = 0; a < nb; ++a) costs[a] = inst.net.arcs[a].length;
            break;
        case OracleKind::RandomMCFP:
            for (int a = 0; a < nb; ++a) costs[a] = rng.uniform(0.0, 100.0);
            break;
        case OracleKind::EasyWE:
            for (int a = 0; a < nb; ++a) {
                theta0[a] = inst.net.arcs[a].length;
                theta1[a] = 1.0;
            }
            break;
        case OracleKind::RandomWE:
            for (int a = 0; a < nb; ++a) {
                theta0[a] = rng.uniform(1.0, 100.0);
                theta1[a] = rng.uniform(1.0, 20.0);
            }
            break;
    }

    double total_demand = 0.0;
    for (const Commodity& c : inst.commodities) total_demand += c.demand;
    const bool is_we = oracle == OracleKind::EasyWE || oracle == OracleKind::RandomWE;

    FwOptions fw;
    fw.away_steps = true;
    fw.tol = 0.0;
    fw.abs_tol = 0.5e-4 * std::max(1.0, total_demand);
    fw.max_iter = 200000;

    if (!inst.time_variant()) {
        if (is_we) {
            WeSolution we = solve_we(inst.net, inst.commodities, affine_latency_params(theta0, theta1), fw);
            return we.flow;
        }
        std::vector<double> caps(nb, std::numeric_limits<double>::infinity());
        McmfSolution sol = linear_min_multiflow(inst.net, costs, caps, inst.commodities);
        if (sol.status != McmfStatus::optimal) throw SolverError("oracle flow problem infeasible");
        return sol.aggregated;
    }

    const TimeExpandedNetwork tx = time_expand(inst.net, inst.time_steps, inst.epoch_duration);
    const std::vector<Commodity> cs = tx.map_commodities(inst.commodities);
    if (is_we) {
        LatencyParams p = affine_latency_params(replicate_over_time(tx, theta0),
                                                replicate_over_time(tx, theta1));
        WeSolution we = solve_we(tx.graph, cs, p, fw);
        return collapse_flow_matrix(tx, we.flow);
    }
    const std::vector<double> tcosts = replicate_over_time(tx, costs);
    std::vector<double> caps(tx.graph.num_arcs(), std::numeric_limits<double>::infinity());
    McmfSolution sol = linear_min_multiflow(tx.graph, tcosts, caps, cs);
    if (sol.status != McmfStatus::optimal) throw SolverError("oracle flow problem infeasible");
    return collapse_flow_matrix(tx, sol.aggregated);
}

Dataset build_dataset(const ScenarioSpec& spec, const std::string& out_dir, int threads) {
    Dataset ds;
    ds.spec = spec;
    const int n = spec.num_instances();
    ds.instances.resize(n);
    ds.targets.resize(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        const std::uint64_t iseed = derive_seed(spec.seed, "instance", i);
        ds.instances[i] = make_instance(spec, iseed);
        ds.targets[i] = oracle_target(ds.instances[i], spec.oracle, derive_seed(spec.seed, "target", i));
    });
    for (int i = 0; i < spec.n_train; ++i) ds.train_idx.push_back(i);
    for (int i = 0; i < spec.n_val; ++i) ds.val_idx.push_back(spec.n_train + i);
    for (int i = 0; i < spec.n_test; ++i) ds.test_idx.push_back(spec.n_train + spec.n_val + i);
    io::save_dataset(ds, out_dir);
    return ds;
}

Dataset load_dataset(const std::string& dir) { return io::load_dataset_dir(dir); }

}  // namespace equiflow
