#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "equiflow/common.hpp"
#include "equiflow/equilibrium.hpp"
#include "equiflow/io.hpp"
#include "equiflow/rng.hpp"
#include "equiflow/scenarios.hpp"
#include "test_nets.hpp"

using namespace equiflow;
namespace fs = std::filesystem;

namespace {

bool strongly_connected(const RoadNetwork& net) {
    auto reach = [&](bool forward) {
        std::vector<char> seen(net.num_vertices(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            const auto& arcs = forward ? net.out_arcs[v] : net.in_arcs[v];
            for (int aid : arcs) {
                const int w = forward ? net.arcs[aid].head : net.arcs[aid].tail;
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        return std::count(seen.begin(), seen.end(), 1) == net.num_vertices();
    };
    return reach(true) && reach(false);
}

double gini(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    if (total <= 0.0) return 0.0;
    const double n = static_cast<double>(v.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) weighted += (i + 1) * v[i];
    return 2.0 * weighted / (n * total) - (n + 1.0) / n;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& x) {
        std::vector<int> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int i, int j) { return x[i] < x[j]; });
        std::vector<double> r(x.size());
        for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i] / n;
        mb += rb[i] / n;
    }
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generated networks are strongly connected with grid-scale arc counts") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        RoadNetwork net = generate_network(seed, 3);
        CHECK(net.num_arcs() >= 24);
        CHECK(strongly_connected(net));
    }
}

TEST_CASE("network generation is deterministic") {
    RoadNetwork a = generate_network(42, 5);
    RoadNetwork b = generate_network(42, 5);
    REQUIRE(a.num_arcs() == b.num_arcs());
    for (int i = 0; i < a.num_arcs(); ++i) {
        CHECK(a.arcs[i].tail == b.arcs[i].tail);
        CHECK(a.arcs[i].head == b.arcs[i].head);
        CHECK(a.arcs[i].length == b.arcs[i].length);
    }
    RoadNetwork c = generate_network(43, 5);
    bool differs = c.num_arcs() != a.num_arcs();
    for (int i = 0; !differs && i < std::min(a.num_arcs(), c.num_arcs()); ++i)
        differs = a.arcs[i].length != c.arcs[i].length;
    CHECK(differs);
}

TEST_CASE("LE layout confines homes and works to opposite quarters") {
    RoadNetwork net = generate_network(7, 6);
    double xmin = 1e18, xmax = -1e18, ymin = 1e18, ymax = -1e18;
    for (const Vertex& v : net.vertices) {
        xmin = std::min(xmin, v.x);
        xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y);
        ymax = std::max(ymax, v.y);
    }
    auto [homes, works] = place_locations(net, Layout::LE, 10, 10, 5);
    for (int h : homes) {
        CHECK(net.vertices[h].x >= 0.5 * (xmin + xmax) - 1e-9);
        CHECK(net.vertices[h].y >= 0.5 * (ymin + ymax) - 1e-9);
    }
    for (int w : works) {
        CHECK(net.vertices[w].x <= 0.5 * (xmin + xmax) + 1e-9);
        CHECK(net.vertices[w].y <= 0.5 * (ymin + ymax) + 1e-9);
    }
}

TEST_CASE("HE sampling with counts = |V| is a permutation") {
    RoadNetwork net = grid_network(4);
    auto [homes, works] = place_locations(net, Layout::HE, 16, 16, 9);
    std::set<int> hs(homes.begin(), homes.end());
    CHECK(hs.size() == 16u);
    std::set<int> ws(works.begin(), works.end());
    CHECK(ws.size() == 16u);
}

TEST_CASE("SW sampling frequency tracks vertex degree") {
    RoadNetwork net = generate_network(3, 5);
    std::vector<double> counts(net.num_vertices(), 0.0), degree(net.num_vertices(), 0.0);
    for (int v = 0; v < net.num_vertices(); ++v)
        degree[v] = static_cast<double>(net.out_arcs[v].size() + net.in_arcs[v].size());
    auto [homes, works] = place_locations(net, Layout::SW, 5000, 5000, 13);
    for (int h : homes) counts[h] += 1.0;
    for (int w : works) counts[w] += 1.0;
    CHECK(spearman(counts, degree) > 0.5);
}

TEST_CASE("commodity pairing and departure epochs") {
    std::vector<int> homes(100), works(100);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        homes[i] = static_cast<int>(rng.below(50));
        works[i] = 50 + static_cast<int>(rng.below(50));
    }
    auto cs = make_commodities(homes, works, 20);
    CHECK(cs.size() == 200u);
    for (int i = 0; i < 100; ++i) {
        CHECK(cs[i].departure_epoch == 0);
        CHECK(cs[100 + i].departure_epoch == 10);
        CHECK(cs[i].origin != cs[i].destination);
    }
    auto flat = make_commodities(homes, works, 1);
    for (const Commodity& c : flat) CHECK(c.departure_epoch == 0);
}

TEST_CASE("make_commodities repairs clashing home/work draws") {
    std::vector<int> homes = {3, 4};
    std::vector<int> works = {3, 5};
    auto cs = make_commodities(homes, works, 1);
    for (const Commodity& c : cs) CHECK(c.origin != c.destination);
}

TEST_CASE("EasyMCFP oracle routes everything along a single path") {
    Instance inst;
    inst.net = testnets::line(4);
    inst.commodities = {{0, 3, 5.0, 0}};
    inst.homes = {0};
    inst.works = {3};
    const auto target = oracle_target(inst, OracleKind::EasyMCFP, 1);
    for (int a = 0; a < 3; ++a) CHECK(target[a] == doctest::Approx(5.0));
}

TEST_CASE("EasyWE oracle reproduces the embedded two-arc equilibrium") {
    Instance inst;
    inst.net = testnets::pigou();
    inst.net.arcs[1].length = 2.0;  // d = (1, 2)
    inst.net.finalize();
    inst.commodities = {{0, 1, 2.0, 0}};
    inst.homes = {0};
    inst.works = {1};
    const auto target = oracle_target(inst, OracleKind::EasyWE, 1);
    CHECK(target[0] == doctest::Approx(1.5).epsilon(1e-3));
    CHECK(target[1] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("random oracles are reproducible bit-exactly") {
    ScenarioSpec spec;
    spec.layout = Layout::HE;
    spec.oracle = OracleKind::RandomMCFP;
    spec.agents = 8;
    spec.size = 4;
    spec.seed = 2;
    Instance inst = make_instance(spec, derive_seed(2, "instance", 0));
    const auto a = oracle_target(inst, OracleKind::RandomMCFP, 123);
    const auto b = oracle_target(inst, OracleKind::RandomMCFP, 123);
    CHECK(a == b);
    const auto c = oracle_target(inst, OracleKind::RandomMCFP, 124);
    CHECK(a != c);
}

TEST_CASE("oracle targets conserve flow; WE targets carry tight gap certificates") {
    ScenarioSpec spec;
    spec.agents = 10;
    spec.size = 4;
    spec.seed = 31;
    for (OracleKind o : {OracleKind::EasyMCFP, OracleKind::EasyWE, OracleKind::RandomWE}) {
        for (int i = 0; i < 3; ++i) {
            spec.layout = (i % 2 == 0) ? Layout::LE : Layout::HE;
            Instance inst = make_instance(spec, derive_seed(31, "instance", i));
            const auto target = oracle_target(inst, o, derive_seed(31, "target", i));
            CHECK(check_conservation_aggregated(inst.net, target, inst.commodities, 1e-7).ok);
            if (o == OracleKind::EasyWE || o == OracleKind::RandomWE) {
                std::vector<double> t0(inst.net.num_arcs()), t1(inst.net.num_arcs());
                Rng rng(derive_seed(derive_seed(31, "target", i), "oracle"));
                for (int a = 0; a < inst.net.num_arcs(); ++a) {
                    if (o == OracleKind::EasyWE) {
                        t0[a] = inst.net.arcs[a].length;
                        t1[a] = 1.0;
                    } else {
                        t0[a] = rng.uniform(1.0, 100.0);
                        t1[a] = rng.uniform(1.0, 20.0);
                    }
                }
                double demand = 0.0;
                for (const Commodity& c : inst.commodities) demand += c.demand;
                const double gap = equilibrium_gap(inst.net, inst.commodities,
                                                   affine_latency_params(t0, t1), target);
                CHECK(gap <= 1e-4 * demand);
            }
        }
    }
}

TEST_CASE("LE flows are more concentrated than HE flows (Gini, seed-paired)") {
    int le_wins = 0;
    for (int pair = 0; pair < 10; ++pair) {
        ScenarioSpec spec;
        spec.agents = 20;
        spec.size = 5;
        spec.seed = 100 + pair;
        spec.oracle = OracleKind::EasyWE;
        spec.layout = Layout::LE;
        Instance le = make_instance(spec, derive_seed(spec.seed, "instance", 0));
        spec.layout = Layout::HE;
        Instance he = make_instance(spec, derive_seed(spec.seed, "instance", 0));
        const auto le_t = oracle_target(le, OracleKind::EasyWE, spec.seed);
        const auto he_t = oracle_target(he, OracleKind::EasyWE, spec.seed);
        if (gini(le_t) > gini(he_t)) ++le_wins;
    }
    CHECK(le_wins >= 6);
}

TEST_CASE("instance JSON round-trips") {
    ScenarioSpec spec;
    spec.agents = 6;
    spec.size = 3;
    spec.time_steps = 4;
    Instance inst = make_instance(spec, 99);
    const auto path = fs::temp_directory_path() / "eq_inst.json";
    io::save_instance(inst, path.string());
    Instance back = io::load_instance(path.string());
    CHECK(back.net.num_arcs() == inst.net.num_arcs());
    CHECK(back.time_steps == inst.time_steps);
    CHECK(back.commodities == inst.commodities);
    CHECK(back.homes == inst.homes);
    for (int a = 0; a < inst.net.num_arcs(); ++a) {
        CHECK(back.net.arcs[a].length == inst.net.arcs[a].length);
        CHECK(back.net.arcs[a].capacity == inst.net.arcs[a].capacity);
    }
    fs::remove(path);
}

TEST_CASE("flow CSV round-trips in both layouts") {
    const auto dir = fs::temp_directory_path();
    const std::vector<double> flat = {0.0, 1.25, 3.5};
    io::save_flow_csv(flat, 3, 1, (dir / "eq_flat.csv").string());
    CHECK(io::load_flow_csv((dir / "eq_flat.csv").string(), 3, 1) == flat);

    const std::vector<double> timed = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    io::save_flow_csv(timed, 3, 2, (dir / "eq_timed.csv").string());
    CHECK(io::load_flow_csv((dir / "eq_timed.csv").string(), 3, 2) == timed);
    fs::remove(dir / "eq_flat.csv");
    fs::remove(dir / "eq_timed.csv");
}

TEST_CASE("dataset build writes the full file set and regenerates byte-identically") {
    ScenarioSpec spec;
    spec.layout = Layout::LE;
    spec.oracle = OracleKind::EasyMCFP;
    spec.agents = 8;
    spec.size = 4;
    spec.seed = 5;
    const auto dir_a = fs::temp_directory_path() / "eq_ds_a";
    const auto dir_b = fs::temp_directory_path() / "eq_ds_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    Dataset ds = build_dataset(spec, dir_a.string());
    CHECK(ds.instances.size() == 20u);
    CHECK(ds.train_idx.size() == 9u);
    CHECK(ds.val_idx.size() == 5u);
    CHECK(ds.test_idx.size() == 6u);
    for (int i = 0; i < 20; ++i) {
        CHECK(fs::exists(dir_a / io::instance_filename(i)));
        CHECK(fs::exists(dir_a / io::target_filename(i)));
    }
    CHECK(fs::exists(dir_a / "manifest.json"));

    build_dataset(spec, dir_b.string());
    CHECK(slurp(dir_a / "manifest.json") == slurp(dir_b / "manifest.json"));
    for (int i = 0; i < 20; ++i) {
        CHECK(slurp(dir_a / io::instance_filename(i)) == slurp(dir_b / io::instance_filename(i)));
        CHECK(slurp(dir_a / io::target_filename(i)) == slurp(dir_b / io::target_filename(i)));
    }

    Dataset loaded = load_dataset(dir_a.string());
    CHECK(loaded.targets == ds.targets);
    CHECK(loaded.spec.layout == spec.layout);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("LEU and HEU reuse one grid across instances") {
    ScenarioSpec spec;
    spec.layout = Layout::LEU;
    spec.agents = 6;
    spec.size = 4;
    spec.seed = 8;
    Instance a = make_instance(spec, derive_seed(8, "instance", 0));
    Instance b = make_instance(spec, derive_seed(8, "instance", 1));
    REQUIRE(a.net.num_arcs() == b.net.num_arcs());
    for (int i = 0; i < a.net.num_arcs(); ++i) CHECK(a.net.arcs[i].length == b.net.arcs[i].length);
    CHECK(a.homes != b.homes);  // locations vary with the instance seed
}
