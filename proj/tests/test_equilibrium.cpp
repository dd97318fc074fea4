#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "equiflow/common.hpp"
#include "equiflow/equilibrium.hpp"
#include "equiflow/rng.hpp"
#include "test_nets.hpp"

using namespace equiflow;
using namespace equiflow::testnets;

namespace {

// Reference solver for the potential minimum over the path formulation:
// projected gradient descent on the path weights, with a sorted simplex
// projection per commodity. Independent of the Frank-Wolfe/dijkstra path.
struct PgReference {
    std::vector<double> flow;
};

std::vector<double> project_simplex(std::vector<double> v, double total) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    int k = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - total) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            tau = t;
            k = static_cast<int>(i + 1);
        }
    }
    (void)k;
    for (double& x : v) x = std::max(0.0, x - tau);
    return v;
}

PgReference pg_reference_we(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                            const LatencyParams& params, int iters = 40000, double lr = 2e-3) {
    std::vector<std::vector<std::vector<int>>> paths;
    std::vector<std::vector<double>> alpha;
    for (const Commodity& c : commodities) {
        paths.push_back(enumerate_paths(net, c.origin, c.destination));
        REQUIRE(!paths.back().empty());
        alpha.push_back(std::vector<double>(paths.back().size(), c.demand / paths.back().size()));
    }
    std::vector<double> y(net.num_arcs(), 0.0);
    for (int it = 0; it < iters; ++it) {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t j = 0; j < paths.size(); ++j)
            for (std::size_t p = 0; p < paths[j].size(); ++p)
                for (int a : paths[j][p]) y[a] += alpha[j][p];
        const CostVector ell = latencies(params, y);
        for (std::size_t j = 0; j < paths.size(); ++j) {
            std::vector<double> g(paths[j].size(), 0.0);
            for (std::size_t p = 0; p < paths[j].size(); ++p)
                for (int a : paths[j][p]) g[p] += ell[a];
            for (std::size_t p = 0; p < paths[j].size(); ++p) alpha[j][p] -= lr * g[p];
            alpha[j] = project_simplex(alpha[j], commodities[j].demand);
        }
    }
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < paths.size(); ++j)
        for (std::size_t p = 0; p < paths[j].size(); ++p)
            for (int a : paths[j][p]) y[a] += alpha[j][p];
    return {y};
}

LatencyParams pigou_params() {
    return affine_latency_params({1.0, 2.0}, {1.0, 1.0});
}

}  // namespace

TEST_CASE("Pigou equilibrium splits 1.5 / 0.5") {
    RoadNetwork net = pigou();
    std::vector<Commodity> cs = {{0, 1, 2.0, 0}};
    WeSolution we = solve_we(net, cs, pigou_params(), {1e-6, 0.0, 5000, false});
    CHECK(we.flow[0] == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(we.flow[1] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(we.converged);
    // both used arcs see the common latency 2.5
    const CostVector ell = latencies(pigou_params(), we.flow);
    CHECK(ell[0] == doctest::Approx(2.5).epsilon(1e-4));
    CHECK(ell[1] == doctest::Approx(2.5).epsilon(1e-4));
    CHECK(equilibrium_gap(net, cs, pigou_params(), we.flow) <= 1e-4);
}

TEST_CASE("single-path network carries all demand with zero gap") {
    RoadNetwork net = line(4);
    std::vector<Commodity> cs = {{0, 3, 2.5, 0}};
    LatencyParams p = affine_latency_params({1.0, 2.0, 0.5}, {1.0, 0.0, 3.0});
    WeSolution we = solve_we(net, cs, p);
    for (int a = 0; a < 3; ++a) CHECK(we.flow[a] == doctest::Approx(2.5));
    CHECK(equilibrium_gap(net, cs, p, we.flow) <= 1e-9);
}

TEST_CASE("negative coefficients are rejected, zero latencies allowed") {
    RoadNetwork net = pigou();
    std::vector<Commodity> cs = {{0, 1, 1.0, 0}};
    LatencyParams bad = affine_latency_params({-1.0, 1.0}, {1.0, 1.0});
    CHECK_THROWS_AS(solve_we(net, cs, bad), SolverError);
    LatencyParams zero(2, 2);
    WeSolution we = solve_we(net, cs, zero);  // all-zero latencies are fine
    CHECK(we.flow[0] + we.flow[1] == doctest::Approx(1.0));
}

TEST_CASE("grid equilibrium matches the projected-gradient reference") {
    RoadNetwork net = dag_grid(3);
    std::vector<Commodity> cs = {{0, 8, 3.0, 0}, {1, 8, 2.0, 0}};
    // street-length intercept, unit slope
    std::vector<double> t0(net.num_arcs()), t1(net.num_arcs(), 1.0);
    for (int a = 0; a < net.num_arcs(); ++a) t0[a] = net.arcs[a].length;
    LatencyParams p = affine_latency_params(t0, t1);

    WeSolution fw = solve_we(net, cs, p, {1e-9, 0.0, 50000, false});
    PgReference ref = pg_reference_we(net, cs, p);
    for (int a = 0; a < net.num_arcs(); ++a)
        CHECK(std::abs(fw.flow[a] - ref.flow[a]) <= 1e-3);
}

TEST_CASE("away-step and plain variants agree (uniqueness)") {
    RoadNetwork net = dag_grid(3);
    std::vector<Commodity> cs = {{0, 8, 4.0, 0}, {1, 8, 1.0, 0}};
    std::vector<double> t0(net.num_arcs(), 1.0), t1(net.num_arcs(), 0.5);
    LatencyParams p = affine_latency_params(t0, t1);
    const double tol = 1e-7;
    WeSolution plain = solve_we(net, cs, p, {tol, 0.0, 100000, false});
    WeSolution away = solve_we(net, cs, p, {tol, 0.0, 100000, true});
    for (int a = 0; a < net.num_arcs(); ++a)
        CHECK(std::abs(plain.flow[a] - away.flow[a]) <= 1e-3);
}

TEST_CASE("scaling all latencies leaves the equilibrium unchanged") {
    RoadNetwork net = pigou();
    std::vector<Commodity> cs = {{0, 1, 2.0, 0}};
    LatencyParams p = pigou_params();
    LatencyParams scaled = p;
    for (double& v : scaled.coef) v *= 7.5;
    WeSolution a = solve_we(net, cs, p, {1e-7, 0.0, 20000, false});
    WeSolution b = solve_we(net, cs, scaled, {1e-7, 0.0, 20000, false});
    CHECK(a.flow[0] == doctest::Approx(b.flow[0]).epsilon(1e-4));
    CHECK(b.potential == doctest::Approx(7.5 * a.potential).epsilon(1e-6));
}

TEST_CASE("equilibrium gap certificates") {
    RoadNetwork net = pigou();
    std::vector<Commodity> cs = {{0, 1, 2.0, 0}};
    LatencyParams p = pigou_params();
    CHECK(equilibrium_gap(net, cs, p, {1.5, 0.5}) == doctest::Approx(0.0).scale(1.0));
    // all flow on arc 0: latencies (3, 2); 2*3 - 2*2 = 2
    CHECK(equilibrium_gap(net, cs, p, {2.0, 0.0}) == doctest::Approx(2.0));

    MultiFlow mf;
    mf.per_commodity = {{1.5, 0.5}};
    CHECK(equilibrium_gap_multiflow(net, cs, p, mf) == doctest::Approx(0.0).scale(1.0));
    mf.per_commodity = {{2.0, 0.0}};
    CHECK(equilibrium_gap_multiflow(net, cs, p, mf) == doctest::Approx(2.0));
}

TEST_CASE("potential and latencies are consistent") {
    LatencyParams p = affine_latency_params({1.0}, {1.0});
    CHECK(latencies(p, {2.0})[0] == doctest::Approx(3.0));
    CHECK(potential_value(p, {2.0}) == doctest::Approx(4.0));  // 1*2 + 2^2/2

    LatencyParams zero(2, 3);
    CHECK(potential_value(zero, {1.0, 2.0, 3.0}) == 0.0);
    for (double v : latencies(zero, {1.0, 2.0, 3.0})) CHECK(v == 0.0);
}

TEST_CASE("latencies are the potential gradient (central differences)") {
    Rng rng(31);
    for (int degree : {1, 2, 3}) {
        LatencyParams p(degree, 5);
        for (double& v : p.coef) v = rng.uniform(0.0, 2.0);
        std::vector<double> y(5);
        for (double& v : y) v = rng.uniform(0.5, 3.0);
        const CostVector ell = latencies(p, y);
        const double h = 1e-5;
        for (int a = 0; a < 5; ++a) {
            std::vector<double> yp = y, ym = y;
            yp[a] += h;
            ym[a] -= h;
            const double fd = (potential_value(p, yp) - potential_value(p, ym)) / (2 * h);
            CHECK(std::abs(fd - ell[a]) <= 1e-6 * std::max(1.0, std::abs(ell[a])));
        }
    }
}

TEST_CASE("euclidean projection on the Pigou polytope") {
    RoadNetwork net = pigou();
    std::vector<Commodity> cs = {{0, 1, 1.0, 0}};
    ProjectionOptions opts;
    opts.tol = 1e-12;

    auto y = euclidean_projection(net, cs, {0.9, 0.1}, opts);
    CHECK(y[0] == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(0.1).epsilon(1e-6));

    y = euclidean_projection(net, cs, {1.0, 0.5}, opts);
    CHECK(y[0] == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(0.25).epsilon(1e-6));

    // hyperplane projection (1.5, -0.5) clips to the vertex
    y = euclidean_projection(net, cs, {2.0, 0.0}, opts);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("projection is the identity on feasible points and non-expansive") {
    RoadNetwork net = diamond();
    std::vector<Commodity> cs = {{0, 3, 2.0, 0}};
    ProjectionOptions opts;
    opts.tol = 1e-12;
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        // a random point of the aggregated polytope: split demand over routes
        const double x = rng.uniform(0.0, 2.0);
        const std::vector<double> inside = {x, x, 2.0 - x, 2.0 - x};
        auto y = euclidean_projection(net, cs, inside, opts);
        for (int a = 0; a < 4; ++a) CHECK(y[a] == doctest::Approx(inside[a]).epsilon(1e-5));

        std::vector<double> t1(4), t2(4);
        for (int a = 0; a < 4; ++a) {
            t1[a] = rng.uniform(-2.0, 3.0);
            t2[a] = rng.uniform(-2.0, 3.0);
        }
        auto p1 = euclidean_projection(net, cs, t1, opts);
        auto p2 = euclidean_projection(net, cs, t2, opts);
        double dp = 0.0, dt = 0.0;
        for (int a = 0; a < 4; ++a) {
            dp += (p1[a] - p2[a]) * (p1[a] - p2[a]);
            dt += (t1[a] - t2[a]) * (t1[a] - t2[a]);
        }
        CHECK(std::sqrt(dp) <= std::sqrt(dt) + 1e-6);
    }
}

TEST_CASE("solve_we returns a conserving flow within the stated gap") {
    RoadNetwork net = dag_grid(3);
    std::vector<Commodity> cs = {{0, 8, 3.0, 0}, {3, 5, 1.0, 0}};
    std::vector<double> t0(net.num_arcs(), 2.0), t1(net.num_arcs(), 1.0);
    LatencyParams p = affine_latency_params(t0, t1);
    const double tol = 1e-5;
    WeSolution we = solve_we(net, cs, p, {tol, 0.0, 20000, false});
    double demand = 4.0;
    CHECK(equilibrium_gap(net, cs, p, we.flow) <= tol * std::max(1.0, demand) * 10);
    CHECK(check_conservation_aggregated(net, we.flow, cs, 1e-7).ok);
}
