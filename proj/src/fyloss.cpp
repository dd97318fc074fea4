#include "equiflow/fyloss.hpp"

#include <cmath>

#include "equiflow/common.hpp"
#include "equiflow/kernels.hpp"

namespace equiflow {

double bregman_divergence_euclidean(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw DataError("bregman divergence needs equal dimensions");
    return 0.5 * kernels::sum_sq_diff(p.data(), q.data(), p.size());
}

namespace {

// Gaussian elimination with partial pivoting; A is n x n row-major, solves in
// place into x. Throws on singular systems.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> rhs) {
    const int n = static_cast<int>(rhs.size());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(A[static_cast<std::size_t>(k) * n + k]);
        for (int r = k + 1; r < n; ++r) {
            const double v = std::abs(A[static_cast<std::size_t>(r) * n + k]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-14) throw SolverError("singular system in conservation projection");
        if (piv != k) {
            for (int j = 0; j < n; ++j)
                std::swap(A[static_cast<std::size_t>(piv) * n + j], A[static_cast<std::size_t>(k) * n + j]);
            std::swap(rhs[piv], rhs[k]);
        }
        const double inv = 1.0 / A[static_cast<std::size_t>(k) * n + k];
        for (int r = k + 1; r < n; ++r) {
            const double f = A[static_cast<std::size_t>(r) * n + k] * inv;
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j)
                A[static_cast<std::size_t>(r) * n + j] -= f * A[static_cast<std::size_t>(k) * n + j];
            rhs[r] -= f * rhs[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int k = n - 1; k >= 0; --k) {
        double v = rhs[k];
        for (int j = k + 1; j < n; ++j) v -= A[static_cast<std::size_t>(k) * n + j] * x[j];
        x[k] = v / A[static_cast<std::size_t>(k) * n + k];
    }
    return x;
}

}  // namespace

std::vector<double> project_to_conservation_hull(const RoadNetwork& net,
                                                 const std::vector<double>& flow,
                                                 const std::vector<Commodity>& commodities) {
    // min ||delta||^2 s.t. N(flow + delta) = b  =>  delta = N'w, (NN')w = b - N*flow.
    const int nv = net.num_vertices();
    std::vector<double> resid = supply_vector(net, commodities);
    const std::vector<double> div = divergence(net, flow);
    for (int v = 0; v < nv; ++v) resid[v] -= div[v];

    // NN' is the (out-in) incidence Gram matrix; ridge keeps it nonsingular
    // on the all-ones nullspace.
    std::vector<double> gram(static_cast<std::size_t>(nv) * nv, 0.0);
    for (const Arc& a : net.arcs) {
        gram[static_cast<std::size_t>(a.tail) * nv + a.tail] += 1.0;
        gram[static_cast<std::size_t>(a.head) * nv + a.head] += 1.0;
        gram[static_cast<std::size_t>(a.tail) * nv + a.head] -= 1.0;
        gram[static_cast<std::size_t>(a.head) * nv + a.tail] -= 1.0;
    }
    for (int v = 0; v < nv; ++v) gram[static_cast<std::size_t>(v) * nv + v] += 1e-10;

    const std::vector<double> w = solve_dense(std::move(gram), resid);
    std::vector<double> out = flow;
    for (const Arc& a : net.arcs) out[a.id] += w[a.tail] - w[a.head];
    return out;
}

namespace {

std::vector<double> scrubbed_target(const RoadNetwork& net,
                                    const std::vector<Commodity>& commodities,
                                    const std::vector<double>& target, double dust_tol) {
    const ConservationReport rep = check_conservation_aggregated(net, target, commodities, 1e-9);
    if (rep.ok) return target;
    if (rep.max_residual > dust_tol)
        throw DataError("target flow violates conservation beyond the dust tolerance");
    return project_to_conservation_hull(net, target, commodities);
}

}  // namespace

LossReport euclidean_fy_loss(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                             const std::vector<double>& theta, const std::vector<double>& target,
                             const EuclideanLossOptions& opts) {
    if (theta.size() != target.size() || static_cast<int>(theta.size()) != net.num_arcs())
        throw DataError("theta/target must cover every arc");
    const std::vector<double> ybar = scrubbed_target(net, commodities, target, opts.dust_tol);

    LossReport rep;
    rep.prediction = euclidean_projection(net, commodities, theta, opts.projection);
    const std::size_t n = theta.size();
    const std::size_t nr = opts.projection.real_arcs < 0 ? n : opts.projection.real_arcs;

    const auto value = [&](const std::vector<double>& y) {
        return kernels::dot(theta.data(), y.data(), nr) -
               0.5 * kernels::dot(y.data(), y.data(), nr);
    };
    rep.loss = value(rep.prediction) - value(ybar);
    rep.gradient.assign(n, 0.0);
    kernels::vsub(rep.prediction.data(), ybar.data(), rep.gradient.data(), nr);
    rep.bregman = 0.5 * kernels::sum_sq_diff(ybar.data(), rep.prediction.data(), nr);
    return rep;
}

SandwichReport fy_sandwich_check(const RoadNetwork& net, const std::vector<Commodity>& commodities,
                                 const std::vector<double>& theta, const std::vector<double>& target,
                                 const EuclideanLossOptions& opts) {
    const LossReport rep = euclidean_fy_loss(net, commodities, theta, target, opts);
    SandwichReport out;
    out.bregman = rep.bregman;
    out.loss = rep.loss;
    out.ok = (out.bregman >= 0.0) && (out.bregman <= out.loss + 1e-7);
    return out;
}

}  // namespace equiflow
