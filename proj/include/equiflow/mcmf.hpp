#pragma once

#include <map>
#include <vector>

#include "equiflow/graph.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

enum class McmfStatus { optimal, infeasible };

struct McmfIterationStat {
    double restricted_objective = 0.0;
    double lagrangian_bound = 0.0;  // sum_j D_j sp_j(c + dual) - u'dual <= optimum
};

struct McmfSolution {
    McmfStatus status = McmfStatus::infeasible;
    MultiFlow multiflow;              // indexed like the input commodity list
    std::vector<double> aggregated;   // per arc
    double objective = 0.0;           // c' y_bar
    std::vector<double> capacity_duals;  // >= 0 per arc (0 where capacity is slack/infinite)
    std::vector<McmfIterationStat> iterations;  // filled when log_iterations is set
};

// Reusable set of priced-out path columns, keyed by (origin, destination).
// Persists across perturbation samples within one gradient step; confine one
// pool to a single solve context (not thread-safe across concurrent solves).
class ColumnPool {
  public:
    std::vector<std::vector<int>>& paths_for(int origin, int destination) {
        return paths_[{origin, destination}];
    }
    // true if the path was new
    bool insert(int origin, int destination, const std::vector<int>& arcs);
    void clear() { paths_.clear(); }
    std::size_t size() const;

  private:
    std::map<std::pair<int, int>, std::vector<std::vector<int>>> paths_;
};

struct McmfOptions {
    double pricing_tol = 1e-8;
    bool log_iterations = false;
    ColumnPool* pool = nullptr;  // optional warm-start column pool
};

// Exact LP optimum of
//     min sum_a costs[a] * ybar_a
//     s.t. per-commodity flow conservation, ybar = sum_j y_j, 0 <= ybar <= u.
// Path-based column generation over a restricted master (dense simplex),
// priced by shortest paths under costs + capacity duals. Unit-demand
// commodities with identical (o,d) are grouped before solving and the group
// flow is split back proportionally. Capacities may be +inf.
McmfSolution linear_min_multiflow(const RoadNetwork& net, const CostVector& costs,
                                  const std::vector<double>& capacities,
                                  const std::vector<Commodity>& commodities,
                                  const McmfOptions& opts = {});

// Routes commodities one at a time along the cheapest path in the residual
// capacity graph. Feasible but possibly suboptimal; objective is always >=
// the exact LP optimum. Throws SolverError when no residual path remains.
MultiFlow greedy_sequential_routing(const RoadNetwork& net, const CostVector& costs,
                                    const std::vector<double>& capacities,
                                    const std::vector<Commodity>& commodities,
                                    const std::vector<int>& order = {});

}  // namespace equiflow
