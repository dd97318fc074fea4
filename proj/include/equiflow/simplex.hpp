#pragma once

#include <utility>
#include <vector>

namespace equiflow {

// Dense revised simplex for small restricted-master LPs:
//     min c'x  s.t.  A x = b,  x >= 0,  b >= 0.
// The caller supplies an initial identity-like feasible basis (slack and
// overflow columns), so no phase-1 is needed. Bland's rule throughout
// (anti-cycling); the explicit basis inverse is recomputed from scratch
// every 50 pivots.
class DenseSimplex {
  public:
    explicit DenseSimplex(std::vector<double> rhs);

    int num_rows() const { return m_; }
    int num_cols() const { return static_cast<int>(cols_.size()); }

    // entries: (row, coefficient) pairs, rows may repeat (summed).
    int add_column(const std::vector<std::pair<int, double>>& entries, double cost);

    // Columns of the initial basis, one per row, in row order. Must form a
    // feasible (diagonal) basis: column i has a single positive entry in row i.
    void set_initial_basis(const std::vector<int>& basis_cols);

    // Optimizes from the current basis. Returns the objective value.
    // Throws SolverError on unbounded (impossible for well-formed masters).
    double optimize();

    double primal_value(int col) const;
    std::vector<double> primal() const;
    const std::vector<double>& duals() const { return duals_; }  // valid after optimize()
    double objective() const { return objective_; }

  private:
    void refresh_inverse();
    void compute_basic_values();
    std::vector<double> ftran(const std::vector<double>& col) const;  // B^-1 * col

    int m_ = 0;
    std::vector<double> b_;
    std::vector<std::vector<double>> cols_;  // dense columns, length m_
    std::vector<double> cost_;
    std::vector<int> basis_;      // column index per row
    std::vector<int> in_basis_;   // column -> row or -1
    std::vector<double> binv_;    // m_ x m_, row-major
    std::vector<double> xb_;      // basic variable values
    std::vector<double> duals_;
    double objective_ = 0.0;
    int pivots_since_refresh_ = 0;
};

}  // namespace equiflow
