#include "equiflow/simplex.hpp"

#include <cmath>
#include <cstring>

#include "equiflow/common.hpp"
#include "equiflow/kernels.hpp"

namespace equiflow {

namespace {
constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
constexpr int kRefreshInterval = 50;
}  // namespace

DenseSimplex::DenseSimplex(std::vector<double> rhs) : m_(static_cast<int>(rhs.size())), b_(std::move(rhs)) {
    for (double v : b_)
        if (v < 0.0) throw SolverError("simplex rhs must be nonnegative");
}

int DenseSimplex::add_column(const std::vector<std::pair<int, double>>& entries, double cost) {
    std::vector<double> col(m_, 0.0);
    for (const auto& [row, coef] : entries) {
        if (row < 0 || row >= m_) throw SolverError("simplex column entry out of range");
        col[row] += coef;
    }
    cols_.push_back(std::move(col));
    cost_.push_back(cost);
    in_basis_.push_back(-1);
    return static_cast<int>(cols_.size()) - 1;
}

void DenseSimplex::set_initial_basis(const std::vector<int>& basis_cols) {
    if (static_cast<int>(basis_cols.size()) != m_) throw SolverError("basis size must equal row count");
    basis_ = basis_cols;
    std::fill(in_basis_.begin(), in_basis_.end(), -1);
    for (int r = 0; r < m_; ++r) {
        const auto& col = cols_[basis_[r]];
        if (!(col[r] > 0.0)) throw SolverError("initial basis must be diagonal positive");
        in_basis_[basis_[r]] = r;
    }
    refresh_inverse();
    compute_basic_values();
}

void DenseSimplex::refresh_inverse() {
    // Gauss-Jordan on [B | I] with partial pivoting.
    std::vector<double> B(static_cast<std::size_t>(m_) * m_);
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
        for (int k = 0; k < m_; ++k) B[static_cast<std::size_t>(r) * m_ + k] = cols_[basis_[k]][r];
        binv_[static_cast<std::size_t>(r) * m_ + r] = 1.0;
    }
    for (int k = 0; k < m_; ++k) {
        int piv = k;
        double best = std::abs(B[static_cast<std::size_t>(k) * m_ + k]);
        for (int r = k + 1; r < m_; ++r) {
            const double v = std::abs(B[static_cast<std::size_t>(r) * m_ + k]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best < 1e-12) throw SolverError("singular basis in simplex refresh");
        if (piv != k) {
            for (int j = 0; j < m_; ++j) {
                std::swap(B[static_cast<std::size_t>(piv) * m_ + j], B[static_cast<std::size_t>(k) * m_ + j]);
                std::swap(binv_[static_cast<std::size_t>(piv) * m_ + j],
                          binv_[static_cast<std::size_t>(k) * m_ + j]);
            }
        }
        const double inv = 1.0 / B[static_cast<std::size_t>(k) * m_ + k];
        for (int j = 0; j < m_; ++j) {
            B[static_cast<std::size_t>(k) * m_ + j] *= inv;
            binv_[static_cast<std::size_t>(k) * m_ + j] *= inv;
        }
        for (int r = 0; r < m_; ++r) {
            if (r == k) continue;
            const double f = B[static_cast<std::size_t>(r) * m_ + k];
            if (f == 0.0) continue;
            kernels::axpy(-f, &B[static_cast<std::size_t>(k) * m_], &B[static_cast<std::size_t>(r) * m_], m_);
            kernels::axpy(-f, &binv_[static_cast<std::size_t>(k) * m_],
                          &binv_[static_cast<std::size_t>(r) * m_], m_);
        }
    }
    pivots_since_refresh_ = 0;
}

void DenseSimplex::compute_basic_values() {
    xb_.assign(m_, 0.0);
    kernels::matvec(binv_.data(), b_.data(), xb_.data(), m_, m_);
    for (double& v : xb_)
        if (v < 0.0 && v > -1e-7) v = 0.0;  // degenerate noise
}

std::vector<double> DenseSimplex::ftran(const std::vector<double>& col) const {
    std::vector<double> w(m_, 0.0);
    kernels::matvec(binv_.data(), col.data(), w.data(), m_, m_);
    return w;
}

double DenseSimplex::optimize() {
    if (basis_.empty()) throw SolverError("simplex has no initial basis");
    const int n = num_cols();
    duals_.assign(m_, 0.0);

    while (true) {
        // duals y' = c_B' B^-1
        std::fill(duals_.begin(), duals_.end(), 0.0);
        for (int r = 0; r < m_; ++r) {
            const double cb = cost_[basis_[r]];
            if (cb != 0.0) kernels::axpy(cb, &binv_[static_cast<std::size_t>(r) * m_], duals_.data(), m_);
        }

        // Bland: first column with negative reduced cost enters.
        int entering = -1;
        for (int j = 0; j < n; ++j) {
            if (in_basis_[j] >= 0) continue;
            const double rc = cost_[j] - kernels::dot(duals_.data(), cols_[j].data(), m_);
            if (rc < -kReducedCostTol) {
                entering = j;
                break;
            }
        }
        if (entering < 0) break;

        const std::vector<double> w = ftran(cols_[entering]);
        int leave_row = -1;
        double best_ratio = 0.0;
        for (int r = 0; r < m_; ++r) {
            if (w[r] > kPivotTol) {
                const double ratio = xb_[r] / w[r];
                if (leave_row < 0 || ratio < best_ratio - 1e-12 ||
                    (std::abs(ratio - best_ratio) <= 1e-12 && basis_[r] < basis_[leave_row])) {
                    leave_row = r;
                    best_ratio = ratio;
                }
            }
        }
        if (leave_row < 0) throw SolverError("unbounded LP in restricted master");

        // pivot: update basis, B^-1 and basic values in place
        const double theta = best_ratio;
        const double piv = w[leave_row];
        in_basis_[basis_[leave_row]] = -1;
        basis_[leave_row] = entering;
        in_basis_[entering] = leave_row;

        double* prow = &binv_[static_cast<std::size_t>(leave_row) * m_];
        kernels::scal(1.0 / piv, prow, m_);
        for (int r = 0; r < m_; ++r) {
            if (r == leave_row) continue;
            if (w[r] != 0.0) kernels::axpy(-w[r], prow, &binv_[static_cast<std::size_t>(r) * m_], m_);
        }
        for (int r = 0; r < m_; ++r) {
            if (r == leave_row) continue;
            xb_[r] -= theta * w[r];
            if (xb_[r] < 0.0 && xb_[r] > -1e-7) xb_[r] = 0.0;
        }
        xb_[leave_row] = theta;

        if (++pivots_since_refresh_ >= kRefreshInterval) {
            refresh_inverse();
            compute_basic_values();
        }
    }

    objective_ = 0.0;
    for (int r = 0; r < m_; ++r) objective_ += cost_[basis_[r]] * xb_[r];
    return objective_;
}

double DenseSimplex::primal_value(int col) const {
    const int r = in_basis_[col];
    return r >= 0 ? xb_[r] : 0.0;
}

std::vector<double> DenseSimplex::primal() const {
    std::vector<double> x(num_cols(), 0.0);
    for (int r = 0; r < m_; ++r) x[basis_[r]] = xb_[r];
    return x;
}

}  // namespace equiflow
