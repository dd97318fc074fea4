#include "equiflow/kernels.hpp"

#include <cstddef>

namespace equiflow::kernels {
namespace {

double dot_s(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_s(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_s(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void vadd_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void vsub_s(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

double sum_s(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sum_abs_diff_s(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d < 0 ? -d : d;
    }
    return acc;
}

double sum_sq_diff_s(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void clamp_min_zero_s(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] < 0.0) x[i] = 0.0;
}

void affine_latency_s(const double* t0, const double* t1, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = t0[i] + t1[i] * y[i];
}

double quad_potential_s(const double* t0, const double* t1, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += t0[i] * y[i] + 0.5 * t1[i] * y[i] * y[i];
    return acc;
}

void matvec_s(const double* W, const double* x, double* y, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot_s(W + r * cols, x, cols);
}

void matvec_t_add_s(const double* W, const double* g, double* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_s(g[r], W + r * cols, out, cols);
}

void ger_s(double* W, const double* g, const double* x, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_s(g[r], x, W + r * cols, cols);
}

void relu_s(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_mask_s(const double* pre, const double* g, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = pre[i] > 0.0 ? g[i] : 0.0;
}

}  // namespace

namespace detail {
const Ops scalar_ops = {
    dot_s,        axpy_s,           scal_s,          vadd_s,          vsub_s,
    sum_s,        sum_abs_diff_s,   sum_sq_diff_s,   clamp_min_zero_s,
    affine_latency_s, quad_potential_s,
    matvec_s,     matvec_t_add_s,   ger_s,           relu_s,          relu_mask_s,
};
}  // namespace detail

}  // namespace equiflow::kernels
