#pragma once

#include <cstddef>

// Dense double-precision primitives used by the flow solvers and the MLP.
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at startup when the CPU supports it. Both variants are
// equivalence-tested against each other.
namespace equiflow::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name(Backend b);
bool backend_available(Backend b);
// Force a backend (tests). Throws if unavailable on this CPU/build.
void set_backend(Backend b);

struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);  // y += a*x
    void (*scal)(double, double*, std::size_t);
    void (*vadd)(const double*, const double*, double*, std::size_t);
    void (*vsub)(const double*, const double*, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sum_abs_diff)(const double*, const double*, std::size_t);
    double (*sum_sq_diff)(const double*, const double*, std::size_t);
    void (*clamp_min_zero)(double*, std::size_t);
    // out = t0 + t1 * y, elementwise (affine latency evaluation)
    void (*affine_latency)(const double*, const double*, const double*, double*, std::size_t);
    // sum of t0*y + t1*y^2/2 (quadratic potential)
    double (*quad_potential)(const double*, const double*, const double*, std::size_t);
    // y = W x, W row-major rows x cols
    void (*matvec)(const double*, const double*, double*, std::size_t, std::size_t);
    // out += W^T g
    void (*matvec_t_add)(const double*, const double*, double*, std::size_t, std::size_t);
    // W += g x^T (rank-1 accumulate)
    void (*ger)(double*, const double*, const double*, std::size_t, std::size_t);
    void (*relu)(const double*, double*, std::size_t);
    // out = g where pre > 0, else 0
    void (*relu_mask)(const double*, const double*, double*, std::size_t);
};

const Ops& ops();

namespace detail {
extern const Ops scalar_ops;
extern const Ops* avx2_ops_or_null();  // null when not compiled in / unsupported
}

// Convenience wrappers.
inline double dot(const double* a, const double* b, std::size_t n) { return ops().dot(a, b, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { ops().axpy(a, x, y, n); }
inline void scal(double a, double* x, std::size_t n) { ops().scal(a, x, n); }
inline void vadd(const double* a, const double* b, double* o, std::size_t n) { ops().vadd(a, b, o, n); }
inline void vsub(const double* a, const double* b, double* o, std::size_t n) { ops().vsub(a, b, o, n); }
inline double sum(const double* x, std::size_t n) { return ops().sum(x, n); }
inline double sum_abs_diff(const double* a, const double* b, std::size_t n) { return ops().sum_abs_diff(a, b, n); }
inline double sum_sq_diff(const double* a, const double* b, std::size_t n) { return ops().sum_sq_diff(a, b, n); }
inline void clamp_min_zero(double* x, std::size_t n) { ops().clamp_min_zero(x, n); }
inline void affine_latency(const double* t0, const double* t1, const double* y, double* out, std::size_t n) {
    ops().affine_latency(t0, t1, y, out, n);
}
inline double quad_potential(const double* t0, const double* t1, const double* y, std::size_t n) {
    return ops().quad_potential(t0, t1, y, n);
}
inline void matvec(const double* W, const double* x, double* y, std::size_t rows, std::size_t cols) {
    ops().matvec(W, x, y, rows, cols);
}
inline void matvec_t_add(const double* W, const double* g, double* out, std::size_t rows, std::size_t cols) {
    ops().matvec_t_add(W, g, out, rows, cols);
}
inline void ger(double* W, const double* g, const double* x, std::size_t rows, std::size_t cols) {
    ops().ger(W, g, x, rows, cols);
}
inline void relu(const double* x, double* y, std::size_t n) { ops().relu(x, y, n); }
inline void relu_mask(const double* pre, const double* g, double* out, std::size_t n) {
    ops().relu_mask(pre, g, out, n);
}

}  // namespace equiflow::kernels
