#include "equiflow/kernels.hpp"

#include <stdexcept>

namespace equiflow::kernels {
namespace {

const Ops* select_default() {
    if (const Ops* v = detail::avx2_ops_or_null()) return v;
    return &detail::scalar_ops;
}

const Ops* g_active = select_default();
Backend g_backend = (detail::avx2_ops_or_null() != nullptr) ? Backend::avx2 : Backend::scalar;

}  // namespace

const Ops& ops() { return *g_active; }

Backend active_backend() { return g_backend; }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
    return detail::avx2_ops_or_null() != nullptr;
}

void set_backend(Backend b) {
    if (!backend_available(b)) throw std::runtime_error("kernel backend not available on this CPU/build");
    g_backend = b;
    g_active = (b == Backend::scalar) ? &detail::scalar_ops : detail::avx2_ops_or_null();
}

}  // namespace equiflow::kernels
