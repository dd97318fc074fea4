#include "equiflow/mlp.hpp"

#include <cmath>

#include "equiflow/common.hpp"
#include "equiflow/kernels.hpp"
#include "equiflow/rng.hpp"

namespace equiflow {

const char* to_string(Head h) {
    switch (h) {
        case Head::linear: return "linear";
        case Head::softplus: return "softplus";
        case Head::neg_softplus: return "neg-softplus";
    }
    return "?";
}

Head parse_head(const std::string& s) {
    if (s == "linear") return Head::linear;
    if (s == "softplus") return Head::softplus;
    if (s == "neg-softplus") return Head::neg_softplus;
    throw DataError("unknown head kind '" + s + "'");
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

namespace {
double sigmoid(double x) { return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
}  // namespace

MlpModel MlpModel::create(const MlpSpec& spec, std::uint64_t seed) {
    if (spec.input_dim <= 0) throw DataError("model input dimension must be positive");
    if (spec.branches <= 0) throw DataError("model needs at least one branch");
    MlpModel m;
    m.spec = spec;
    std::vector<int> dims;
    dims.push_back(spec.input_dim);
    dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
    dims.push_back(1);

    int off = 0;
    m.layout.resize(spec.branches);
    for (int br = 0; br < spec.branches; ++br) {
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            Slice s;
            s.in = dims[l];
            s.out = dims[l + 1];
            s.w_off = off;
            off += s.in * s.out;
            s.b_off = off;
            off += s.out;
            m.layout[br].push_back(s);
        }
    }
    m.params.assign(off, 0.0);

    // He-style fan-in scaled uniform init, biases zero.
    for (int br = 0; br < spec.branches; ++br) {
        for (std::size_t l = 0; l < m.layout[br].size(); ++l) {
            const Slice& s = m.layout[br][l];
            Rng rng(derive_seed(seed, "mlp-init", static_cast<std::uint64_t>(br) * 1000 + l));
            const double bound = std::sqrt(6.0 / s.in);
            for (int i = 0; i < s.in * s.out; ++i)
                m.params[s.w_off + i] = rng.uniform(-bound, bound);
        }
    }
    return m;
}

std::vector<double> mlp_forward(const MlpModel& model, const FeatureMatrix& X, ForwardCache* cache) {
    if (X.cols != model.spec.input_dim) throw DataError("feature dimension does not match the model");
    const int n = X.rows;
    const int branches = model.spec.branches;
    std::vector<double> out(static_cast<std::size_t>(branches) * n, 0.0);

    if (cache) {
        cache->rows = n;
        cache->pre.assign(branches, {});
        cache->act.assign(branches, {});
    }

    std::vector<double> buf_in, buf_z;
    for (int br = 0; br < branches; ++br) {
        const auto& layers = model.layout[br];
        if (cache) {
            cache->pre[br].resize(layers.size());
            cache->act[br].resize(layers.size());
            for (std::size_t l = 0; l < layers.size(); ++l) {
                cache->pre[br][l].assign(static_cast<std::size_t>(n) * layers[l].out, 0.0);
                cache->act[br][l].assign(static_cast<std::size_t>(n) * layers[l].out, 0.0);
            }
        }
        for (int i = 0; i < n; ++i) {
            const double* a = X.row(i);
            buf_in.assign(a, a + X.cols);
            for (std::size_t l = 0; l < layers.size(); ++l) {
                const MlpModel::Slice& s = layers[l];
                buf_z.assign(s.out, 0.0);
                kernels::matvec(model.params.data() + s.w_off, buf_in.data(), buf_z.data(), s.out, s.in);
                kernels::vadd(buf_z.data(), model.params.data() + s.b_off, buf_z.data(), s.out);
                if (cache)
                    std::copy(buf_z.begin(), buf_z.end(),
                              cache->pre[br][l].begin() + static_cast<std::size_t>(i) * s.out);
                const bool last = (l + 1 == layers.size());
                if (!last) {
                    buf_in.resize(s.out);
                    kernels::relu(buf_z.data(), buf_in.data(), s.out);
                    if (cache)
                        std::copy(buf_in.begin(), buf_in.end(),
                                  cache->act[br][l].begin() + static_cast<std::size_t>(i) * s.out);
                } else {
                    double v = buf_z[0];
                    switch (model.spec.head) {
                        case Head::linear: break;
                        case Head::softplus: v = softplus(v); break;
                        case Head::neg_softplus: v = -softplus(v); break;
                    }
                    if (cache) cache->act[br][l][i] = v;
                    out[static_cast<std::size_t>(br) * n + i] = v;
                }
            }
        }
    }
    return out;
}

std::vector<double> mlp_backward(const MlpModel& model, const FeatureMatrix& X,
                                 const ForwardCache& cache, const std::vector<double>& upstream) {
    const int n = X.rows;
    const int branches = model.spec.branches;
    if (static_cast<int>(upstream.size()) != branches * n)
        throw DataError("upstream gradient does not match the forward outputs");
    std::vector<double> grad(model.params.size(), 0.0);

    std::vector<double> g, g_prev;
    for (int br = 0; br < branches; ++br) {
        const auto& layers = model.layout[br];
        for (int i = 0; i < n; ++i) {
            // head derivative
            const MlpModel::Slice& last = layers.back();
            const double z = cache.pre[br][layers.size() - 1][static_cast<std::size_t>(i) * last.out];
            double dv = upstream[static_cast<std::size_t>(br) * n + i];
            switch (model.spec.head) {
                case Head::linear: break;
                case Head::softplus: dv *= sigmoid(z); break;
                case Head::neg_softplus: dv *= -sigmoid(z); break;
            }
            g.assign(1, dv);
            for (std::size_t l = layers.size(); l-- > 0;) {
                const MlpModel::Slice& s = layers[l];
                const double* layer_in = l == 0
                                             ? X.row(i)
                                             : cache.act[br][l - 1].data() + static_cast<std::size_t>(i) * s.in;
                kernels::ger(grad.data() + s.w_off, g.data(), layer_in, s.out, s.in);
                kernels::vadd(grad.data() + s.b_off, g.data(), grad.data() + s.b_off, s.out);
                if (l == 0) break;
                g_prev.assign(s.in, 0.0);
                kernels::matvec_t_add(model.params.data() + s.w_off, g.data(), g_prev.data(), s.out, s.in);
                // relu subgradient; 0 at 0
                const double* pre_prev = cache.pre[br][l - 1].data() + static_cast<std::size_t>(i) * s.in;
                g.resize(s.in);
                kernels::relu_mask(pre_prev, g_prev.data(), g.data(), s.in);
            }
        }
    }
    return grad;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (grad.size() != params.size()) throw DataError("gradient/parameter size mismatch");
    ++state.t;
    const double c1 = 1.0 - std::pow(beta1, state.t);
    const double c2 = 1.0 - std::pow(beta2, state.t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + eps);
    }
}

void sgd_step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    if (grad.size() != params.size()) throw DataError("gradient/parameter size mismatch");
    kernels::axpy(-lr, grad.data(), params.data(), params.size());
}

}  // namespace equiflow
