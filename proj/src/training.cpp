#include "equiflow/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "equiflow/common.hpp"
#include "equiflow/equilibrium.hpp"
#include "equiflow/fyloss.hpp"
#include "equiflow/kernels.hpp"
#include "equiflow/rng.hpp"

namespace equiflow {

Pipeline parse_pipeline(const std::string& s) {
    if (s == "fnn-baseline" || s == "fnn") return Pipeline::fnn_baseline;
    if (s == "cl") return Pipeline::cl;
    if (s == "pl") return Pipeline::pl;
    if (s == "er") return Pipeline::er;
    throw UsageError("unknown pipeline '" + s + "' (expected fnn-baseline, cl, pl or er)");
}

std::string to_string(Pipeline p) {
    switch (p) {
        case Pipeline::fnn_baseline: return "fnn-baseline";
        case Pipeline::cl: return "cl";
        case Pipeline::pl: return "pl";
        case Pipeline::er: return "er";
    }
    return "?";
}

double mean_absolute_error(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw DataError("MAE needs equally sized nonempty vectors");
    return kernels::sum_abs_diff(a.data(), b.data(), a.size()) / static_cast<double>(a.size());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Head head_for(Pipeline p) {
    switch (p) {
        case Pipeline::fnn_baseline: return Head::linear;
        case Pipeline::cl: return Head::neg_softplus;  // emits -theta: costs stay positive
        case Pipeline::pl: return Head::softplus;      // theta >= 0 keeps the potential convex
        case Pipeline::er: return Head::linear;
    }
    return Head::linear;
}

int branches_for(Pipeline p) { return p == Pipeline::pl ? 2 : 1; }

// Everything needed to run one instance through a pipeline: the solve graph
// (base, capacity-expanded or time-expanded), mapped commodities, capacities,
// per-row features, and the target lifted into solve space.
struct SolveContext {
    const Instance* inst = nullptr;
    bool expanded = false;
    bool timed = false;
    ExpandedNetwork exp;
    TimeExpandedNetwork tx;
    RoadNetwork plain;  // base copy when neither expansion applies

    std::vector<Commodity> commodities;
    std::vector<double> capacities;
    double total_demand = 0.0;
    FeatureMatrix features;            // rows = real arcs of the solve graph
    std::vector<double> target_solve;  // per solve-graph arc; empty without a target

    const RoadNetwork& graph() const { return timed ? tx.graph : (expanded ? exp.graph : plain); }
    int real_arcs() const { return graph().num_real_arcs(); }
};

FeatureConfig feature_config_for(Pipeline p, const Instance& inst) {
    FeatureConfig fc;
    fc.time_features = inst.time_variant();
    fc.capacity_index = (p == Pipeline::cl) && !inst.time_variant();
    return fc;
}

// Raw (unstandardized) per-row features for the solve graph.
FeatureMatrix assemble_features(const Instance& inst, const SolveContext& ctx,
                                const FeatureConfig& fc) {
    const FeatureMatrix base = base_arc_features(inst);
    if (!ctx.expanded && !ctx.timed) return base;

    FeatureMatrix out;
    if (ctx.expanded) {
        out.rows = ctx.exp.graph.num_arcs();
        out.cols = base.cols + (fc.capacity_index ? 1 : 0);
        out.data.assign(static_cast<std::size_t>(out.rows) * out.cols, 0.0);
        for (int e = 0; e < out.rows; ++e) {
            const double* src = base.row(ctx.exp.base_arc_of[e]);
            double* dst = out.row(e);
            std::copy(src, src + base.cols, dst);
            if (fc.capacity_index) dst[base.cols] = ctx.exp.copy_index_of[e];
        }
        return out;
    }
    // time expansion: base features + per-epoch time features
    const int T = ctx.tx.epochs;
    std::vector<double> trow;
    out.rows = ctx.tx.graph.num_real_arcs();
    out.cols = base.cols + 8;
    out.data.assign(static_cast<std::size_t>(out.rows) * out.cols, 0.0);
    for (int e = 0; e < out.rows; ++e) {
        const auto [a, t] = ctx.tx.base_of(e);
        const double* src = base.row(a);
        double* dst = out.row(e);
        std::copy(src, src + base.cols, dst);
        trow.clear();
        TimeContext tc;
        tc.epoch = t;
        tc.total_epochs = T;
        tc.epoch_duration = ctx.tx.epoch_duration;
        tc.morning_epoch = 0;
        tc.evening_epoch = T / 2;
        append_time_features(trow, tc);
        std::copy(trow.begin(), trow.end(), dst + base.cols);
    }
    return out;
}

SolveContext make_context(const Instance& inst, Pipeline p, int copies,
                          const std::vector<double>* target_report) {
    SolveContext ctx;
    ctx.inst = &inst;
    for (const Commodity& c : inst.commodities) ctx.total_demand += c.demand;

    if (inst.time_variant()) {
        if (p == Pipeline::cl && copies > 1)
            throw UsageError("capacity expansion is not supported on time-variant instances");
        ctx.timed = true;
        ctx.tx = time_expand(inst.net, inst.time_steps, inst.epoch_duration);
        ctx.commodities = ctx.tx.map_commodities(inst.commodities);
        ctx.capacities.assign(ctx.tx.graph.num_arcs(), kInf);
        if (p == Pipeline::cl)
            for (int e = 0; e < ctx.tx.graph.num_real_arcs(); ++e)
                ctx.capacities[e] = ctx.total_demand;  // loose box keeps the LP bounded
        if (target_report) {
            ctx.target_solve.assign(ctx.tx.graph.num_arcs(), 0.0);
            const int T = inst.time_steps;
            for (int e = 0; e < ctx.tx.graph.num_real_arcs(); ++e) {
                const auto [a, t] = ctx.tx.base_of(e);
                ctx.target_solve[e] = (*target_report)[static_cast<std::size_t>(a) * T + t];
            }
            // Collector flows are determined by conservation at each (v, t):
            // whatever excess the real arcs leave behind drains to the collector.
            const RoadNetwork& g = ctx.tx.graph;
            std::vector<double> excess = supply_vector(g, ctx.commodities);
            for (int e = 0; e < g.num_real_arcs(); ++e) {
                excess[g.arcs[e].tail] -= ctx.target_solve[e];
                excess[g.arcs[e].head] += ctx.target_solve[e];
            }
            for (int e = g.first_virtual_arc(); e < g.num_arcs(); ++e)
                ctx.target_solve[e] = std::max(0.0, excess[g.arcs[e].tail]);
        }
    } else if (p == Pipeline::cl) {
        const int m = std::max(1, copies);
        const double quantum = ctx.total_demand / m;
        ctx.expanded = true;
        ctx.exp = capacity_expand(inst.net, uniform_thresholds(inst.net, m, quantum));
        ctx.commodities = inst.commodities;
        ctx.capacities = ctx.exp.arc_capacity;
        if (target_report) ctx.target_solve = lift_flow(ctx.exp, *target_report);
    } else {
        ctx.plain = inst.net;
        ctx.commodities = inst.commodities;
        ctx.capacities.assign(inst.net.num_arcs(), kInf);
        if (target_report) ctx.target_solve = *target_report;
    }

    ctx.features = assemble_features(inst, ctx, feature_config_for(p, inst));
    return ctx;
}

// Maps a solve-space flow back to report space.
std::vector<double> to_report(const SolveContext& ctx, const std::vector<double>& solve_flow) {
    if (ctx.timed) return collapse_flow_matrix(ctx.tx, solve_flow);
    if (ctx.expanded) return collapse_flow(ctx.exp, solve_flow);
    return solve_flow;
}

// theta over the full solve graph from model outputs (virtual arcs get 0).
std::vector<double> pad_theta(const SolveContext& ctx, const std::vector<double>& outputs,
                              int branch, int rows) {
    std::vector<double> theta(ctx.graph().num_arcs(), 0.0);
    std::copy(outputs.begin() + static_cast<std::size_t>(branch) * rows,
              outputs.begin() + static_cast<std::size_t>(branch) * rows + rows, theta.begin());
    return theta;
}

LatencyParams pl_params(const SolveContext& ctx, const std::vector<double>& outputs, int rows) {
    LatencyParams p(2, ctx.graph().num_arcs());
    for (int k = 0; k < 2; ++k)
        std::copy(outputs.begin() + static_cast<std::size_t>(k) * rows,
                  outputs.begin() + static_cast<std::size_t>(k) * rows + rows, p.row(k));
    return p;
}

struct LayerEval {
    std::vector<double> upstream;  // dL/d(model output), branch-major
    double loss = 0.0;
};

// One Fenchel-Young layer evaluation: loss surrogate + gradient wrt theta.
LayerEval eval_layer(Pipeline p, const SolveContext& ctx, const std::vector<double>& outputs,
                     const PerturbationConfig& pcfg, double we_tol, int we_max_iter,
                     ColumnPool* pool) {
    const int rows = ctx.features.rows;
    LayerEval ev;
    switch (p) {
        case Pipeline::cl: {
            const std::vector<double> theta = pad_theta(ctx, outputs, 0, rows);
            LinearPerturbed pred = perturbed_linear_prediction(theta, ctx.graph(), ctx.capacities,
                                                               ctx.commodities, pcfg, pool);
            ev.upstream.resize(rows);
            kernels::vsub(pred.prediction.data(), ctx.target_solve.data(), ev.upstream.data(), rows);
            ev.loss = pred.value_mean -
                      kernels::dot(theta.data(), ctx.target_solve.data(), theta.size());
            return ev;
        }
        case Pipeline::pl: {
            const LatencyParams params = pl_params(ctx, outputs, rows);
            FwOptions fw;
            fw.tol = we_tol;
            fw.max_iter = we_max_iter;
            fw.away_steps = true;
            PolynomialPerturbed pred =
                perturbed_polynomial_prediction(params, ctx.graph(), ctx.commodities, pcfg, fw);
            std::vector<double> tgt = ctx.target_solve;
            tgt.resize(ctx.graph().num_arcs(), 0.0);
            const FeatureSpacePoint tmu = flow_feature_map(params, tgt);
            ev.upstream.resize(static_cast<std::size_t>(2) * rows);
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < rows; ++i)
                    ev.upstream[static_cast<std::size_t>(k) * rows + i] =
                        pred.mu.at(k, i) - tmu.at(k, i);
            ev.loss = kernels::dot(params.coef.data(), tmu.mu.data(), params.coef.size()) -
                      pred.potential_mean;
            return ev;
        }
        case Pipeline::er: {
            const std::vector<double> theta = pad_theta(ctx, outputs, 0, rows);
            std::vector<double> tgt = ctx.target_solve;
            tgt.resize(ctx.graph().num_arcs(), 0.0);
            EuclideanLossOptions opts;
            opts.projection.real_arcs = rows;
            LossReport rep = euclidean_fy_loss(ctx.graph(), ctx.commodities, theta, tgt, opts);
            ev.upstream.assign(rep.gradient.begin(), rep.gradient.begin() + rows);
            ev.loss = rep.loss;
            return ev;
        }
        case Pipeline::fnn_baseline: break;
    }
    throw UsageError("baseline has no equilibrium layer");
}

std::vector<double> layer_predict(Pipeline p, const SolveContext& ctx,
                                  const std::vector<double>& outputs,
                                  const PerturbationConfig& pcfg, double we_tol, int we_max_iter) {
    const int rows = ctx.features.rows;
    switch (p) {
        case Pipeline::cl: {
            const std::vector<double> theta = pad_theta(ctx, outputs, 0, rows);
            return perturbed_linear_prediction(theta, ctx.graph(), ctx.capacities, ctx.commodities,
                                               pcfg, nullptr)
                .prediction;
        }
        case Pipeline::pl: {
            FwOptions fw;
            fw.tol = we_tol;
            fw.max_iter = we_max_iter;
            fw.away_steps = true;
            return perturbed_polynomial_prediction(pl_params(ctx, outputs, rows), ctx.graph(),
                                                   ctx.commodities, pcfg, fw)
                .flow;
        }
        case Pipeline::er: {
            ProjectionOptions opts;
            opts.real_arcs = rows;
            return euclidean_projection(ctx.graph(), ctx.commodities,
                                        pad_theta(ctx, outputs, 0, rows), opts);
        }
        case Pipeline::fnn_baseline: break;
    }
    throw UsageError("baseline has no equilibrium layer");
}

// Expects ctx.features already standardized with the bundle's statistics.
PredictResult predict_with_context(const ModelBundle& bundle, const SolveContext& ctx,
                                   std::uint64_t seed, int threads) {
    const std::vector<double> outputs = mlp_forward(bundle.model, ctx.features);

    PredictResult res;
    if (bundle.pipeline == Pipeline::fnn_baseline) {
        // raw per-row outputs clamped at zero, remapped to report layout
        const int rows = ctx.features.rows;
        if (ctx.timed) {
            const int T = ctx.tx.epochs;
            res.report.assign(static_cast<std::size_t>(ctx.tx.base_arcs) * T, 0.0);
            for (int e = 0; e < rows; ++e) {
                const auto [a, t] = ctx.tx.base_of(e);
                res.report[static_cast<std::size_t>(a) * T + t] = std::max(0.0, outputs[e]);
            }
        } else {
            res.report.assign(outputs.begin(), outputs.begin() + rows);
            kernels::clamp_min_zero(res.report.data(), res.report.size());
        }
        return res;
    }
    PerturbationConfig pcfg = bundle.inference;
    pcfg.seed = seed;
    pcfg.threads = threads;
    res.solve_flow = layer_predict(bundle.pipeline, ctx, outputs, pcfg, bundle.we_tol,
                                   bundle.we_max_iter);
    res.report = to_report(ctx, res.solve_flow);
    return res;
}

double wall_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TrainResult run_training(const Dataset& ds, const TrainConfig& cfg) {
    if (ds.instances.empty() || ds.train_idx.empty()) throw DataError("dataset has no training instances");
    if (cfg.max_epochs < 1) throw UsageError("max epochs must be at least 1");
    if (!(cfg.lr >= 0.0)) throw UsageError("learning rate must be nonnegative");
    if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
        throw UsageError("optimizer must be adam or sgd");
    const bool baseline = cfg.pipeline == Pipeline::fnn_baseline;

    const auto t0 = std::chrono::steady_clock::now();

    // Contexts for train and validation instances; features are standardized
    // in place with statistics fitted on the training split only.
    std::vector<SolveContext> ctx(ds.instances.size());
    std::vector<char> needed(ds.instances.size(), 0);
    for (int i : ds.train_idx) needed[i] = 1;
    for (int i : ds.val_idx) needed[i] = 1;
    for (std::size_t i = 0; i < ds.instances.size(); ++i)
        if (needed[i]) ctx[i] = make_context(ds.instances[i], cfg.pipeline, cfg.copies, &ds.targets[i]);

    std::vector<FeatureMatrix> train_feats;
    for (int i : ds.train_idx) train_feats.push_back(ctx[i].features);
    FeatureConfig fc = feature_config_for(cfg.pipeline, ds.instances[ds.train_idx.front()]);
    fc.zscore = cfg.zscore;
    const FeatureStats stats = fit_feature_stats(train_feats);
    for (std::size_t i = 0; i < ds.instances.size(); ++i)
        if (needed[i]) standardize(ctx[i].features, stats, fc);

    MlpSpec spec;
    spec.input_dim = ctx[ds.train_idx.front()].features.cols;
    spec.head = head_for(cfg.pipeline);
    spec.branches = branches_for(cfg.pipeline);
    MlpModel model = MlpModel::create(spec, derive_seed(cfg.seed, "init"));

    ModelBundle bundle;
    bundle.pipeline = cfg.pipeline;
    bundle.feature_config = fc;
    bundle.stats = stats;
    bundle.copies = cfg.copies;
    bundle.inference = cfg.perturb;
    bundle.inference.samples = cfg.inference_samples >= 0 ? cfg.inference_samples : cfg.perturb.samples;
    bundle.we_tol = cfg.we_tol;
    bundle.we_max_iter = cfg.we_max_iter;

    AdamState adam;
    TrainResult result;
    double best_val = kInf;
    std::vector<double> best_params = model.params;
    int epochs_since_best = 0;
    int global_step = 0;

    std::vector<ColumnPool> pools(ds.instances.size());

    const int n_train = static_cast<int>(ds.train_idx.size());
    const int batch = std::max(1, cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (ColumnPool& p : pools) p.clear();  // warm starts do not cross epochs
        double epoch_loss = 0.0;
        int epoch_evals = 0;

        for (int start = 0; start < n_train; start += batch) {
            std::vector<double> grad_acc(model.params.size(), 0.0);
            int contributing = 0;
            for (int pos = start; pos < std::min(start + batch, n_train); ++pos) {
                const int i = ds.train_idx[pos];
                const std::uint64_t step_seed =
                    derive_seed(cfg.seed, "grad", static_cast<std::uint64_t>(epoch) * 100000 + pos);

                ForwardCache cache;
                const std::vector<double> outputs = mlp_forward(model, ctx[i].features, &cache);

                if (baseline) {
                    const int rows = ctx[i].features.rows;
                    std::vector<double> upstream(rows);
                    double mse = 0.0;
                    for (int r = 0; r < rows; ++r) {
                        const double d = outputs[r] - ctx[i].target_solve[r];
                        upstream[r] = 2.0 * d / rows;
                        mse += d * d / rows;
                    }
                    const std::vector<double> g = mlp_backward(model, ctx[i].features, cache, upstream);
                    kernels::vadd(grad_acc.data(), g.data(), grad_acc.data(), g.size());
                    epoch_loss += mse;
                    ++epoch_evals;
                    ++contributing;
                    continue;
                }

                bool done = false;
                for (int attempt = 0; attempt <= 3 && !done; ++attempt) {
                    PerturbationConfig pcfg = cfg.perturb;
                    pcfg.threads = cfg.threads;
                    pcfg.seed = attempt == 0 ? step_seed : derive_seed(step_seed, "retry", attempt);
                    try {
                        LayerEval ev = eval_layer(cfg.pipeline, ctx[i], outputs, pcfg, cfg.we_tol,
                                                  cfg.we_max_iter, cfg.threads > 1 ? nullptr : &pools[i]);
                        const std::vector<double> g =
                            mlp_backward(model, ctx[i].features, cache, ev.upstream);
                        kernels::vadd(grad_acc.data(), g.data(), grad_acc.data(), g.size());
                        epoch_loss += ev.loss;
                        ++epoch_evals;
                        ++contributing;
                        done = true;
                    } catch (const SolverError&) {
                        if (attempt == 3) ++result.skipped_steps;
                    }
                }
            }
            if (contributing == 0) continue;
            kernels::scal(1.0 / contributing, grad_acc.data(), grad_acc.size());
            if (cfg.optimizer == "adam")
                adam_step(model.params, grad_acc, adam, cfg.lr);
            else
                sgd_step(model.params, grad_acc, cfg.lr);
            ++global_step;
        }

        // validation MAE with a fixed inference seed so epochs are comparable;
        // a layer failure (cyclic-topology ER) poisons the epoch's metric
        // instead of aborting the run
        bundle.model = model;
        double val_mae = 0.0;
        if (!ds.val_idx.empty()) {
            try {
                for (int i : ds.val_idx) {
                    PredictResult pr = predict_with_context(bundle, ctx[i],
                                                            derive_seed(cfg.seed, "inference"),
                                                            cfg.threads);
                    val_mae += mean_absolute_error(pr.report, ds.targets[i]);
                }
                val_mae /= static_cast<double>(ds.val_idx.size());
            } catch (const SolverError&) {
                val_mae = kInf;
            }
        }

        TrainLogRow row;
        row.epoch = epoch;
        row.step = global_step;
        row.loss_surrogate = epoch_evals > 0 ? epoch_loss / epoch_evals : 0.0;
        row.val_mae = val_mae;
        row.wall_clock_s = wall_seconds(t0);
        result.log.push_back(row);

        if (ds.val_idx.empty() || val_mae < best_val - 1e-12) {
            best_val = val_mae;
            best_params = model.params;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        if (cfg.patience > 0 && epochs_since_best >= cfg.patience) break;
        if (wall_seconds(t0) > cfg.max_wall_clock_s) break;
    }

    bundle.model = model;
    // if validation never produced a finite score, keep the last parameters
    bundle.model.params = best_val == kInf ? model.params : best_params;
    bundle.best_val_mae = best_val == kInf ? -1.0 : best_val;
    result.bundle = std::move(bundle);
    return result;
}

}  // namespace

TrainResult train_baseline(const Dataset& ds, const TrainConfig& cfg) {
    TrainConfig c = cfg;
    c.pipeline = Pipeline::fnn_baseline;
    return run_training(ds, c);
}

TrainResult train_pipeline(const Dataset& ds, const TrainConfig& cfg) {
    if (cfg.pipeline == Pipeline::fnn_baseline)
        throw UsageError("train_pipeline needs an equilibrium layer (cl, pl or er)");
    return run_training(ds, cfg);
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
    return cfg.pipeline == Pipeline::fnn_baseline ? train_baseline(ds, cfg) : run_training(ds, cfg);
}

PredictResult predict(const ModelBundle& bundle, const Instance& inst, std::uint64_t seed,
                      int threads) {
    if (bundle.feature_config.time_features != inst.time_variant())
        throw DataError("checkpoint and instance disagree on time expansion");
    SolveContext ctx = make_context(inst, bundle.pipeline, bundle.copies, nullptr);
    standardize(ctx.features, bundle.stats, bundle.feature_config);
    return predict_with_context(bundle, ctx, seed, threads);
}

std::vector<EvalRecord> evaluate_split(const ModelBundle& bundle, const Dataset& ds,
                                       const std::vector<int>& idx, std::uint64_t seed,
                                       int threads) {
    if (idx.empty()) throw DataError("evaluation split is empty");
    std::vector<EvalRecord> out;
    for (int i : idx) {
        if (i < 0 || i >= static_cast<int>(ds.instances.size()))
            throw DataError("evaluation index out of range");
        const Instance& inst = ds.instances[i];
        const auto t0 = std::chrono::steady_clock::now();
        SolveContext ctx = make_context(inst, bundle.pipeline, bundle.copies, nullptr);
        standardize(ctx.features, bundle.stats, bundle.feature_config);
        PredictResult pr = predict_with_context(bundle, ctx, seed, threads);

        EvalRecord rec;
        rec.index = i;
        rec.mae = mean_absolute_error(pr.report, ds.targets[i]);
        rec.wall_clock_s = wall_seconds(t0);
        if (!pr.solve_flow.empty()) {
            rec.conservation_residual =
                check_conservation_aggregated(ctx.graph(), pr.solve_flow, ctx.commodities)
                    .max_residual;
            for (int a = 0; a < ctx.graph().num_arcs(); ++a)
                if (ctx.capacities[a] != kInf)
                    rec.capacity_excess =
                        std::max(rec.capacity_excess, pr.solve_flow[a] - ctx.capacities[a]);
        } else if (!inst.time_variant()) {
            rec.conservation_residual =
                check_conservation_aggregated(inst.net, pr.report, inst.commodities).max_residual;
        }
        out.push_back(rec);
    }
    return out;
}

void save_checkpoint(const ModelBundle& bundle, const std::string& path) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["pipeline"] = to_string(bundle.pipeline);
    j["head"] = to_string(bundle.model.spec.head);
    j["input_dim"] = bundle.model.spec.input_dim;
    j["hidden"] = bundle.model.spec.hidden;
    j["branches"] = bundle.model.spec.branches;
    j["copies"] = bundle.copies;
    j["feature_config"] = {{"time_features", bundle.feature_config.time_features},
                           {"capacity_index", bundle.feature_config.capacity_index},
                           {"zscore", bundle.feature_config.zscore}};
    j["feature_mean"] = bundle.stats.mean;
    j["feature_std"] = bundle.stats.stddev;
    j["inference"] = {{"samples", bundle.inference.samples},
                      {"epsilon", bundle.inference.epsilon},
                      {"antithetic", bundle.inference.antithetic}};
    j["we_tol"] = bundle.we_tol;
    j["we_max_iter"] = bundle.we_max_iter;
    j["best_val_mae"] = bundle.best_val_mae;
    j["params"] = bundle.model.params;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path);
    out << j.dump() << "\n";
}

ModelBundle load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read checkpoint " + path);
    nlohmann::json j;
    try {
        in >> j;
        ModelBundle b;
        b.pipeline = parse_pipeline(j.at("pipeline"));
        MlpSpec spec;
        spec.input_dim = j.at("input_dim");
        spec.hidden = j.at("hidden").get<std::vector<int>>();
        spec.head = parse_head(j.at("head"));
        spec.branches = j.at("branches");
        b.model = MlpModel::create(spec, 0);
        b.model.params = j.at("params").get<std::vector<double>>();
        if (b.model.layout.back().back().b_off + 1 != static_cast<int>(b.model.params.size()))
            throw DataError("checkpoint parameter count does not match the architecture");
        b.copies = j.at("copies");
        b.feature_config.time_features = j.at("feature_config").at("time_features");
        b.feature_config.capacity_index = j.at("feature_config").at("capacity_index");
        b.feature_config.zscore = j.at("feature_config").at("zscore");
        b.stats.mean = j.at("feature_mean").get<std::vector<double>>();
        b.stats.stddev = j.at("feature_std").get<std::vector<double>>();
        b.inference.samples = j.at("inference").at("samples");
        b.inference.epsilon = j.at("inference").at("epsilon");
        b.inference.antithetic = j.at("inference").at("antithetic");
        b.we_tol = j.at("we_tol");
        b.we_max_iter = j.at("we_max_iter");
        b.best_val_mae = j.at("best_val_mae");
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint " + path + ": " + e.what());
    }
}

void save_train_log(const std::vector<TrainLogRow>& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write training log " + path);
    out << "epoch,step,loss_surrogate,val_mae,wall_clock_s\n";
    for (const TrainLogRow& r : log)
        out << r.epoch << ',' << r.step << ',' << r.loss_surrogate << ',' << r.val_mae << ','
            << r.wall_clock_s << '\n';
}

}  // namespace equiflow
